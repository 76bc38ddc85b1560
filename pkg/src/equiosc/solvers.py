"""Minimax / maximin / anchored equioscillation solvers and a grid oracle.

Node systems are parametrised by an anchor ``a`` (node 0) and lifted offsets
``0 <= u_1 <= ... <= u_{n-1} <= 1`` of the remaining nodes from ``a``, so
that every parameter vector maps to a cyclically ordered system.

For singular kernels the extremal systems equioscillate, and for a fixed
anchor the equioscillating system is unique.  The minimax (maximin) value is
therefore the minimum (maximum) over anchors of the common arc-maxima value
``mu(a)``; both searches finish with a golden-section search on ``mu``.
"""
from __future__ import annotations

import itertools
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .kernels import SmoothMode, smooth
from .sumtrans import (
    NEG_INF,
    TOL_T,
    ArcMaxima,
    OutsideAdmissibleSet,
    Problem,
    arc_maxima,
    golden_max,
)
from .torus import wrap

# below this residual the Newton iteration stops (relative to 1 + |value|)
_NEWTON_RES = 1e-13
_NM_PENALTY = 1e6


class Certificate(str, Enum):
    EQUIOSCILLATING = "equioscillating"
    GAP_REPORT = "gap_report"


class Target(str, Enum):
    MINIMAX = "minimax"
    MAXIMIN = "maximin"


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolveConfig:
    multistart_count: int = 16
    tol_value: float = 1e-8
    tol_node: float = 1e-9
    max_iters: int = 100
    grid_resolution: int = 64
    eta_schedule: tuple[float, ...] = (0.1, 0.03, 0.01, 0.003, 0.001)
    seed: int = 0
    tol_t: float = TOL_T
    fd_step: float = 1e-7
    anchor_grid: int = 16
    nm_maxfev: int = 0  # 0 -> 100 * n

    def __post_init__(self) -> None:
        if not (self.tol_value > 0 and self.tol_node > 0 and self.tol_t > 0 and self.fd_step > 0):
            raise ValueError("tolerances must be positive")
        if self.multistart_count < 1 or self.max_iters < 1:
            raise ValueError("multistart_count and max_iters must be >= 1")
        eta = self.eta_schedule
        if any(e <= 0 for e in eta) or any(b >= a for a, b in zip(eta, eta[1:])):
            raise ValueError("eta_schedule must be positive and strictly decreasing")

    def to_dict(self) -> dict:
        return {
            "multistart_count": self.multistart_count,
            "tol_value": self.tol_value,
            "tol_node": self.tol_node,
            "max_iters": self.max_iters,
            "grid_resolution": self.grid_resolution,
            "eta_schedule": list(self.eta_schedule),
            "seed": self.seed,
            "tol_t": self.tol_t,
            "fd_step": self.fd_step,
            "anchor_grid": self.anchor_grid,
            "nm_maxfev": self.nm_maxfev,
        }


@dataclass
class SolveResult:
    nodes: tuple[float, ...]
    value: float
    arc_maxima: ArcMaxima
    equioscillation_gap: float
    certificate: Certificate
    iterations: int = 0
    wall_time: float = 0.0
    converged: bool = True
    message: str = ""

    def to_dict(self, timing: bool = False) -> dict:
        d = {
            "nodes": list(self.nodes),
            "value": _num(self.value),
            "arc_maxima": self.arc_maxima.to_dict(),
            "equioscillation_gap": _num(self.equioscillation_gap),
            "certificate": self.certificate.value,
            "iterations": self.iterations,
            "converged": self.converged,
            "message": self.message,
        }
        if timing:
            d["wall_time"] = self.wall_time
        return d


def _num(v: float):
    return v if math.isfinite(v) else ("-inf" if v < 0 else "inf")


def threads() -> int:
    try:
        return max(1, int(os.environ.get("EQUIOSC_THREADS", "1")))
    except ValueError:
        return 1


def _result(p: Problem, y: Sequence[float], value: float, cfg: SolveConfig, t0: float,
            iterations: int = 0, converged: bool = True, message: str = "") -> SolveResult:
    am = arc_maxima(p, y, cfg.tol_t)
    gap = am.gap
    cert = Certificate.EQUIOSCILLATING if gap <= cfg.tol_value else Certificate.GAP_REPORT
    return SolveResult(tuple(y), value, am, gap, cert, iterations, time.perf_counter() - t0, converged, message)


# -- parametrisation -------------------------------------------------------

def nodes_from(a: float, offsets: Sequence[float]) -> tuple[float, ...]:
    a = float(wrap(a))
    return (a,) + tuple(wrap(float(a + u)) for u in offsets)


def offsets_of(y: Sequence[float]) -> np.ndarray:
    """Lifted offsets of ``y[1:]`` from ``y[0]``, nondecreasing for ordered ``y``."""
    a = y[0]
    u = np.array([(v - a) % 1.0 for v in y[1:]])
    # nodes coinciding with the anchor after the first wrap sit at offset 1
    for i in range(1, len(u)):
        if u[i] < u[i - 1]:
            u[i] = 1.0
    return u


def _project(x: np.ndarray) -> tuple[float, ...]:
    return nodes_from(x[0], np.sort(np.clip(x[1:], 0.0, 1.0)))


def random_system(n: int, rng: np.random.Generator) -> tuple[float, ...]:
    """Uniform draw from the cyclic simplex via sorted uniform samples."""
    return tuple(float(v) for v in np.sort(rng.uniform(0.0, 1.0, size=n)))


# -- anchored equioscillation ----------------------------------------------

def _ext_sign_diff(hi: float, lo: float) -> float:
    if hi == NEG_INF and lo == NEG_INF:
        return 0.0
    return hi - lo


def solve_equioscillation(
    p: Problem,
    anchor: float,
    cfg: SolveConfig = SolveConfig(),
    warm_start: Sequence[float] | None = None,
) -> SolveResult:
    """Equioscillating system with node 0 pinned at ``anchor``.

    Damped Newton on the arc-maxima differences with a forward-difference
    Jacobian; iterates stay ordered with margin ``tol_node``.  If Newton
    stalls, coordinate bisection sweeps equalise neighbouring arcs one node
    at a time, followed by another Newton pass.
    """
    t0 = time.perf_counter()
    n = p.n
    a = wrap(anchor)
    if n == 1:
        return _result(p, (a,), arc_maxima(p, (a,), cfg.tol_t).values[0], cfg, t0)
    margin = cfg.tol_node
    if warm_start is not None:
        if len(warm_start) != n:
            raise ValueError(f"warm start needs {n} nodes")
        u = offsets_of((a,) + tuple(warm_start[1:]))
    else:
        u = np.arange(1, n) / n
    u = _clamp_offsets(u, margin)

    def residual(u: np.ndarray) -> tuple[np.ndarray, ArcMaxima]:
        am = arc_maxima(p, nodes_from(a, u), cfg.tol_t)
        if any(v == NEG_INF for v in am.values):
            raise OutsideAdmissibleSet(str(am.values))
        return np.diff(np.asarray(am.values)), am

    iters = 0
    try:
        r, am = residual(u)
    except OutsideAdmissibleSet:
        u, r, am, k = _bisection_sweeps(p, a, u, cfg)
        iters += k
    u, r, am, k, ok = _newton(residual, u, r, am, cfg)
    iters += k
    if not ok:
        u, r, am, k = _bisection_sweeps(p, a, u, cfg)
        iters += k
        u, r, am, k, ok = _newton(residual, u, r, am, cfg)
        iters += k
    y = nodes_from(a, u)
    res = _result(p, y, am.max, cfg, t0, iters)
    res.converged = res.certificate is Certificate.EQUIOSCILLATING
    if not res.converged:
        res.message = f"equioscillation gap {res.equioscillation_gap:.3e} above tolerance"
    return res


def _clamp_offsets(u: np.ndarray, margin: float) -> np.ndarray:
    u = np.sort(np.clip(np.asarray(u, dtype=float), margin, 1.0 - margin))
    for i in range(1, len(u)):
        u[i] = max(u[i], u[i - 1] + margin)
    if len(u) and u[-1] > 1.0 - margin:
        u = np.linspace(margin, 1.0 - margin, len(u) + 2)[1:-1] if len(u) > 1 else np.array([0.5])
    return u


def _valid(u: np.ndarray, margin: float) -> bool:
    if u[0] < margin or u[-1] > 1.0 - margin:
        return False
    return bool(np.all(np.diff(u) >= margin))


def _newton(residual, u, r, am, cfg: SolveConfig):
    """Damped Newton; returns ``(u, r, am, iterations, converged)``."""
    margin = cfg.tol_node
    m = len(u)
    norm = float(np.max(np.abs(r)))
    it = 0
    for it in range(1, cfg.max_iters + 1):
        scale = 1.0 + abs(am.max)
        if norm <= _NEWTON_RES * scale:
            return u, r, am, it - 1, True
        jac = np.empty((m, m))
        for i in range(m):
            step = cfg.fd_step
            e = u.copy()
            e[i] += step
            if not _valid(e, margin):
                step = -step
                e[i] = u[i] + step
            try:
                ri, _ = residual(e)
            except OutsideAdmissibleSet:
                return u, r, am, it, False
            jac[:, i] = (ri - r) / step
        try:
            d = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            d = np.linalg.lstsq(jac, -r, rcond=None)[0]
        if not np.all(np.isfinite(d)):
            return u, r, am, it, False
        lam = 1.0
        accepted = False
        while lam > 1e-12:
            cand = u + lam * d
            if _valid(cand, margin):
                try:
                    rc, amc = residual(cand)
                except OutsideAdmissibleSet:
                    rc = None
                if rc is not None:
                    nc = float(np.max(np.abs(rc)))
                    if nc < norm:
                        u, r, am, norm = cand, rc, amc, nc
                        accepted = True
                        break
            lam *= 0.5
        if not accepted:
            return u, r, am, it, norm <= 10.0 * _NEWTON_RES * scale
    return u, r, am, it, norm <= _NEWTON_RES * (1.0 + abs(am.max))


def _bisection_sweeps(p: Problem, a: float, u: np.ndarray, cfg: SolveConfig, sweeps: int = 200):
    """Equalise arcs ``j`` and ``j+1`` by bisecting node ``j+1`` between its neighbours."""
    u = np.array(u, dtype=float)
    m = len(u)
    k = 0

    def diff_at(v: np.ndarray, j: int) -> float:
        vals = arc_maxima(p, nodes_from(a, v), cfg.tol_t).values
        return _ext_sign_diff(vals[j + 1], vals[j])

    for _ in range(sweeps):
        for j in range(m):
            lo = u[j - 1] if j else 0.0
            hi = u[j + 1] if j + 1 < m else 1.0
            lo, hi = lo + cfg.tol_node, hi - cfg.tol_node
            if hi <= lo:
                continue
            v = u.copy()
            # node j+1 sweeps from its left to its right neighbour: the
            # difference goes from +inf (arc j empty) towards -inf
            while hi - lo > 1e-15:
                mid = 0.5 * (lo + hi)
                v[j] = mid
                k += 1
                if diff_at(v, j) > 0.0:
                    lo = mid
                else:
                    hi = mid
            u[j] = 0.5 * (lo + hi)
        am = arc_maxima(p, nodes_from(a, u), cfg.tol_t)
        if am.gap <= _NEWTON_RES * (1.0 + abs(am.max)) or m == 1:
            break
    am = arc_maxima(p, nodes_from(a, u), cfg.tol_t)
    if any(v == NEG_INF for v in am.values):
        raise SolverError(f"anchored solve left the admissible set at anchor {a}")
    return u, np.diff(np.asarray(am.values)), am, k


@dataclass
class TracePoint:
    anchor: float
    value: float
    nodes: tuple[float, ...]
    ok: bool
    message: str = ""


def trace_mu(p: Problem, a_grid: Sequence[float], cfg: SolveConfig = SolveConfig(),
             warm_start: Sequence[float] | None = None) -> list[TracePoint]:
    """Continuation sweep of the equioscillation value over anchors."""
    out = []
    prev: tuple[float, ...] | None = tuple(warm_start) if warm_start is not None else None
    for a in a_grid:
        ws = None
        if prev is not None:
            ws = nodes_from(a, offsets_of(prev))
        try:
            r = solve_equioscillation(p, a, cfg, ws)
            out.append(TracePoint(wrap(a), r.value, r.nodes, r.converged, r.message))
            if r.converged:
                prev = r.nodes
        except (SolverError, OutsideAdmissibleSet) as exc:
            out.append(TracePoint(wrap(a), math.nan, (), False, str(exc)))
    return out


# -- global solvers ----------------------------------------------------------

def _objective(p: Problem, target: Target, cfg: SolveConfig) -> Callable[[Sequence[float]], float]:
    """Value to minimise: m_bar* for minimax, -m_under* for maximin."""
    def obj(y: Sequence[float]) -> float:
        am = arc_maxima(p, y, cfg.tol_t)
        if target is Target.MINIMAX:
            return am.max
        v = am.min
        return -v if v > NEG_INF else _NM_PENALTY
    return obj


def _nelder_mead(p: Problem, obj, starts: list[tuple[float, ...]], cfg: SolveConfig):
    n = p.n
    maxfev = cfg.nm_maxfev or 100 * n

    def run(y0):
        x0 = np.concatenate(([y0[0]], offsets_of(y0)))

        def fx(x):
            return obj(_project(x))

        res = minimize(fx, x0, method="Nelder-Mead",
                       options={"maxfev": maxfev, "xatol": 1e-7, "fatol": 1e-10,
                                "initial_simplex": x0 + np.vstack([np.zeros(n), 0.05 * np.eye(n)])})
        y = _project(res.x)
        return obj(y), y, int(res.nfev)

    with ThreadPoolExecutor(max_workers=threads()) as ex:
        runs = list(ex.map(run, starts))
    # deterministic merge: best value, then lexicographic nodes
    runs.sort(key=lambda r: (r[0], r[1]))
    return runs[0], sum(r[2] for r in runs)


def _mu_search(p: Problem, target: Target, a0: float, warm: Sequence[float], cfg: SolveConfig,
               radius: float, points: int = 9):
    """Optimise ``mu(a)`` near ``a0``: bracket on a small grid, then golden section."""
    sign = 1.0 if target is Target.MINIMAX else -1.0
    cache: dict[float, SolveResult | None] = {}
    last = [tuple(warm)]

    def mu(a: float) -> float:
        if a in cache:
            r = cache[a]
        else:
            ws = nodes_from(a, offsets_of(last[0]))
            try:
                r = solve_equioscillation(p, a, cfg, ws)
                if not r.converged:
                    r = None
            except (SolverError, OutsideAdmissibleSet):
                r = None
            cache[a] = r
            if r is not None:
                last[0] = r.nodes
        return math.inf if r is None else sign * r.value

    grid = [a0 + radius * s for s in np.linspace(-1.0, 1.0, points)]
    vals = [mu(a) for a in grid]
    i = int(np.argmin(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, points - 1)]
    a_best, _ = golden_max(lambda a: -mu(a), lo, hi, 1e-10)
    cands = [(mu(a), a) for a in (a_best, grid[i])]
    val, a = min(cands)
    return cache.get(a), len(cache)


def _solve_extremal(p: Problem, target: Target, cfg: SolveConfig,
                    warm_start: Sequence[float] | None) -> SolveResult:
    t0 = time.perf_counter()
    obj = _objective(p, target, cfg)
    sign = 1.0 if target is Target.MINIMAX else -1.0
    n = p.n
    if n == 1:
        return _solve_single(p, target, cfg, t0)

    rng = np.random.default_rng(cfg.seed)
    starts = [] if warm_start is None else [tuple(warm_start)]
    count = cfg.multistart_count if warm_start is None else max(1, cfg.multistart_count // 4)
    starts += [random_system(n, rng) for _ in range(count)]
    (best_val, best_y, _), nfev = _nelder_mead(p, obj, starts, cfg)
    iters = nfev
    best = (best_val, best_y)

    if not p.kernel.singular:
        # without the singularity the optimum may sit on a field feature that
        # a simplex search never lands on exactly
        for y0 in _feature_systems(p):
            v = obj(y0)
            if v < best[0] - 1e-15:
                best = (v, y0)
    else:
        seeds = [best_y]
        if warm_start is None and cfg.anchor_grid > 0:
            grid = [i / cfg.anchor_grid for i in range(cfg.anchor_grid)]
            trace = [tp for tp in trace_mu(p, grid, cfg, best_y) if tp.ok]
            iters += len(grid)
            if trace:
                tp = min(trace, key=lambda tp: sign * tp.value)
                seeds.append(tp.nodes)
        radius = 1.0 / max(cfg.anchor_grid, 8)
        for y0 in seeds:
            r, k = _mu_search(p, target, y0[0], y0, cfg, radius)
            iters += k
            if r is not None:
                v = obj(r.nodes)
                if v < best[0] - 1e-15:
                    best = (v, r.nodes)
    y = best[1]
    am = arc_maxima(p, y, cfg.tol_t)
    value = am.max if target is Target.MINIMAX else am.min
    res = _result(p, y, value, cfg, t0, iters)
    return res


def _feature_systems(p: Problem) -> list[tuple[float, ...]]:
    """Evenly spread systems with node 0 on an override point or piece boundary."""
    pts = sorted({wrap(t) for t, _ in p.field.overrides} | {wrap(pc.start) for pc in p.field.pieces})
    spread = np.arange(1, p.n) / p.n
    return [nodes_from(t, spread) for t in pts]


def _solve_single(p: Problem, target: Target, cfg: SolveConfig, t0: float) -> SolveResult:
    # one arc (the whole circle): m_bar* = m_under* = sup F, a function of one node
    sign = 1.0 if target is Target.MINIMAX else -1.0

    def v(a: float) -> float:
        return sign * arc_maxima(p, (wrap(a),), cfg.tol_t).values[0]

    N = max(cfg.grid_resolution, 8)
    grid = [i / N for i in range(N)]
    vals = [v(a) for a in grid]
    i = int(np.argmin(vals))
    a, _ = golden_max(lambda s: -v(s), grid[i] - 1.0 / N, grid[i] + 1.0 / N, 1e-12)
    best = min([(v(a), wrap(a)), (vals[i], grid[i])])
    y = (best[1],)
    return _result(p, y, sign * best[0], cfg, t0, N)


def solve_minimax(p: Problem, cfg: SolveConfig = SolveConfig(),
                  warm_start: Sequence[float] | None = None) -> SolveResult:
    """Node system minimising the largest arc maximum."""
    return _solve_extremal(p, Target.MINIMAX, cfg, warm_start)


def solve_maximin(p: Problem, cfg: SolveConfig = SolveConfig(),
                  warm_start: Sequence[float] | None = None) -> SolveResult:
    """Node system maximising the smallest arc maximum."""
    return _solve_extremal(p, Target.MAXIMIN, cfg, warm_start)


@dataclass
class HomotopyResult:
    target: Target
    etas: list[float]
    values: list[float]
    nodes: list[tuple[float, ...]]
    monotone: bool
    final: SolveResult

    def to_dict(self) -> dict:
        return {
            "target": self.target.value,
            "etas": self.etas,
            "values": self.values,
            "nodes": [list(y) for y in self.nodes],
            "monotone": self.monotone,
            "final": self.final.to_dict(),
        }


def smoothing_homotopy(p: Problem, cfg: SolveConfig = SolveConfig(),
                       target: Target | str = Target.MINIMAX, slack: float = 1e-9) -> HomotopyResult:
    """Solve along a decreasing eta schedule with strictly concave smoothings of K.

    Minimax uses the upper smoothing ``K + eta|sin|`` (values nonincreasing
    as eta decreases), maximin the lower one (values nondecreasing).
    """
    target = Target(target)
    if not p.kernel.singular:
        raise ValueError("smoothing homotopy needs a singular kernel")
    mode = SmoothMode.UPPER if target is Target.MINIMAX else SmoothMode.LOWER
    solve = solve_minimax if target is Target.MINIMAX else solve_maximin
    values, nodes = [], []
    warm = None
    res = None
    for eta in cfg.eta_schedule:
        pe = p.with_kernel(smooth(p.kernel, eta, mode))
        res = solve(pe, cfg, warm)
        values.append(res.value)
        nodes.append(res.nodes)
        warm = res.nodes
    if target is Target.MINIMAX:
        monotone = all(b <= a + slack for a, b in zip(values, values[1:]))
    else:
        monotone = all(b >= a - slack for a, b in zip(values, values[1:]))
    return HomotopyResult(target, list(cfg.eta_schedule), values, nodes, monotone, res)


# -- brute-force oracle ------------------------------------------------------

@dataclass
class OracleResult:
    M_est: float
    m_est: float
    argmin: tuple[float, ...]
    argmax: tuple[float, ...]
    grid: int

    def to_dict(self) -> dict:
        return {"M_est": _num(self.M_est), "m_est": _num(self.m_est),
                "argmin": list(self.argmin), "argmax": list(self.argmax), "grid": self.grid}


def brute_force(p: Problem, N: int, oversample: int = 4, cap: int = 1 << 22) -> OracleResult:
    """Exhaustive grid search over ordered node systems on the ``N``-point torus grid.

    Arc maxima are taken over a ``N * oversample``-point grid in ``t`` that
    contains the node grid; nothing from the exact arc-maximisation path is
    used.  Systems whose last nodes wrap onto node 0 are covered only as
    limits (they are degenerate).
    """
    n = p.n
    if N < 1:
        raise ValueError("N must be positive")
    if N ** n > cap:
        raise ValueError(f"grid {N}^{n} exceeds the cap {cap}")
    M = N * oversample
    tgrid = np.arange(M) / M
    Jg = np.asarray(p.field.values(tgrid), dtype=float)
    Kt = np.asarray(p.kernel.values(tgrid), dtype=float)
    Kt[0] = p.kernel(0.0)
    nu = np.asarray(p.nu)
    mi = np.arange(M + 1) % M
    if n > 1:
        offs = np.array(list(itertools.combinations_with_replacement(range(N), n - 1)), dtype=int) * oversample
    else:
        offs = np.zeros((1, 0), dtype=int)

    def row(i1: int):
        q = i1 * oversample
        F = np.broadcast_to(Jg[(mi + q) % M] + nu[0] * Kt[mi], (len(offs), M + 1)).copy()
        for j in range(n - 1):
            F += nu[j + 1] * Kt[(mi[None, :] - offs[:, j:j + 1]) % M]
        mbar = F.max(axis=1)
        bounds = np.concatenate([np.zeros((len(offs), 1), dtype=int), offs, np.full((len(offs), 1), M)], axis=1)
        idx = np.arange(M + 1)[None, :]
        munder = np.full(len(offs), np.inf)
        for j in range(n):
            mask = (idx >= bounds[:, j:j + 1]) & (idx <= bounds[:, j + 1:j + 2])
            munder = np.minimum(munder, np.where(mask, F, -np.inf).max(axis=1))
        k1, k2 = int(np.argmin(mbar)), int(np.argmax(munder))
        return mbar[k1], k1, munder[k2], k2

    with ThreadPoolExecutor(max_workers=threads()) as ex:
        rows = list(ex.map(row, range(N)))
    best_min, best_max = None, None
    for i1, (vmin, k1, vmax, k2) in enumerate(rows):
        if best_min is None or vmin < best_min[0]:
            best_min = (vmin, i1, k1)
        if best_max is None or vmax > best_max[0]:
            best_max = (vmax, i1, k2)

    def system(i1: int, k: int) -> tuple[float, ...]:
        return nodes_from(i1 / N, offs[k] / M)

    return OracleResult(float(best_min[0]), float(best_max[0]),
                        system(best_min[1], best_min[2]), system(best_max[1], best_max[2]), N)
