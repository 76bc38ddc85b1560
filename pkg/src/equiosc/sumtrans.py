"""Sums of translates, arc maxima and the difference map.

For nodes ``y`` and a field ``J``::

    f(y, t) = sum_j nu_j K(t - y_j)        F(y, t) = J(t) + f(y, t)

``m_j*(y)`` is the supremum of ``F(y, .)`` over the closed arc
``[y_j, y_{j+1}]``.  Inside an arc every translate is concave, so on each
finite field piece ``F`` is concave and a golden-section search finds the
supremum; piece boundaries, arc ends and override points are checked
explicitly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .fields import PiecewiseField, validate_n_field
from .kernels import Kernel, log_sine
from .torus import EPS_TOR, Arc, arcs_of, cut_lift, cyclic_order, wrap

NEG_INF = -math.inf
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
TOL_T = 1e-12
# relative slack under which an attained candidate beats an approached one
_TIE = 1e-14


@dataclass(frozen=True)
class Problem:
    kernel: Kernel
    nu: tuple[float, ...]
    field: PiecewiseField

    def __post_init__(self) -> None:
        nu = tuple(float(v) for v in self.nu)
        object.__setattr__(self, "nu", nu)
        if len(nu) < 1:
            raise ValueError("need n >= 1")
        if not all(v > 0 and math.isfinite(v) for v in nu):
            raise ValueError("nu must be positive")
        if not self.kernel.periodic:
            raise ValueError("kernel must be periodic")
        if not validate_n_field(self.field, len(nu)):
            raise ValueError(f"field is not an n-field for n={len(nu)}")

    @property
    def n(self) -> int:
        return len(self.nu)

    def with_kernel(self, kernel: Kernel) -> "Problem":
        return Problem(kernel, self.nu, self.field)


@dataclass(frozen=True)
class ArcMaxima:
    values: tuple[float, ...]
    maximizers: tuple[float, ...]
    attained: tuple[bool, ...]
    arcs: tuple[Arc, ...]

    @property
    def max(self) -> float:
        return max(self.values)

    @property
    def min(self) -> float:
        return min(self.values)

    @property
    def gap(self) -> float:
        if self.min == NEG_INF:
            return math.inf
        return self.max - self.min

    def to_dict(self) -> dict:
        return {
            "values": [_jsonable(v) for v in self.values],
            "maximizers": list(self.maximizers),
            "attained": list(self.attained),
        }


def _jsonable(v: float):
    return v if math.isfinite(v) else ("-inf" if v < 0 else "inf")


def _make_f(kernel: Kernel, nu: Sequence[float], nodes: Sequence[float]) -> Callable[[float], float]:
    """Pure sum of translates as a fast closure over torus points."""
    K = kernel.func
    pairs = tuple(zip(nu, nodes))

    def f(t: float) -> float:
        s = 0.0
        for w, y in pairs:
            d = t - y
            s += w * K(d)
        return s

    return f


def f_eval(p: Problem, y: Sequence[float], t: float) -> float:
    return _make_f(p.kernel, p.nu, y)(wrap(t))


def F_eval(p: Problem, y: Sequence[float], t: float) -> float:
    t = wrap(t)
    j = p.field.eval(t)
    if j == NEG_INF:
        return NEG_INF
    return j + _make_f(p.kernel, p.nu, y)(t)


def golden_max(g: Callable[[float], float], lo: float, hi: float, tol: float = TOL_T) -> tuple[float, float]:
    """Maximise a unimodal ``g`` on ``[lo, hi]``; returns ``(t, g(t))`` at the best probe."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    gc, gd = g(c), g(d)
    while b - a > tol:
        if gc >= gd:
            b, d, gd = d, c, gc
            c = b - INV_PHI * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + INV_PHI * (b - a)
            gd = g(d)
    return (c, gc) if gc >= gd else (d, gd)


def _pick(cands: list[tuple[float, float, bool]]) -> tuple[float, float, bool]:
    """Best candidate; earlier entries win near-ties, attained beats approached."""
    best = cands[0]
    for c in cands[1:]:
        v, bv = c[0], best[0]
        if v == NEG_INF or bv == NEG_INF:
            if v > bv:
                best = c
            continue
        tie = _TIE * (1.0 + abs(bv))
        if v > bv + tie or (v >= bv - tie and c[2] and not best[2]):
            best = c
    return best


def sup_over_arc(
    p: Problem,
    nodes: Sequence[float],
    start: float,
    length: float,
    end: float | None = None,
    tol_t: float = TOL_T,
    f: Callable[[float], float] | None = None,
) -> tuple[float, float, bool]:
    """Supremum of ``F(nodes, .)`` over the closed arc of ``length`` from ``start``.

    Returns ``(value, maximizer, attained)``.  ``end`` is the exact torus end
    point (defaults to ``wrap(start + length)``).  ``nodes`` must not lie in
    the open arc.
    """
    J = p.field
    if f is None:
        f = _make_f(p.kernel, p.nu, nodes)
    if end is None:
        end = wrap(start + length)

    def at_point(t: float, piece_val: float | None = None) -> tuple[float, float, bool]:
        if piece_val is None:
            jv = J.eval(t)
            att = True
        else:
            jv = piece_val
            att = J.override_at(t) is None
        if jv == NEG_INF:
            return (NEG_INF, t, att)
        return (jv + f(t), t, att)

    if length <= 0.0:
        return at_point(start)

    # exact points first so that they win near-ties against search probes
    exact: list[tuple[float, float, bool]] = []
    probes: list[tuple[float, float, bool]] = []
    for t_ov, _ in J.overrides:
        off = cut_lift(start, t_ov)
        if off > 1.0 - EPS_TOR:
            off = 0.0
        if off <= length + EPS_TOR:
            exact.append(at_point(t_ov))
    s, e = start, start + length
    for k in (0.0, 1.0):
        for piece in J.pieces:
            a, b = piece.start + k, piece.end + k
            lo, hi = max(s, a), min(e, b)
            if lo > hi or (lo == hi and lo >= b) or not piece.finite:
                continue
            hi_open = hi >= b
            t_lo = start if lo == s else piece.start
            exact.append(at_point(t_lo, piece.at(t_lo)))
            if hi_open:
                # one-sided limit at the open piece end, via the piece formula
                tb = wrap(piece.end)
                exact.append((piece.at(piece.end) + f(tb), tb, False))
            elif hi > lo:
                exact.append(at_point(end, piece.at(hi - k)))
            if hi - lo > 2.0 * tol_t:
                at = piece.at

                def g(u: float, at=at, k=k) -> float:
                    return at(u - k) + f(wrap(u))

                u, val = golden_max(g, lo, hi, tol_t)
                tu = wrap(u)
                probes.append((val, tu, J.override_at(tu) is None))
    cands = exact + probes
    if not cands:
        return (NEG_INF, start, True)
    return _pick(cands)


def arc_maxima(p: Problem, y: Sequence[float], tol_t: float = TOL_T) -> ArcMaxima:
    y = tuple(float(v) for v in y)
    if len(y) != p.n:
        raise ValueError(f"expected {p.n} nodes, got {len(y)}")
    if not cyclic_order(y).ordered:
        raise ValueError(f"nodes {y} are not in cyclic order")
    arcs = arcs_of(y)
    f = _make_f(p.kernel, p.nu, y)
    vals, ts, att = [], [], []
    for arc in arcs:
        v, t, a = sup_over_arc(p, y, arc.start, arc.length, arc.end, tol_t, f)
        vals.append(v)
        ts.append(t)
        att.append(a)
    return ArcMaxima(tuple(vals), tuple(ts), tuple(att), tuple(arcs))


def m_bar_star(p: Problem, y: Sequence[float], tol_t: float = TOL_T) -> float:
    return arc_maxima(p, y, tol_t).max


def m_under_star(p: Problem, y: Sequence[float], tol_t: float = TOL_T) -> float:
    return arc_maxima(p, y, tol_t).min


class OutsideAdmissibleSet(ValueError):
    """Some arc maximum is -inf, so the difference map is undefined."""


def phi_star(p: Problem, y: Sequence[float], tol_t: float = TOL_T) -> np.ndarray:
    """Consecutive arc-maxima differences ``m_{j+1}* - m_j*`` for j = 1..n-1."""
    m = arc_maxima(p, y, tol_t).values
    if any(v == NEG_INF for v in m):
        raise OutsideAdmissibleSet(f"arc maxima {m} contain -inf")
    return np.diff(np.asarray(m))


def interval_maxima(p: Problem, c: float, x: Sequence[float], tol_t: float = TOL_T) -> list[float]:
    """Interval maxima ``m_0..m_n`` of the problem cut open at ``c``.

    ``x`` are lifted node positions in ``[0, 1)`` (any order); intervals are
    ``[0, x_(1)], [x_(1), x_(2)], ..., [x_(n), 1]`` in sorted order.
    Used to check the cut correspondence of arc and interval maxima.
    """
    xs = sorted(float(v) for v in x)
    nodes = [wrap(v + c) for v in xs]
    f = _make_f(p.kernel, p.nu, [wrap(v + c) for v in x])
    bounds = [0.0] + xs + [1.0]
    out = []
    for lo, hi in zip(bounds, bounds[1:]):
        start = wrap(lo + c)
        end = wrap(hi + c)
        out.append(sup_over_arc(p, nodes, start, hi - lo, end, tol_t, f)[0])
    return out


def gtp_weighted_norm(J: PiecewiseField, nu: Sequence[float], z: Sequence[float]) -> float:
    """Weighted sup norm of the monic product of |sin pi(t - z_j)|^nu_j with log-weight ``J``."""
    p = Problem(log_sine(), tuple(nu), J)
    return math.exp(m_bar_star(p, z))
