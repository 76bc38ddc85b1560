"""Node perturbations that shrink a chosen set of arcs and grow the rest.

Given a partition ``I | J`` of the arc indices, :func:`perturb_general`
moves nodes so that every ``I`` arc shrinks and every ``J`` arc grows while
the sum of translates decreases on the shrunken arcs and increases on the
grown ones.  Indices in this module are 0-based; arc ``j`` runs from node
``j`` to node ``j+1 (mod n)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .kernels import Kernel
from .sumtrans import NEG_INF, Problem, _make_f, arc_maxima
from .torus import Arc, arc_contains_arc, arcs_of, cyclic_order, same_point, wrap

MU_TOL = 1e-12


@dataclass(frozen=True)
class Partition:
    I: frozenset[int]
    J: frozenset[int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "I", frozenset(self.I))
        object.__setattr__(self, "J", frozenset(self.J))
        if not self.I or not self.J:
            raise ValueError("partition must be nontrivial")
        if self.I & self.J:
            raise ValueError("partition classes overlap")
        n = len(self.I) + len(self.J)
        if self.I | self.J != frozenset(range(n)):
            raise ValueError("partition must cover 0..n-1")

    @property
    def n(self) -> int:
        return len(self.I) + len(self.J)

    @classmethod
    def from_shrink(cls, shrink: Iterable[int], n: int) -> "Partition":
        I = frozenset(shrink)
        return cls(I, frozenset(range(n)) - I)

    def same_class(self, a: int, b: int) -> bool:
        return (a in self.I) == (b in self.I)

    def alternating(self) -> bool:
        n = self.n
        return all(not self.same_class(k, (k + 1) % n) for k in range(n))


def widen_pair(alpha: float, a: float, b: float, beta: float, p: float, q: float) -> float:
    """Balance ratio ``p(a - alpha) / (q(beta - b))`` of a pair move."""
    if not (0.0 <= alpha < a < b < beta <= 1.0):
        raise ValueError(f"need 0 <= alpha < a < b < beta <= 1, got {(alpha, a, b, beta)}")
    if not (p > 0 and q > 0):
        raise ValueError("p and q must be positive")
    return p * (a - alpha) / (q * (beta - b))


@dataclass
class WideningReport:
    checked: int = 0
    violations: list[tuple[float, float]] = field(default_factory=list)
    min_gap_outside: float = math.inf
    min_gap_inside: float = math.inf
    strict: bool = True

    @property
    def ok(self) -> bool:
        return not self.violations


def check_widening(
    K: Kernel,
    alpha: float,
    a: float,
    b: float,
    beta: float,
    p: float,
    q: float,
    t_samples: Sequence[float],
    slack: float = 1e-12,
) -> WideningReport:
    """Check the pair-widening inequalities at the sampled ``t``.

    Outside ``[alpha, beta]`` moving the pair inwards (to ``a, b``) must not
    decrease ``pK(t-.) + qK(t-.)``; inside ``[a, b]`` it must not increase it.
    Gaps are ``new - old`` outside and ``old - new`` inside.
    """
    if not K.periodic:
        raise ValueError("kernel must be periodic")
    mu = widen_pair(alpha, a, b, beta, p, q)
    if abs(mu - 1.0) > MU_TOL:
        raise ValueError(f"balance ratio mu = {mu} != 1")
    rep = WideningReport()
    for t in t_samples:
        old = p * K(t - alpha) + q * K(t - beta)
        new = p * K(t - a) + q * K(t - b)
        if t <= alpha or t >= beta:
            gap = _ext_diff(new, old)
            rep.min_gap_outside = min(rep.min_gap_outside, gap)
        elif a <= t <= b:
            gap = _ext_diff(old, new)
            rep.min_gap_inside = min(rep.min_gap_inside, gap)
        else:
            continue
        rep.checked += 1
        tol = slack * (1.0 + abs(old if math.isfinite(old) else new))
        if gap < -tol:
            rep.violations.append((t, gap))
        if not gap > 0:
            rep.strict = False
    return rep


def _ext_diff(x: float, y: float) -> float:
    """x - y in the extended reals with -inf - (-inf) := 0."""
    if x == NEG_INF and y == NEG_INF:
        return 0.0
    return x - y


def _arc_length(w: Sequence[float], j: int) -> float:
    return arcs_of(w)[j].length


def _case0_max_h(w: Sequence[float], nu: Sequence[float], part: Partition) -> float:
    arcs = arcs_of(w)
    n = len(w)
    delta = min(arcs[i].length for i in part.I)
    bound = 0.5 * delta / max(nu)
    # I arcs shrink by h/nu_i + h/nu_{i+1}; keep that below their length
    for i in part.I:
        shrink = 1.0 / nu[i] + 1.0 / nu[(i + 1) % n]
        bound = min(bound, arcs[i].length / shrink)
    return bound


def perturb_case0(w: Sequence[float], nu: Sequence[float], part: Partition, h: float) -> tuple[float, ...]:
    """Alternating partition: move every node by ``h / nu_l``.

    With ``I`` the odd 1-based indices this is ``w'_l = w_l - (-1)^l h/nu_l``:
    the start node of each ``I`` arc moves forward and its end node moves
    back.  The even case is the same formula after shifting labels by one.
    """
    n = len(w)
    if part.n != n or len(nu) != n:
        raise ValueError("size mismatch between nodes, nu and partition")
    if not part.alternating():
        raise ValueError("case 0 needs an alternating partition")
    if not cyclic_order(w).ordered:
        raise ValueError("nodes are not in cyclic order")
    arcs = arcs_of(w)
    if any(arcs[i].length <= 0.0 for i in part.I):
        raise ValueError("degenerate arc in the shrink class")
    hmax = _case0_max_h(w, nu, part)
    if not (0.0 < h < hmax):
        raise ValueError(f"h must lie in (0, {hmax:.6g}), got {h}")
    return tuple(wrap(w[l] + (h if l in part.I else -h) / nu[l]) for l in range(n))


def _drop_index(part: Partition) -> int | None:
    n = part.n
    for k in range(n):
        if part.same_class(k - 1 if k else n - 1, k):
            return k
    return None


def _reduce(part: Partition, k: int) -> Partition:
    """Drop arc index ``k`` (merged into arc ``k-1``) and shift later indices down."""
    def m(i: int) -> int:
        return i if i < k else i - 1

    return Partition(
        frozenset(m(i) for i in part.I if i != k),
        frozenset(m(j) for j in part.J if j != k),
    )


def max_step(w: Sequence[float], nu: Sequence[float], part: Partition) -> float:
    """Upper bound on ``h`` for which :func:`perturb_general` is valid."""
    w = tuple(w)
    nu = tuple(nu)
    k = _drop_index(part)
    if k is None:
        return _case0_max_h(w, nu, part)
    n = len(w)
    bound = max_step(w[:k] + w[k + 1:], nu[:k] + nu[k + 1:], _reduce(part, k))
    prev, nxt = w[k - 1], w[(k + 1) % n]
    if not (same_point(prev, w[k]) or same_point(w[k], nxt)):
        # reinserted node must stay strictly between its neighbours
        gap = min(_arc_length(w, k - 1 if k else n - 1), _arc_length(w, k))
        bound = min(bound, gap * min(nu))
    return bound


def perturb_general(w: Sequence[float], nu: Sequence[float], part: Partition, h: float | None = None) -> tuple[float, ...]:
    """Shrink the ``I`` arcs and grow the ``J`` arcs of ``w``.

    While two neighbouring arcs ``k-1, k`` share a class, node ``k`` is taken
    out (its two arcs merge), the reduced system is perturbed recursively and
    ``w_k`` is put back unchanged.  An alternating partition is handled by
    :func:`perturb_case0`.
    """
    w = tuple(float(v) for v in w)
    nu = tuple(float(v) for v in nu)
    n = len(w)
    if part.n != n or len(nu) != n:
        raise ValueError("size mismatch between nodes, nu and partition")
    if not cyclic_order(w).ordered:
        raise ValueError("nodes are not in cyclic order")
    arcs = arcs_of(w)
    if any(arcs[i].length <= 0.0 for i in part.I):
        raise ValueError("degenerate arc in the shrink class")
    hmax = max_step(w, nu, part)
    if h is None:
        h = default_step(w, nu, part)
    if not (0.0 < h < hmax):
        raise ValueError(f"h must lie in (0, {hmax:.6g}), got {h}")
    return _perturb(w, nu, part, h)


def _perturb(w: tuple[float, ...], nu: tuple[float, ...], part: Partition, h: float) -> tuple[float, ...]:
    k = _drop_index(part)
    if k is None:
        return perturb_case0(w, nu, part, h)
    reduced = _perturb(w[:k] + w[k + 1:], nu[:k] + nu[k + 1:], _reduce(part, k), h)
    return reduced[:k] + (w[k],) + reduced[k:]


def default_step(w: Sequence[float], nu: Sequence[float], part: Partition) -> float:
    arcs = arcs_of(w)
    delta = min(arcs[i].length for i in part.I)
    return min(1e-3, delta / (4.0 * max(nu)), 0.5 * max_step(w, nu, part))


@dataclass
class PerturbationReport:
    containment_violations: list[str] = field(default_factory=list)
    pointwise_violations: list[str] = field(default_factory=list)
    maxima_violations: list[str] = field(default_factory=list)
    strictness_failures: list[str] = field(default_factory=list)
    samples: int = 0

    @property
    def ok(self) -> bool:
        return not (self.containment_violations or self.pointwise_violations or self.maxima_violations)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "samples": self.samples,
            "containment_violations": self.containment_violations,
            "pointwise_violations": self.pointwise_violations,
            "maxima_violations": self.maxima_violations,
            "strictness_failures": self.strictness_failures,
        }


def _arc_samples(arc: Arc, count: int, rng: np.random.Generator) -> list[float]:
    if arc.length <= 0.0:
        return [arc.start]
    u = np.concatenate(([0.0, arc.length], rng.uniform(0.0, arc.length, size=count)))
    return [arc.start if x == 0.0 else (arc.end if x == arc.length else wrap(arc.start + x)) for x in u]


def verify_perturbation(
    p: Problem,
    w: Sequence[float],
    w2: Sequence[float],
    part: Partition,
    samples: int = 50,
    seed: int = 0,
    slack: float = 1e-12,
) -> PerturbationReport:
    """Check containments, pointwise comparisons and arc-maxima inequalities.

    Strictness is checked (and failures recorded separately) only for
    strictly concave kernels: pointwise where ``J(t) > -inf`` and ``t`` is
    not a node of both systems, and for arc maxima on arcs of ``w`` whose
    maximum is finite.
    """
    rng = np.random.default_rng(seed)
    rep = PerturbationReport()
    old_arcs, new_arcs = arcs_of(w), arcs_of(w2)
    for i in part.I:
        if not arc_contains_arc(old_arcs[i], new_arcs[i]):
            rep.containment_violations.append(f"I arc {i}: {new_arcs[i]} not inside {old_arcs[i]}")
    for j in part.J:
        if not arc_contains_arc(new_arcs[j], old_arcs[j]):
            rep.containment_violations.append(f"J arc {j}: {new_arcs[j]} does not contain {old_arcs[j]}")

    strict = p.kernel.strictly_concave
    f_old = _make_f(p.kernel, p.nu, w)
    f_new = _make_f(p.kernel, p.nu, w2)
    common = [x for x in w if any(same_point(x, z) for z in w2)]

    def compare(t: float, expect_new_le: bool, label: str) -> None:
        rep.samples += 1
        if p.field.eval(t) == NEG_INF:
            return
        a, b = f_new(t), f_old(t)
        d = _ext_diff(b, a) if expect_new_le else _ext_diff(a, b)
        scale = max((abs(v) for v in (a, b) if math.isfinite(v)), default=0.0)
        if d < -slack * (1.0 + scale):
            rep.pointwise_violations.append(f"{label} t={t!r}: diff {d:.3e}")
        elif strict and not d > 0 and not any(same_point(t, x) for x in common):
            rep.strictness_failures.append(f"{label} t={t!r}: not strict")

    for i in part.I:
        for t in _arc_samples(new_arcs[i], samples, rng):
            compare(t, True, f"I arc {i}")
    for j in part.J:
        for t in _arc_samples(old_arcs[j], samples, rng):
            compare(t, False, f"J arc {j}")

    m_old = arc_maxima(p, w).values
    m_new = arc_maxima(p, w2).values
    for k in range(len(w)):
        a, b = m_new[k], m_old[k]
        shrink = k in part.I
        d = _ext_diff(b, a) if shrink else _ext_diff(a, b)
        scale = max((abs(v) for v in (a, b) if math.isfinite(v)), default=0.0)
        if d < -slack * (1.0 + scale):
            rep.maxima_violations.append(f"arc {k}: m_new={a!r} m_old={b!r}")
        elif strict and b > NEG_INF and not d > 0:
            rep.strictness_failures.append(f"arc {k} maximum not strict: {a!r} vs {b!r}")
    return rep


@dataclass
class TrialSummary:
    trials: int = 0
    violations: int = 0
    strictness_failures: int = 0
    samples: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "violations": self.violations,
            "strictness_failures": self.strictness_failures,
            "samples": self.samples,
            "ok": self.ok,
            "failures": self.failures[:20],
        }


def random_trials(problems: Sequence[Problem], trials: int, seed: int = 0, samples: int = 20) -> TrialSummary:
    """Random ``(w, partition, h)`` trials, cycling through ``problems``."""
    rng = np.random.default_rng(seed)
    out = TrialSummary()
    for k in range(trials):
        p = problems[k % len(problems)]
        n = p.n
        w = tuple(float(v) for v in np.sort(rng.uniform(size=n)))
        while True:
            mask = rng.integers(0, 2, size=n)
            if 0 < mask.sum() < n:
                break
        part = Partition.from_shrink([i for i in range(n) if mask[i]], n)
        h = default_step(w, p.nu, part) * float(rng.uniform(0.05, 1.0))
        w2 = perturb_general(w, p.nu, part, h)
        rep = verify_perturbation(p, w, w2, part, samples, int(rng.integers(2**31)))
        out.trials += 1
        out.samples += rep.samples
        bad = rep.containment_violations + rep.pointwise_violations + rep.maxima_violations
        out.violations += len(bad)
        out.strictness_failures += len(rep.strictness_failures)
        out.failures += [f"w={w} I={sorted(part.I)} h={h}: {m}" for m in bad + rep.strictness_failures]
    return out


def random_widening_trials(K: Kernel, configs: int, t_per_config: int = 1, seed: int = 0) -> TrialSummary:
    """Balanced (``mu = 1``) pair moves checked at random ``t`` in the compared regions."""
    rng = np.random.default_rng(seed)
    out = TrialSummary()
    while out.trials < configs:
        alpha, beta = np.sort(rng.uniform(size=2))
        p, q = rng.uniform(0.2, 3.0, size=2)
        a = float(rng.uniform(alpha, beta))
        b = beta - p * (a - alpha) / q
        if not (alpha < a < b < beta):
            continue
        # the balance ratio must be 1 to rounding; recompute a from b
        a = alpha + q * (beta - b) / p
        if not (alpha < a < b < beta) or abs(widen_pair(alpha, a, b, beta, p, q) - 1.0) > MU_TOL:
            continue
        outside = alpha + 1.0 - beta
        ts = []
        for _ in range(t_per_config):
            if rng.uniform() < 0.5 and b > a:
                ts.append(float(rng.uniform(a, b)))
            else:
                u = float(rng.uniform(0.0, outside))
                ts.append(u if u <= alpha else beta + (u - alpha))
        rep = check_widening(K, float(alpha), a, b, float(beta), float(p), float(q), ts)
        out.trials += 1
        out.samples += rep.checked
        out.violations += len(rep.violations)
        out.strictness_failures += 0 if rep.strict else 1
        out.failures += [f"{(alpha, a, b, beta, p, q)} t={t}: {g:.3e}" for t, g in rep.violations]
    return out
