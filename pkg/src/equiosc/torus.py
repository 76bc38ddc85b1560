"""Arithmetic on the circle T = R/Z (period 1).

Torus points are plain floats in ``[0, 1)``.  Arcs run counterclockwise
from ``start`` to ``end``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

# Degeneracy tolerance for comparisons of torus points.
EPS_TOR = 1e-12

TorusPoint = float


def wrap(r: float) -> TorusPoint:
    """Reduce ``r`` mod 1 into ``[0, 1)``."""
    if not math.isfinite(r):
        raise ValueError(f"cannot wrap non-finite value {r!r}")
    v = r % 1.0
    # r % 1.0 returns 1.0 for tiny negative r
    return 0.0 if v >= 1.0 else v


def dist(a: TorusPoint, b: TorusPoint) -> float:
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d)


def same_point(a: TorusPoint, b: TorusPoint, eps: float = EPS_TOR) -> bool:
    return dist(a, b) <= eps


def cut_lift(c: TorusPoint, y: TorusPoint) -> float:
    """The unique ``x`` in ``[0, 1)`` with ``wrap(x + c) == y``."""
    return wrap(y - c)


def cut_project(c: TorusPoint, x: float) -> TorusPoint:
    return wrap(x + c)


class CyclicOrder(NamedTuple):
    ordered: bool
    strict: bool


def cyclic_order(nodes: Sequence[float], eps: float = EPS_TOR) -> CyclicOrder:
    """Check whether ``nodes`` are listed in (weak / strict) counterclockwise order.

    A listing is cyclically ordered iff its circular sequence of values has at
    most one descent; equal neighbours (within ``eps``) count as neither.
    """
    n = len(nodes)
    if n == 0:
        raise ValueError("need at least one node")
    if n == 1:
        return CyclicOrder(True, True)
    descents = 0
    ties = 0
    for j in range(n):
        a, b = nodes[j], nodes[(j + 1) % n]
        if same_point(a, b, eps):
            ties += 1
        elif b < a:
            descents += 1
    if descents > 1:
        return CyclicOrder(False, False)
    return CyclicOrder(True, ties == 0)


@dataclass(frozen=True)
class Arc:
    """Closed arc ``{t : start <= t <= end}`` traversed counterclockwise."""

    start: TorusPoint
    end: TorusPoint
    length: float

    def contains(self, t: TorusPoint, eps: float = EPS_TOR) -> bool:
        if self.length >= 1.0:
            return True
        off = cut_lift(self.start, t)
        if off > 1.0 - eps:  # t just before start
            return True
        return off <= self.length + eps

    def offset(self, t: TorusPoint) -> float:
        """Lifted position of ``t`` measured from ``start`` in ``[0, 1)``."""
        return cut_lift(self.start, t)

    def __contains__(self, t: TorusPoint) -> bool:
        return self.contains(t)


def arcs_of(nodes: Sequence[float]) -> list[Arc]:
    """The ``n`` closed arcs ``[y_j, y_{j+1}]`` (indices mod n).

    Coinciding consecutive nodes give a degenerate arc of length 0.  When all
    nodes coincide (or n == 1) the last arc is the full circle.
    """
    if not cyclic_order(nodes).ordered:
        raise ValueError(f"nodes {tuple(nodes)} are not in cyclic order")
    n = len(nodes)
    lengths = []
    for j in range(n):
        a, b = nodes[j], nodes[(j + 1) % n]
        lengths.append(0.0 if same_point(a, b) else cut_lift(a, b))
    if sum(lengths) == 0.0:
        lengths[-1] = 1.0
    return [Arc(nodes[j], nodes[(j + 1) % n], lengths[j]) for j in range(n)]


def arc_contains_arc(outer: Arc, inner: Arc, eps: float = EPS_TOR) -> bool:
    """Whether ``inner`` is a subset of ``outer`` (endpoint comparison)."""
    if outer.length >= 1.0 - eps:
        return True
    if inner.length > outer.length + eps:
        return False
    off = outer.offset(inner.start)
    if off > 1.0 - eps:
        off -= 1.0
    return off >= -eps and off + inner.length <= outer.length + eps
