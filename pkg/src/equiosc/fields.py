"""External fields J: T -> R u {-inf} given as piecewise-linear pieces plus point overrides."""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .torus import EPS_TOR, same_point, wrap

NEG_INF = -math.inf


class PieceKind(str, Enum):
    CONSTANT = "constant"
    LINEAR = "linear"
    MINUS_INFINITY = "minus_infinity"


@dataclass(frozen=True)
class Piece:
    """J restricted to ``[start, end)``.

    Linear pieces are ``value + slope * (t - start)``; constant pieces ignore
    ``slope``.
    """

    start: float
    end: float
    kind: PieceKind
    value: float = 0.0
    slope: float = 0.0

    def at(self, t: float) -> float:
        """Piece formula at ``t`` (also valid as the one-sided limit at ``end``)."""
        if self.kind is PieceKind.MINUS_INFINITY:
            return NEG_INF
        if self.kind is PieceKind.CONSTANT:
            return self.value
        return self.value + self.slope * (t - self.start)

    @property
    def finite(self) -> bool:
        return self.kind is not PieceKind.MINUS_INFINITY

    def sup(self) -> float:
        if self.kind is PieceKind.LINEAR:
            return max(self.at(self.start), self.at(self.end))
        return self.at(self.start)


def constant(start: float, end: float, value: float) -> Piece:
    return Piece(start, end, PieceKind.CONSTANT, value=float(value))


def linear(start: float, end: float, slope: float, value_at_start: float) -> Piece:
    return Piece(start, end, PieceKind.LINEAR, value=float(value_at_start), slope=float(slope))


def minus_infinity(start: float, end: float) -> Piece:
    return Piece(start, end, PieceKind.MINUS_INFINITY)


@dataclass(frozen=True)
class PiecewiseField:
    pieces: tuple[Piece, ...]
    overrides: tuple[tuple[float, float], ...] = ()
    name: str = "custom"
    _starts: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        pieces = tuple(self.pieces)
        if not pieces:
            raise ValueError("pieces must partition [0,1): no pieces given")
        if abs(pieces[0].start) > EPS_TOR or abs(pieces[-1].end - 1.0) > EPS_TOR:
            raise ValueError("pieces must partition [0,1)")
        for p, q in zip(pieces, pieces[1:]):
            if abs(p.end - q.start) > EPS_TOR:
                raise ValueError(f"pieces must partition [0,1): gap or overlap at {p.end} / {q.start}")
        for p in pieces:
            if not p.end > p.start:
                raise ValueError(f"pieces must partition [0,1): empty piece [{p.start}, {p.end})")
            if p.finite and not (math.isfinite(p.value) and math.isfinite(p.slope)):
                raise ValueError("finite pieces need finite parameters")
        overrides = tuple((wrap(float(t)), float(v)) for t, v in self.overrides)
        for _, v in overrides:
            if math.isnan(v) or v == math.inf:
                raise ValueError("override values must be < +inf")
        object.__setattr__(self, "pieces", pieces)
        object.__setattr__(self, "overrides", overrides)
        object.__setattr__(self, "_starts", tuple(p.start for p in pieces))

    def piece_index(self, t: float) -> int:
        return max(0, bisect.bisect_right(self._starts, t) - 1)

    def override_at(self, t: float) -> float | None:
        for p, v in self.overrides:
            if same_point(p, t):
                return v
        return None

    def __call__(self, t: float) -> float:
        return self.eval(t)

    def eval(self, t: float) -> float:
        t = wrap(t)
        v = self.override_at(t)
        if v is not None:
            return v
        return self.pieces[self.piece_index(t)].at(t)

    def values(self, t: np.ndarray) -> np.ndarray:
        return np.array([self.eval(float(v)) for v in np.ravel(t)]).reshape(np.shape(t))

    def sup(self) -> float:
        cands = [p.sup() for p in self.pieces] + [v for _, v in self.overrides]
        return max(cands)

    def singular_pieces(self) -> list[tuple[float, float]]:
        return [(p.start, p.end) for p in self.pieces if not p.finite]


def validate_n_field(J: PiecewiseField, n: int) -> bool:
    """True iff J is finite at more than ``n`` points of T."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if any(p.finite for p in J.pieces):
        return True
    finite_points = {round(t, 12) for t, v in J.overrides if v > NEG_INF}
    return len(finite_points) > n


def zero_field() -> PiecewiseField:
    return PiecewiseField((constant(0.0, 1.0, 0.0),), name="zero")


def example71_field() -> PiecewiseField:
    """0 on {0} u [1/2, 1), -inf on (0, 1/2)."""
    return PiecewiseField(
        (minus_infinity(0.0, 0.5), constant(0.5, 1.0, 0.0)),
        overrides=((0.0, 0.0),),
        name="example71",
    )


def tilde_field(alpha: float) -> PiecewiseField:
    """Continuous tent-shaped dip: -alpha t on [0,1/4), alpha(t-1/2) on [1/4,1/2), 0 on [1/2,1)."""
    if not alpha > 4.0 * math.pi:
        raise ValueError(f"alpha must exceed 4*pi, got {alpha}")
    return PiecewiseField(
        (
            linear(0.0, 0.25, -alpha, 0.0),
            linear(0.25, 0.5, alpha, -alpha / 4.0),
            constant(0.5, 1.0, 0.0),
        ),
        name=f"tilde({alpha!r})",
    )


def harmonic_step_field(lmax: int = 100) -> PiecewiseField:
    """Zero field with J(1/l) = 1 - 1/l for l = 2..lmax (J(0) = 0 covers l = 1)."""
    if lmax < 2:
        raise ValueError("lmax must be >= 2")
    return PiecewiseField(
        (constant(0.0, 1.0, 0.0),),
        overrides=tuple((1.0 / l, 1.0 - 1.0 / l) for l in range(2, lmax + 1)),
        name=f"harmonic({lmax})",
    )


def field_from_pieces(pieces: Sequence[Piece], overrides: Sequence[tuple[float, float]] = ()) -> PiecewiseField:
    return PiecewiseField(tuple(pieces), tuple(overrides))
