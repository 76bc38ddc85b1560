"""Concave kernel functions on [-1, 1] and their eta-smoothings.

Negative infinity is the float ``-inf``; ``-inf + finite == -inf`` follows
from IEEE arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

NEG_INF = -math.inf

# central-difference step and tolerance for the sampled derivative checks
FD_STEP = 1e-6
FD_TOL = 1e-4


def _log_abs_sin(t: float) -> float:
    s = abs(math.sin(math.pi * t))
    return math.log(s) if s > 0.0 else NEG_INF


def _zero(t: float) -> float:
    return 0.0


@dataclass(frozen=True)
class Kernel:
    name: str
    func: Callable[[float], float]
    singular: bool
    strictly_concave: bool
    periodic: bool

    def __call__(self, t: float) -> float:
        return self.func(t)

    def values(self, t: np.ndarray) -> np.ndarray:
        """Vectorised evaluation (falls back to a loop for custom kernels)."""
        t = np.asarray(t, dtype=float)
        return np.array([self.func(float(v)) for v in t.ravel()]).reshape(t.shape)


class _LogSine(Kernel):
    def values(self, t: np.ndarray) -> np.ndarray:
        s = np.abs(np.sin(np.pi * np.asarray(t, dtype=float)))
        with np.errstate(divide="ignore"):
            return np.log(s)


class _Zero(Kernel):
    def values(self, t: np.ndarray) -> np.ndarray:
        return np.zeros(np.shape(t))


def log_sine() -> Kernel:
    """K(t) = log|sin(pi t)|: periodic, singular, strictly concave."""
    return _LogSine("log_sine", _log_abs_sin, singular=True, strictly_concave=True, periodic=True)


def zero_kernel() -> Kernel:
    return _Zero("zero", _zero, singular=False, strictly_concave=False, periodic=True)


class SmoothMode(str, Enum):
    UPPER = "upper"
    LOWER = "lower"


@dataclass(frozen=True)
class SmoothedKernel(Kernel):
    """``K + eta|sin pi t|`` (upper) or ``K + eta(|sin pi t| - 1)`` (lower)."""

    base: Kernel
    eta: float
    mode: SmoothMode

    def values(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        bump = np.abs(np.sin(np.pi * t))
        if self.mode is SmoothMode.LOWER:
            bump = bump - 1.0
        return self.base.values(t) + self.eta * bump


def smooth(K: Kernel, eta: float, mode: SmoothMode | str = SmoothMode.UPPER) -> SmoothedKernel:
    if not K.periodic:
        raise ValueError("smoothing is only defined for periodic kernels")
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    mode = SmoothMode(mode)
    base = K.func
    shift = -1.0 if mode is SmoothMode.LOWER else 0.0

    def func(t: float) -> float:
        return base(t) + eta * (abs(math.sin(math.pi * t)) + shift)

    # |sin pi t| is strictly concave on (0, 1), so the sum is strictly concave
    return SmoothedKernel(
        name=f"smoothed({K.name},eta={eta:g},{mode.value})",
        func=func,
        singular=K.singular,
        strictly_concave=True,
        periodic=True,
        base=K,
        eta=float(eta),
        mode=mode,
    )


def eval_translate(K: Kernel, t: float, node: float) -> float:
    """K evaluated at the signed difference ``t - node`` of two torus points."""
    if not K.periodic:
        raise ValueError(f"kernel {K.name!r} is not periodic; torus evaluation undefined")
    d = t - node
    if d == 0.0:
        return K(0.0)
    return K(d)


def _central_diff(K: Kernel, t: float, h: float = FD_STEP) -> float:
    return (K(t + h) - K(t - h)) / (2.0 * h)


def check_pm(K: Kernel, c: float, resolution: int = 10_000) -> bool:
    """Sampled test of K'(t) - K'(t-1) >= c on a grid in (0, 1)."""
    if K.periodic and c <= 0.0:
        return True
    h = FD_STEP
    for i in range(1, resolution):
        t = i / resolution
        if t - h <= 0.0 or t + h >= 1.0:
            continue
        d = _central_diff(K, t, h) - _central_diff(K, t - 1.0, h)
        if not math.isfinite(d):
            continue
        if d < c - FD_TOL:
            return False
    return True


def check_concavity(K: Kernel, samples: int = 1000, seed: int = 0, slack: float = 1e-9) -> int:
    """Count midpoint-concavity violations on random triples inside (-1,0) and (0,1)."""
    rng = np.random.default_rng(seed)
    violations = 0
    for _ in range(samples):
        side = rng.choice((-1.0, 1.0))
        lo, hi = sorted(rng.uniform(0.0, 1.0, size=2))
        if hi - lo < 1e-9:
            continue
        t = 0.5 * (lo + hi)
        h = 0.5 * (hi - lo)
        if side < 0:
            t = -t
        mid, left, right = K(t), K(t - h), K(t + h)
        if not (math.isfinite(left) and math.isfinite(right)):
            continue
        if mid < 0.5 * (left + right) - slack:
            violations += 1
    return violations
