"""Standard normal CDF/quantile and second-order expansions nD + sqrt(nV) Phi^{-1}(eps)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)

# Acklam's rational approximation, relative error ~1.15e-9 before refinement
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def phi(u: float) -> float:
    """Standard normal CDF via erfc, accurate in both tails."""
    return 0.5 * math.erfc(-u / _SQRT2)


def _acklam(p: float) -> float:
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        return (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        )
    if p > 1.0 - _P_LOW:
        return -_acklam(1.0 - p)
    q = p - 0.5
    r = q * q
    return (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / (
        ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
    )


def phi_inv(eps: float) -> float:
    """Standard normal quantile: rational initial guess plus Halley refinement."""
    if not 0.0 < eps < 1.0:
        raise ValidationError(f"phi_inv: argument must lie in (0, 1), got {eps}")
    if eps == 0.5:
        return 0.0
    # work in the lower tail so the residual is computed without cancellation
    if eps > 0.5:
        return -phi_inv(1.0 - eps)
    x = _acklam(eps)
    for _ in range(2):
        e = phi(x) - eps
        u = e * _SQRT2PI * math.exp(0.5 * x * x)
        x = x - u / (1.0 + 0.5 * x * u)
    return x


def second_order_estimate(D: float, V: float, n: int, eps: float) -> float:
    """n D + sqrt(n V) Phi^{-1}(eps), in bits."""
    if V < 0:
        raise ValidationError(f"variance must be non-negative, got {V}")
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    if V == 0.0:
        return n * D
    return n * D + math.sqrt(n * V) * phi_inv(eps)


@dataclass(frozen=True)
class SecondOrderCurve:
    ns: tuple[int, ...]
    D: float
    V: float
    epsilon: float
    estimates: tuple[float, ...]
    note: str = "epsilon held fixed; the O(1/sqrt(n)) shift of epsilon is absorbed in the O(1) term"

    def __post_init__(self):
        if self.V < 0:
            raise ValidationError("V must be non-negative")
        if not 0.0 < self.epsilon < 1.0:
            raise ValidationError("epsilon must lie in (0, 1)")


def second_order_curve(D: float, V: float, eps: float, ns: Sequence[int]) -> SecondOrderCurve:
    ns = tuple(int(n) for n in ns)
    return SecondOrderCurve(ns, D, V, eps, tuple(second_order_estimate(D, V, n, eps) for n in ns))


def phi_array(u) -> np.ndarray:
    return np.vectorize(phi, otypes=[float])(u)
