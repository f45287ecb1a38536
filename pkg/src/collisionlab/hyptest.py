"""One-shot asymmetric hypothesis testing with the collision-entropy POVM."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import matcore
from .divergence import SpectrumProfile
from .errors import ValidationError
from .states import POVM, validate_density


@dataclass(frozen=True)
class HypothesisInstance:
    rho: np.ndarray
    sigma: np.ndarray
    M: float

    def __post_init__(self):
        object.__setattr__(self, "rho", validate_density(self.rho, "rho"))
        object.__setattr__(self, "sigma", validate_density(self.sigma, "sigma"))
        if self.rho.shape != self.sigma.shape:
            raise ValidationError("rho and sigma must have the same dimension")
        if not self.M > 0:
            raise ValidationError(f"M must be positive, got {self.M}")


def build_ht_povm(inst: HypothesisInstance) -> POVM:
    """F_rho = T rho T and F_sigma = M T sigma T with T = (rho + M sigma)^{-1/2}.

    The second element equals (rho/M + sigma)^{-1/2} sigma (rho/M + sigma)^{-1/2};
    both sum to the support projector of rho + M sigma. For M = inf the
    limiting test is returned: accept sigma exactly on supp(sigma).
    """
    if math.isinf(inst.M):
        p_sigma = matcore.support_projector(inst.sigma)
        d = p_sigma.shape[0]
        return POVM((np.eye(d) - p_sigma, p_sigma), np.eye(d, dtype=complex), ("rho", "sigma"))
    mix = inst.rho + inst.M * inst.sigma
    t = matcore.power_on_support(mix, -0.5)
    f_rho = t @ inst.rho @ t
    f_sigma = inst.M * (t @ inst.sigma @ t)
    return POVM((f_rho, f_sigma), matcore.support_projector(mix), ("rho", "sigma"))


def _expect(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.real(np.sum(a * b.T)))


def error_probabilities(inst: HypothesisInstance, povm: POVM | None = None) -> tuple[float, float]:
    """(type I, type II) = (tr rho F_sigma + mass of rho off the support, tr sigma F_rho)."""
    povm = build_ht_povm(inst) if povm is None else povm
    f_rho, f_sigma = povm.elements
    d = f_rho.shape[0]
    outside = _expect(inst.rho, np.eye(d) - povm.support)
    type1 = _expect(inst.rho, f_sigma) + outside
    type2 = _expect(inst.sigma, f_rho)
    return min(max(type1, 0.0), 1.0), min(max(type2, 0.0), 1.0)


@dataclass(frozen=True)
class OneShotTest:
    """The collision-entropy test at a given epsilon, with guaranteed and measured errors."""

    epsilon: float
    ds: float
    M: float
    typeI_bound: float
    typeII_bound: float
    typeI: float
    typeII: float
    povm: POVM

    @property
    def perfect(self) -> bool:
        return math.isinf(self.M)

    @property
    def holds(self) -> bool:
        return self.typeI <= self.typeI_bound + 1e-8 and self.typeII <= self.typeII_bound + 1e-8


def oneshot_ht_bound(
    rho, sigma, epsilon: float, grid_points=None, refine_tol=None, ds: float | None = None
) -> OneShotTest:
    """Build the test with M = 2^{D_s^eps(rho||sigma) + log eps} and measure it.

    Guarantees type I <= 2 eps and type II <= 2^{-D_s^eps - log eps}. An infinite
    D_s yields the perfect-discrimination certificate (type II bound 0).
    """
    if not 0.0 < epsilon < 1.0:
        raise ValidationError(f"epsilon must lie in (0, 1), got {epsilon}")
    rho = validate_density(rho, "rho")
    sigma = validate_density(sigma, "sigma")
    if ds is None:
        ds = SpectrumProfile([(rho, sigma)]).estimate(epsilon, grid_points, refine_tol).value
    if math.isinf(ds):
        M = math.inf
        type2_bound = 0.0
    else:
        M = 2.0 ** (ds + math.log2(epsilon))
        type2_bound = 2.0 ** (-ds - math.log2(epsilon))
    inst = HypothesisInstance(rho, sigma, M)
    povm = build_ht_povm(inst)
    t1, t2 = error_probabilities(inst, povm)
    return OneShotTest(epsilon, ds, M, 2.0 * epsilon, type2_bound, t1, t2, povm)
