"""Classical data compression with quantum side information (c-q Slepian-Wolf).

Alice hashes x to m = h(x); Bob measures his state rho_x with a bin-dependent
pretty good measurement to recover x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import matcore
from .divergence import SpectrumProfile, collision_exp_blocks
from .errors import ValidationError
from .experiment import (
    ExperimentResult,
    Timer,
    check_exact_cap,
    mean_and_stderr,
    mixed_radix,
    parallel_map,
    sample_stream,
)
from .states import POVM, CQState


@dataclass(frozen=True)
class HashAssignment:
    """h: X -> {0, ..., M-1}, stored as the tuple (h(0), ..., h(|X|-1))."""

    bins: tuple[int, ...]
    M: int

    def __post_init__(self):
        object.__setattr__(self, "bins", tuple(int(b) for b in self.bins))
        if self.M < 1:
            raise ValidationError("M must be >= 1")
        if any(b < 0 or b >= self.M for b in self.bins):
            raise ValidationError("hash value outside {0, ..., M-1}")

    def members(self, m: int) -> list[int]:
        return [x for x, b in enumerate(self.bins) if b == m]


@dataclass(frozen=True)
class SWExperiment:
    source: CQState
    M: int
    mode: str = "exact"
    samples: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.M < 1:
            raise ValidationError("M must be >= 1")
        if self.mode not in ("exact", "mc"):
            raise ValidationError(f"mode must be 'exact' or 'mc', got {self.mode!r}")
        if self.mode == "exact":
            check_exact_cap(self.M**self.source.alphabet_size, "hash functions")
        if self.samples < 1:
            raise ValidationError("samples must be >= 1")


def bob_povm(source: CQState, h: HashAssignment, m: int) -> POVM:
    """F_x^m = p(x) S_m^{-1/2} rho_x S_m^{-1/2} for x in bin m, S_m = sum_{h(x')=m} p(x') rho_x'."""
    if len(h.bins) != source.alphabet_size:
        raise ValidationError("hash assignment does not cover the source alphabet")
    members = h.members(m)
    d = source.dim_b
    blocks = [source.probs[x] * source.states[x] for x in members]
    if not members or all(np.trace(b).real == 0.0 for b in blocks):
        return POVM((), np.zeros((d, d), dtype=complex), ())
    total = sum(blocks)
    t = matcore.power_on_support(total, -0.5)
    return POVM(tuple(t @ b @ t for b in blocks), matcore.support_projector(total), tuple(members))


def sw_success_probability(source: CQState, h: HashAssignment | Sequence[int], M: int | None = None) -> float:
    """sum_x p(x) tr(rho_x F_x^{h(x)})."""
    if not isinstance(h, HashAssignment):
        h = HashAssignment(tuple(h), M if M is not None else max(h) + 1)
    total = []
    for m in sorted(set(h.bins)):
        povm = bob_povm(source, h, m)
        for x, f in zip(povm.labels, povm.elements):
            total.append(source.probs[x] * float(np.real(np.sum(source.states[x] * f.T))))
    return min(max(math.fsum(total), 0.0), 1.0)


def _partition_key(bins: Sequence[int]) -> tuple[int, ...]:
    """Relabel bins by first appearance; success depends only on this partition."""
    seen: dict[int, int] = {}
    return tuple(seen.setdefault(b, len(seen)) for b in bins)


def sw_expected_success_exact(exp: SWExperiment, threads: int = 1) -> float:
    """Average success over all M^|X| hash functions, visited in mixed-radix order."""
    k, M = exp.source.alphabet_size, exp.M
    total = M**k
    check_exact_cap(total, "hash functions")
    hashes = [mixed_radix(i, M, k) for i in range(total)]
    keys = sorted({_partition_key(h) for h in hashes})
    values = parallel_map(
        lambda i: sw_success_probability(exp.source, HashAssignment(keys[i], k)), len(keys), threads
    )
    lookup = dict(zip(keys, values))
    return math.fsum(lookup[_partition_key(h)] for h in hashes) / total


def sample_hash(k: int, M: int, seed: int, index: int) -> tuple[int, ...]:
    return tuple(int(b) for b in sample_stream(seed, index).integers(0, M, size=k))


def sw_expected_success_mc(exp: SWExperiment, threads: int = 1) -> tuple[float, float]:
    k, M = exp.source.alphabet_size, exp.M
    values = parallel_map(
        lambda i: sw_success_probability(
            exp.source, HashAssignment(sample_hash(k, M, exp.seed, i), M)
        ),
        exp.samples,
        threads,
    )
    return mean_and_stderr(values)


def conditional_spectrum(source: CQState, epsilon: float, grid_points=None, refine_tol=None) -> float:
    """D_s^eps(rho_XB || I_X (x) rho_B); the second argument has trace |X|."""
    rho_b = sum(source.blocks())
    pairs = [(p * s, rho_b) for p, s in zip(source.probs, source.states) if p > 0]
    return SpectrumProfile(pairs).estimate(epsilon, grid_points, refine_tol).value


@dataclass(frozen=True)
class Theorem6Bound:
    tight: float
    M: int
    source: CQState

    def relaxed(self, epsilon: float, ds: float | None = None) -> float:
        """(1 - eps) / (1 + M^{-1} 2^{-D_s^eps(rho_XB || I_X (x) rho_B)})."""
        if not 0.0 < epsilon < 1.0:
            raise ValidationError(f"epsilon must lie in (0, 1), got {epsilon}")
        ds = conditional_spectrum(self.source, epsilon) if ds is None else ds
        tail = 0.0 if math.isinf(ds) else 2.0 ** (-ds) / self.M
        return (1.0 - epsilon) / (1.0 + tail)


def theorem6_bound(source: CQState, M: int) -> Theorem6Bound:
    """tight = 2^{D_2(rho_XB || (1 - 1/M) rho_XB + (1/M) I_X (x) rho_B)}."""
    if M < 1:
        raise ValidationError("M must be >= 1")
    rho_b = sum(source.blocks())
    pairs = [
        (p * s, (1.0 - 1.0 / M) * p * s + rho_b / M)
        for p, s in zip(source.probs, source.states)
        if p > 0
    ]
    return Theorem6Bound(collision_exp_blocks(pairs), M, source)


def corollary2_M(source: CQState, epsilon: float, delta: float, grid_points=None, refine_tol=None) -> int:
    """ceil(2^{-D_s^delta(rho_XB || I_X (x) rho_B) - log(eps - delta)}), at least 1."""
    if not 0.0 < delta < epsilon < 1.0:
        raise ValidationError(f"need 0 < delta < epsilon < 1, got delta={delta}, epsilon={epsilon}")
    ds = conditional_spectrum(source, delta, grid_points, refine_tol)
    if math.isinf(ds):
        return 1
    x = 2.0 ** (-ds) / (epsilon - delta)
    # guard the ceiling against round-off just above an integer
    return max(1, math.ceil(x * (1.0 - 1e-12)))


def run_experiment(exp: SWExperiment, epsilon: float | None = None, delta: float | None = None,
                   threads: int = 1) -> ExperimentResult:
    timer = Timer()
    with timer("bound"):
        bound = theorem6_bound(exp.source, exp.M)
    with timer("success"):
        if exp.mode == "exact":
            value, stderr = sw_expected_success_exact(exp, threads), 0.0
        else:
            value, stderr = sw_expected_success_mc(exp, threads)
    extras = {}
    if epsilon is not None:
        with timer("relaxed"):
            extras["relaxed"] = bound.relaxed(epsilon)
    if epsilon is not None and delta is not None:
        with timer("size"):
            extras["corollary2_M"] = corollary2_M(exp.source, epsilon, delta)
    return ExperimentResult(
        bound=bound.tight,
        value=value,
        mode=exp.mode,
        stderr=stderr,
        samples=exp.samples if exp.mode == "mc" else 0,
        seed=exp.seed,
        extras=extras,
        timings=timer.marks,
    )
