"""Classical-quantum channel coding with random codebooks and PGM decoding."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import matcore
from .asympt import second_order_estimate
from .divergence import (
    SpectrumProfile,
    collision_exp,
    collision_exp_blocks,
    info_variance_blocks,
    relative_entropy_blocks,
)
from .errors import ValidationError
from .experiment import (
    ExperimentResult,
    Timer,
    check_exact_cap,
    inverse_cdf,
    mean_and_stderr,
    parallel_map,
    sample_stream,
)
from .states import POVM, CQState, validate_density, validate_distribution


@dataclass(frozen=True)
class CQChannel:
    """x -> rho_x for x in range(len(states))."""

    states: tuple[np.ndarray, ...]

    def __post_init__(self):
        states = tuple(validate_density(s, f"rho_{x}") for x, s in enumerate(self.states))
        if not states:
            raise ValidationError("CQChannel: empty input alphabet")
        if len({s.shape[0] for s in states}) != 1:
            raise ValidationError("CQChannel: output states have differing dimensions")
        object.__setattr__(self, "states", states)

    @property
    def alphabet_size(self) -> int:
        return len(self.states)

    @property
    def dim_b(self) -> int:
        return self.states[0].shape[0]

    def source(self, probs) -> CQState:
        return CQState(np.asarray(probs, dtype=float), self.states)


@dataclass(frozen=True)
class Codebook:
    codewords: tuple[int, ...]

    def __post_init__(self):
        if len(self.codewords) < 1:
            raise ValidationError("Codebook: need at least one codeword")
        object.__setattr__(self, "codewords", tuple(int(c) for c in self.codewords))

    @property
    def M(self) -> int:
        return len(self.codewords)

    def check(self, channel: CQChannel) -> None:
        if any(c < 0 or c >= channel.alphabet_size for c in self.codewords):
            raise ValidationError("Codebook: codeword outside the input alphabet")


@dataclass(frozen=True)
class CodingExperiment:
    channel: CQChannel
    probs: np.ndarray
    M: int
    mode: str = "exact"
    samples: int = 1000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(
            self, "probs", validate_distribution(self.probs, "p_X", self.channel.alphabet_size)
        )
        if self.M < 1:
            raise ValidationError("M must be >= 1")
        if self.mode not in ("exact", "mc"):
            raise ValidationError(f"mode must be 'exact' or 'mc', got {self.mode!r}")
        if self.mode == "exact":
            check_exact_cap(self.channel.alphabet_size**self.M, "codebooks")
        if self.samples < 1:
            raise ValidationError("samples must be >= 1")


def pgm(states: Sequence[np.ndarray]) -> POVM:
    """Pretty good measurement E_m = S^{-1/2} rho_m S^{-1/2}, S = sum of the signals."""
    states = [np.asarray(s, dtype=complex) for s in states]
    if not states:
        raise ValidationError("pgm: no signal states")
    total = sum(states)
    if abs(np.trace(total)) == 0.0:
        raise ValidationError("pgm: all signal states are zero")
    inv_sqrt = matcore.power_on_support(total, -0.5)
    elements = tuple(inv_sqrt @ s @ inv_sqrt for s in states)
    return POVM(elements, matcore.support_projector(total))


def success_probability(channel: CQChannel, codebook: Codebook | Sequence[int]) -> float:
    """(1/M) sum_m tr(E_m rho_{x_m}) for the PGM of the codebook's signal states."""
    if not isinstance(codebook, Codebook):
        codebook = Codebook(tuple(codebook))
    codebook.check(channel)
    signals = [channel.states[x] for x in codebook.codewords]
    povm = pgm(signals)
    total = math.fsum(float(np.real(np.sum(e * s.T))) for e, s in zip(povm.elements, signals))
    return min(max(total / codebook.M, 0.0), 1.0)


def success_via_collision(channel: CQChannel, codebook: Codebook | Sequence[int]) -> float:
    """(1/M) 2^{D_2(sigma_UXB || sigma_UX (x) sigma_B)} with the joint matrices built explicitly."""
    if not isinstance(codebook, Codebook):
        codebook = Codebook(tuple(codebook))
    codebook.check(channel)
    M, k, d = codebook.M, channel.alphabet_size, channel.dim_b
    dim = M * k * d
    if dim > matcore.MAX_DIM:
        raise ValidationError(f"success_via_collision: dimension {dim} exceeds cap")
    sigma_uxb = np.zeros((dim, dim), dtype=complex)
    sigma_ux = np.zeros((M * k, M * k), dtype=complex)
    for m, x in enumerate(codebook.codewords):
        ux = np.zeros((M * k, M * k))
        ux[m * k + x, m * k + x] = 1.0 / M
        sigma_uxb += np.kron(ux, channel.states[x])
        sigma_ux += ux
    sigma_b = matcore.partial_trace(sigma_uxb, [M * k, d], keep=[1])
    return collision_exp(sigma_uxb, np.kron(sigma_ux, sigma_b)) / M


def expected_success_exact(exp: CodingExperiment, threads: int = 1) -> float:
    """Average PGM success over all |X|^M codebooks, weighted by prod_m p(x_m).

    Codebooks are visited in lexicographic order; the PGM success depends only on
    the multiset of codewords, so each multiset is evaluated once.
    """
    k, M = exp.channel.alphabet_size, exp.M
    check_exact_cap(k**M, "codebooks")
    support = np.nonzero(exp.probs > 0)[0]
    books = list(itertools.product(support.tolist(), repeat=M))
    keys = sorted({tuple(sorted(b)) for b in books})
    values = parallel_map(lambda i: success_probability(exp.channel, keys[i]), len(keys), threads)
    lookup = dict(zip(keys, values))
    return math.fsum(
        math.prod(exp.probs[x] for x in b) * lookup[tuple(sorted(b))] for b in books
    )


def sample_codebook(probs: np.ndarray, M: int, seed: int, index: int) -> tuple[int, ...]:
    """Codebook number ``index`` of the seeded stream; message m uses the m-th uniform."""
    u = sample_stream(seed, index).random(M)
    return tuple(int(x) for x in inverse_cdf(probs, u))


def expected_success_mc(exp: CodingExperiment, threads: int = 1) -> tuple[float, float]:
    """Sample mean and standard error of PGM success over i.i.d. random codebooks."""
    values = parallel_map(
        lambda i: success_probability(
            exp.channel, sample_codebook(exp.probs, exp.M, exp.seed, i)
        ),
        exp.samples,
        threads,
    )
    return mean_and_stderr(values)


def _cq_blocks(channel: CQChannel, probs) -> tuple[list, np.ndarray]:
    probs = validate_distribution(probs, "p_X", channel.alphabet_size)
    rho_b = sum(p * s for p, s in zip(probs, channel.states))
    return [(p, s) for p, s in zip(probs, channel.states) if p > 0], rho_b


def theorem4_bound(channel: CQChannel, probs, M: int) -> float:
    """M^{-1} 2^{D_2(rho_XB || rho_XB / M + (1 - 1/M) rho_X (x) rho_B)}."""
    if M < 1:
        raise ValidationError("M must be >= 1")
    blocks, rho_b = _cq_blocks(channel, probs)
    pairs = [(p * s, p * (s / M + (1.0 - 1.0 / M) * rho_b)) for p, s in blocks]
    return collision_exp_blocks(pairs) / M


def mutual_spectrum(
    channel: CQChannel, probs, delta: float, grid_points=None, refine_tol=None
) -> float:
    """D_s^delta(rho_XB || rho_X (x) rho_B)."""
    blocks, rho_b = _cq_blocks(channel, probs)
    profile = SpectrumProfile([(p * s, p * rho_b) for p, s in blocks])
    return profile.estimate(delta, grid_points, refine_tol).value


def corollary1_M(
    channel: CQChannel, probs, epsilon: float, delta: float, grid_points=None, refine_tol=None
) -> int:
    """Message count floor((eps - delta)/(1 - eps) 2^{D_s^delta} + 1) guaranteeing error <= eps."""
    if not 0.0 < delta < epsilon < 1.0:
        raise ValidationError(f"need 0 < delta < epsilon < 1, got delta={delta}, epsilon={epsilon}")
    ds = mutual_spectrum(channel, probs, delta, grid_points, refine_tol)
    if math.isinf(ds):
        raise ValidationError("corollary1_M: spectrum divergence is infinite, M is unbounded")
    return int(math.floor((epsilon - delta) / (1.0 - epsilon) * 2.0**ds + 1.0))


def holevo_information(channel: CQChannel, probs) -> float:
    """I(X;B) = D(rho_XB || rho_X (x) rho_B) in bits."""
    blocks, rho_b = _cq_blocks(channel, probs)
    return relative_entropy_blocks([(p * s, p * rho_b) for p, s in blocks])


def mutual_information_variance(channel: CQChannel, probs) -> float:
    blocks, rho_b = _cq_blocks(channel, probs)
    return info_variance_blocks([(p * s, p * rho_b) for p, s in blocks])


# --------------------------------------------------------------------------
# capacity and dispersion


def _entropy_bits(w: np.ndarray) -> np.ndarray:
    w = np.clip(w, 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(w > 1e-300, -w * np.log2(w), 0.0)
    return t.sum(axis=-1)


def simplex_grid(k: int, steps: int) -> np.ndarray:
    """All points of the probability simplex with coordinates in (1/steps) Z."""
    pts = [c for c in itertools.product(range(steps + 1), repeat=k - 1) if sum(c) <= steps]
    arr = np.array([list(c) + [steps - sum(c)] for c in pts], dtype=float)
    return arr / steps


def _holevo_batch(states: np.ndarray, entropies: np.ndarray, grid: np.ndarray) -> np.ndarray:
    out = np.empty(len(grid))
    for start in range(0, len(grid), 20000):
        g = grid[start:start + 20000]
        rho_b = np.einsum("gx,xij->gij", g, states)
        out[start:start + 20000] = _entropy_bits(np.linalg.eigvalsh(rho_b)) - g @ entropies
    return out


def blahut_arimoto(channel: CQChannel, max_iter: int = 20000, tol: float = 1e-11) -> np.ndarray:
    """Capacity-achieving input by the c-q Blahut-Arimoto iteration from the uniform input."""
    k = channel.alphabet_size
    states = np.array(channel.states)
    ent = _entropy_bits(np.linalg.eigvalsh(states))
    p = np.full(k, 1.0 / k)
    for _ in range(max_iter):
        rho_b = np.einsum("x,xij->ij", p, states)
        log_b = matcore.log2_on_support(rho_b)
        # D(rho_x || rho_B) = -S(rho_x) - tr rho_x log rho_B
        div = -ent - np.einsum("xij,ji->x", states, log_b).real
        info = float(p @ div)
        if float(np.max(div[p > 0])) - info < tol:
            break
        w = p * np.exp2(div - div.max())
        p = w / w.sum()
    return p


@dataclass(frozen=True)
class CapacityResult:
    capacity: float
    dispersion: float
    maximizers: np.ndarray
    tol_cap: float
    grid_steps: int


def capacity_and_dispersion(
    channel: CQChannel, grid_resolution: float = 1.0 / 200, tol_cap: float = 1e-6
) -> CapacityResult:
    """Holevo capacity over a simplex grid refined by Blahut-Arimoto, and the dispersion.

    The dispersion is the minimum information variance over the inputs whose
    Holevo information lies within ``tol_cap`` of the capacity.
    """
    k = channel.alphabet_size
    if k > 4:
        raise ValidationError(f"capacity grid search supports |X| <= 4, got {k}")
    steps = int(round(1.0 / grid_resolution))
    if steps < 1:
        raise ValidationError("grid_resolution must be <= 1")
    states = np.array(channel.states)
    ent = _entropy_bits(np.linalg.eigvalsh(states))
    grid = simplex_grid(k, steps)
    info = _holevo_batch(states, ent, grid)
    p_ba = blahut_arimoto(channel)
    info_ba = holevo_information(channel, p_ba)
    capacity = max(float(info.max()), info_ba)
    cands = [grid[i] for i in np.nonzero(info >= capacity - tol_cap)[0]]
    if info_ba >= capacity - tol_cap:
        cands.append(p_ba)
    maximizers = np.array(cands)
    dispersion = min(mutual_information_variance(channel, p) for p in maximizers)
    return CapacityResult(capacity, dispersion, maximizers, tol_cap, steps)


def second_order_achievable_rate(
    channel: CQChannel, n: int, epsilon: float, grid_resolution: float = 1.0 / 200
) -> float:
    """n C + sqrt(n V) Phi^{-1}(eps), in bits."""
    if not 0.0 < epsilon < 0.5:
        raise ValidationError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    res = capacity_and_dispersion(channel, grid_resolution)
    return second_order_estimate(res.capacity, res.dispersion, n, epsilon)


def run_experiment(
    exp: CodingExperiment, epsilon: float | None = None, delta: float | None = None, threads: int = 1
) -> ExperimentResult:
    timer = Timer()
    with timer("bound"):
        bound = theorem4_bound(exp.channel, exp.probs, exp.M)
    with timer("success"):
        if exp.mode == "exact":
            value, stderr = expected_success_exact(exp, threads), 0.0
        else:
            value, stderr = expected_success_mc(exp, threads)
    extras = {}
    if epsilon is not None and delta is not None:
        with timer("message_count"):
            extras["corollary1_M"] = corollary1_M(exp.channel, exp.probs, epsilon, delta)
    return ExperimentResult(
        bound=bound,
        value=value,
        mode=exp.mode,
        stderr=stderr,
        samples=exp.samples if exp.mode == "mc" else 0,
        seed=exp.seed,
        extras=extras,
        timings=timer.marks,
    )
