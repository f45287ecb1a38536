"""Density matrices, classical-quantum states and POVMs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import matcore
from .errors import NotPSDError, ValidationError

DENSITY_TOL = 1e-9
PROB_TOL = 1e-9
POVM_ELEMENT_TOL = 1e-8
POVM_SUM_TOL = 1e-7


def validate_psd(a, name: str = "matrix", tol: float = DENSITY_TOL) -> np.ndarray:
    h = matcore.as_hermitian(a, name)
    wmin = float(matcore.eig_hermitian(h).values[0])
    if wmin < -tol:
        raise NotPSDError(f"{name}: not positive semi-definite (min eigenvalue {wmin:.3e})")
    return h


def validate_density(a, name: str = "rho", tol: float = DENSITY_TOL) -> np.ndarray:
    """Return ``a`` as a Hermitian array after checking PSD and unit trace."""
    h = validate_psd(a, name, tol)
    tr = float(np.trace(h).real)
    if abs(tr - 1.0) > tol:
        raise ValidationError(f"{name}: trace is {tr:.12g}, expected 1")
    return h


def validate_distribution(p, name: str = "p", size: int | None = None) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError(f"{name}: expected a non-empty 1-d probability vector")
    if size is not None and arr.size != size:
        raise ValidationError(f"{name}: expected {size} entries, got {arr.size}")
    if not np.all(np.isfinite(arr)) or np.any(arr < -PROB_TOL):
        raise ValidationError(f"{name}: probabilities must be finite and non-negative")
    if abs(arr.sum() - 1.0) > PROB_TOL:
        raise ValidationError(f"{name}: probabilities sum to {arr.sum():.12g}, expected 1")
    return np.clip(arr, 0.0, None)


@dataclass(frozen=True)
class CQState:
    """rho_XB = sum_x p(x) |x><x| (x) rho_x, stored blockwise."""

    probs: np.ndarray
    states: tuple[np.ndarray, ...]

    def __post_init__(self):
        states = tuple(
            validate_density(s, f"rho_{x}") for x, s in enumerate(self.states)
        )
        if not states:
            raise ValidationError("CQState: empty alphabet")
        dims = {s.shape[0] for s in states}
        if len(dims) != 1:
            raise ValidationError(f"CQState: conditional states have differing dims {sorted(dims)}")
        probs = validate_distribution(self.probs, "p_X", size=len(states))
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "probs", probs)

    @property
    def alphabet_size(self) -> int:
        return len(self.states)

    @property
    def dim_b(self) -> int:
        return self.states[0].shape[0]

    def blocks(self) -> list[np.ndarray]:
        """The diagonal blocks p(x) rho_x of rho_XB."""
        return [p * s for p, s in zip(self.probs, self.states)]


def joint_state(cq: CQState) -> np.ndarray:
    """Materialize rho_XB as a block-diagonal (|X| d_B)-dimensional matrix."""
    d = cq.dim_b
    n = cq.alphabet_size
    if n * d > matcore.MAX_DIM:
        raise ValidationError(f"joint_state: dimension {n * d} exceeds cap {matcore.MAX_DIM}")
    out = np.zeros((n * d, n * d), dtype=complex)
    for x, block in enumerate(cq.blocks()):
        out[x * d:(x + 1) * d, x * d:(x + 1) * d] = block
    return out


def marginals(cq: CQState) -> tuple[np.ndarray, np.ndarray]:
    rho_x = np.diag(cq.probs).astype(complex)
    rho_b = sum(cq.blocks())
    return rho_x, rho_b


@dataclass(frozen=True)
class POVM:
    """Measurement elements that must sum to ``support`` (a projector)."""

    elements: tuple[np.ndarray, ...]
    support: np.ndarray
    labels: tuple = field(default=())

    def __len__(self):
        return len(self.elements)


@dataclass
class PovmReport:
    passed: bool
    psd_ok: bool
    worst_min_eigenvalue: float
    completeness_ok: bool
    completeness_error: float
    support_is_projector: bool

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status}: min eigenvalue {self.worst_min_eigenvalue:.3e}, "
            f"||sum - support||_F = {self.completeness_error:.3e}"
        )


def validate_povm(
    povm: POVM, element_tol: float = POVM_ELEMENT_TOL, sum_tol: float = POVM_SUM_TOL
) -> PovmReport:
    """Check positivity of each element and completeness on the declared support."""
    support = np.asarray(povm.support, dtype=complex)
    d = support.shape[0]
    worst = np.inf
    total = np.zeros((d, d), dtype=complex)
    for e in povm.elements:
        e = np.asarray(e, dtype=complex)
        h = 0.5 * (e + e.conj().T)
        worst = min(worst, float(np.linalg.eigvalsh(h)[0]))
        total = total + e
    if not povm.elements:
        worst = 0.0
    err = float(np.linalg.norm(total - support))
    proj_ok = matcore.is_projector(support, tol=sum_tol)
    psd_ok = worst >= -element_tol
    comp_ok = err <= sum_tol
    return PovmReport(psd_ok and comp_ok and proj_ok, psd_ok, worst, comp_ok, err, proj_ok)


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Hilbert-Schmidt random density matrix of the given rank (full rank by default)."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def random_pure(dim: int, rng: np.random.Generator) -> np.ndarray:
    return random_density(dim, rng, rank=1)


def random_cq_state(
    n_symbols: int, dim: int, rng: np.random.Generator, mixed_rank: bool = True
) -> CQState:
    """Random CQState with Dirichlet input and random-rank conditionals."""
    probs = rng.dirichlet(np.ones(n_symbols))
    states = []
    for _ in range(n_symbols):
        rank = int(rng.integers(1, dim + 1)) if mixed_rank else dim
        states.append(random_density(dim, rng, rank))
    return CQState(probs, tuple(states))


def random_isometry(d_in: int, d_out: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish isometry C^{d_in} -> C^{d_out} (d_out >= d_in) via QR."""
    g = rng.normal(size=(d_out, d_in)) + 1j * rng.normal(size=(d_out, d_in))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def stack_blocks(blocks: Sequence[np.ndarray]) -> np.ndarray:
    """Block-diagonal matrix from square blocks."""
    sizes = [b.shape[0] for b in blocks]
    out = np.zeros((sum(sizes), sum(sizes)), dtype=complex)
    i = 0
    for b, s in zip(blocks, sizes):
        out[i:i + s, i:i + s] = b
        i += s
    return out
