"""Dense complex Hermitian linear algebra.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Functions validate
their inputs and never mutate them.
"""

from __future__ import annotations

from functools import reduce
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .config import get_settings
from .errors import ConvergenceError, NotPSDError, ValidationError

MAX_DIM = 4096
HERMITIAN_TOL = 1e-9


class EigenDecomposition(NamedTuple):
    """Ascending eigenvalues and the unitary whose columns are eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"{name}: expected a square matrix, got shape {m.shape}")
    if m.shape[0] == 0:
        raise ValidationError(f"{name}: empty matrix")
    if m.shape[0] > MAX_DIM:
        raise ValidationError(f"{name}: dimension {m.shape[0]} exceeds cap {MAX_DIM}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name}: non-finite entries")
    return m


def hermitian_defect(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.conj().T)))


def as_hermitian(a, name: str = "matrix") -> np.ndarray:
    """Validate the Hermitian contract and return the exactly symmetrized matrix."""
    m = as_matrix(a, name)
    scale = 1.0 + float(np.max(np.abs(m)))
    defect = hermitian_defect(m)
    if defect > HERMITIAN_TOL * scale:
        raise ValidationError(f"{name}: not Hermitian (max |A - A^H| = {defect:.3e})")
    return 0.5 * (m + m.conj().T)


def jacobi_eigh(a: np.ndarray, max_sweeps: int = 100, rel_tol: float = 1e-13) -> EigenDecomposition:
    """Cyclic Jacobi eigensolver for complex Hermitian matrices.

    Each 2x2 pivot is made real by a diagonal phase and then annihilated by a
    real plane rotation. Sweeps stop once the off-diagonal Frobenius mass drops
    below ``rel_tol * ||A||_F``.
    """
    A = np.array(a, dtype=complex)
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    fro = np.linalg.norm(A)
    if n == 1 or fro == 0.0:
        return EigenDecomposition(np.real(np.diag(A)).copy(), V)
    target = rel_tol * fro
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off < target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                mag = abs(apq)
                if mag < 1e-300:
                    continue
                phase = apq / mag
                theta = (A[q, q].real - A[p, p].real) / (2.0 * mag)
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                J = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ J
                A[idx, :] = J.conj().T @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
                V[:, idx] = V[:, idx] @ J
    else:
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off >= target:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps (off={off:.3e})")
    w = np.real(np.diag(A))
    order = np.argsort(w, kind="stable")
    return EigenDecomposition(w[order], V[:, order])


def eig_hermitian(a, method: str | None = None) -> EigenDecomposition:
    """Eigendecomposition with ascending eigenvalues.

    ``method`` is ``"lapack"`` (numpy.linalg.eigh) or ``"jacobi"``; the default
    comes from :func:`collisionlab.config.get_settings`.
    """
    h = as_hermitian(a)
    method = method or get_settings().eig_method
    if method == "jacobi":
        return jacobi_eigh(h)
    if method == "lapack":
        w, v = np.linalg.eigh(h)
        return EigenDecomposition(w, v)
    raise ValidationError(f"unknown eigensolver {method!r}")


def _rank_threshold(values: np.ndarray, tol_rank: float) -> float:
    return tol_rank * float(np.max(np.abs(values))) if values.size else 0.0


def mat_func_on_support(
    a, f: Callable[[np.ndarray], np.ndarray], tol_rank: float | None = None
) -> np.ndarray:
    """Apply ``f`` to the eigenvalues of a PSD matrix above the rank threshold.

    Eigenvalues at or below ``tol_rank * lambda_max`` map to zero, so the
    kernel of ``a`` is preserved.
    """
    tol_rank = get_settings().tol_rank if tol_rank is None else tol_rank
    w, v = eig_hermitian(a)
    thr = _rank_threshold(w, tol_rank)
    if w.size and w[0] < -thr:
        raise NotPSDError(f"matrix is not positive semi-definite (min eigenvalue {w[0]:.3e})")
    keep = w > thr
    fw = np.zeros_like(w)
    if np.any(keep):
        fw[keep] = f(w[keep])
    return (v * fw) @ v.conj().T


def power_on_support(a, exponent: float, tol_rank: float | None = None) -> np.ndarray:
    return mat_func_on_support(a, lambda x: x**exponent, tol_rank)


def log2_on_support(a, tol_rank: float | None = None) -> np.ndarray:
    return mat_func_on_support(a, np.log2, tol_rank)


def support_projector(a, tol_rank: float | None = None) -> np.ndarray:
    return mat_func_on_support(a, np.ones_like, tol_rank)


def is_psd(a, tol_rank: float | None = None) -> bool:
    tol_rank = get_settings().tol_rank if tol_rank is None else tol_rank
    w = eig_hermitian(a).values
    return bool(w[0] >= -_rank_threshold(w, tol_rank))


def proj_nonneg(u, tol_rank: float | None = None, strict: bool = False) -> np.ndarray:
    """Projector onto the eigenspaces of ``u`` with non-negative eigenvalues.

    Eigenvalues within ``tol_rank * max(1, ||u||)`` of zero count as zero and
    are included. With ``strict=True`` they are excluded instead, which gives
    the projector onto the strictly positive part.
    """
    tol_rank = get_settings().tol_rank if tol_rank is None else tol_rank
    w, v = eig_hermitian(u)
    tol = tol_rank * max(1.0, float(np.max(np.abs(w))))
    keep = w > tol if strict else w >= -tol
    vk = v[:, keep]
    return vk @ vk.conj().T


def is_projector(p, tol: float = 1e-8) -> bool:
    p = np.asarray(p, dtype=complex)
    return bool(
        np.max(np.abs(p - p.conj().T)) <= tol and np.max(np.abs(p @ p - p)) <= tol
    )


def pinch(rho, proj) -> np.ndarray:
    """Pinching ``P rho P + (I - P) rho (I - P)``."""
    r = as_hermitian(rho, "rho")
    p = as_matrix(proj, "proj")
    if p.shape != r.shape:
        raise ValidationError("pinch: projector and state dimensions differ")
    if not is_projector(p):
        raise ValidationError("pinch: proj is not an orthogonal projector")
    q = np.eye(p.shape[0]) - p
    return p @ r @ p + q @ r @ q


def tensor(*mats) -> np.ndarray:
    if not mats:
        raise ValidationError("tensor: need at least one factor")
    return reduce(np.kron, [np.asarray(m, dtype=complex) for m in mats])


def partial_trace(m, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep`` (indices into ``dims``)."""
    m = as_matrix(m)
    dims = [int(d) for d in dims]
    if any(d < 1 for d in dims) or int(np.prod(dims)) != m.shape[0]:
        raise ValidationError(f"partial_trace: dims {dims} do not match dimension {m.shape[0]}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ValidationError(f"partial_trace: keep indices {keep} out of range")
    n = len(dims)
    t = m.reshape(dims + dims)
    row = list(range(n))
    col = [i + n if i in keep else i for i in range(n)]
    out = [i for i in keep] + [i + n for i in keep]
    kept = int(np.prod([dims[k] for k in keep])) if keep else 1
    return np.einsum(t, row + col, out).reshape(kept, kept)
