"""Entropic quantities in bits: D, D_2, V and the information-spectrum divergence.

Every function accepting a pair ``(rho, sigma)`` also has a ``*_blocks``
counterpart taking a sequence of ``(rho_x, sigma_x)`` pairs. Those describe a
block-diagonal pair ``(sum_x |x><x| (x) rho_x, sum_x |x><x| (x) sigma_x)`` and
let classical-quantum quantities be evaluated without materializing the joint
matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg
from scipy.special import gammaln

from . import matcore
from .config import get_settings
from .errors import SizeCapError, SupportError, ValidationError
from .states import validate_density, validate_distribution, validate_psd

INF = math.inf
SUPPORT_MASS_TOL = 1e-10
# ties f(R) == epsilon are resolved as feasible up to this slack
FEASIBILITY_SLACK = 1e-12

Pair = tuple[np.ndarray, np.ndarray]


def _eig_support(a: np.ndarray, tol_rank: float):
    w, v = matcore.eig_hermitian(a)
    thr = tol_rank * float(np.max(np.abs(w))) if w.size else 0.0
    keep = w > thr
    return w[keep], v[:, keep]


def _leak_mass(rho: np.ndarray, sigma_vecs: np.ndarray) -> float:
    """tr(rho (I - Pi_sigma)) for the support basis ``sigma_vecs``."""
    inside = np.trace(sigma_vecs.conj().T @ rho @ sigma_vecs).real if sigma_vecs.size else 0.0
    return float(np.trace(rho).real - inside)


def support_contained(rho, sigma, tol_rank: float | None = None) -> bool:
    """Whether supp(rho) lies in supp(sigma), judged by the rho-mass outside it."""
    tol_rank = get_settings().tol_rank if tol_rank is None else tol_rank
    rho = np.asarray(rho, dtype=complex)
    _, vs = _eig_support(np.asarray(sigma, dtype=complex), tol_rank)
    return _leak_mass(rho, vs) <= SUPPORT_MASS_TOL * max(1.0, float(np.trace(rho).real))


# --------------------------------------------------------------------------
# relative entropy and variance


def _log_stats(rho: np.ndarray, sigma: np.ndarray, tol_rank: float):
    """Return (tr rho, tr rho L, tr rho L^2) with L = log rho - log sigma, or None on support violation."""
    if not support_contained(rho, sigma, tol_rank):
        return None
    L = matcore.log2_on_support(rho, tol_rank) - matcore.log2_on_support(sigma, tol_rank)
    rl = rho @ L
    return (
        float(np.trace(rho).real),
        float(np.trace(rl).real),
        float(np.trace(rl @ L).real),
    )


def relative_entropy_blocks(pairs: Iterable[Pair]) -> float:
    tol = get_settings().tol_rank
    total = 0.0
    for rho, sigma in pairs:
        st = _log_stats(rho, sigma, tol)
        if st is None:
            return INF
        total += st[1]
    return total


def relative_entropy(rho, sigma) -> float:
    """Umegaki relative entropy tr rho (log rho - log sigma) in bits; +inf on support violation."""
    rho = validate_density(rho, "rho")
    sigma = validate_density(sigma, "sigma")
    return relative_entropy_blocks([(rho, sigma)])


def info_variance_blocks(pairs: Iterable[Pair]) -> float:
    tol = get_settings().tol_rank
    stats = []
    for rho, sigma in pairs:
        st = _log_stats(rho, sigma, tol)
        if st is None:
            raise SupportError("info_variance: supp(rho) is not contained in supp(sigma)")
        stats.append(st)
    d = sum(s[1] for s in stats)
    v = sum(s[2] - 2.0 * d * s[1] + d * d * s[0] for s in stats)
    return max(v, 0.0)


def info_variance(rho, sigma) -> float:
    """tr rho (log rho - log sigma - D)^2 in bits^2."""
    rho = validate_density(rho, "rho")
    sigma = validate_density(sigma, "sigma")
    return info_variance_blocks([(rho, sigma)])


# --------------------------------------------------------------------------
# collision divergence


def collision_exp(rho, sigma) -> float:
    """2^{D_2(rho||sigma)} = tr[(sigma^{-1/4} rho sigma^{-1/4})^2]; +inf on support violation.

    Inputs need only be positive semi-definite.
    """
    rho = validate_psd(rho, "rho")
    sigma = validate_psd(sigma, "sigma")
    tol = get_settings().tol_rank
    if not support_contained(rho, sigma, tol):
        return INF
    s = matcore.power_on_support(sigma, -0.25, tol)
    x = s @ rho @ s
    return float(np.real(np.sum(x * x.T)))


def collision_exp_blocks(pairs: Iterable[Pair]) -> float:
    return math.fsum(collision_exp(r, s) for r, s in pairs)


def _log2_or_inf(x: float) -> float:
    if x == INF:
        return INF
    if x <= 0.0:
        return -INF
    return math.log2(x)


def collision_divergence(rho, sigma) -> float:
    """Collision relative entropy D_2 in bits."""
    return _log2_or_inf(collision_exp(rho, sigma))


def collision_divergence_blocks(pairs: Iterable[Pair]) -> float:
    return _log2_or_inf(collision_exp_blocks(pairs))


# --------------------------------------------------------------------------
# information-spectrum divergence


@dataclass(frozen=True)
class SpectrumQuery:
    epsilon: float
    grid_points: int | None = None
    refine_tol: float | None = None

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValidationError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.grid_points is not None and self.grid_points < 3:
            raise ValidationError("grid_points must be >= 3")
        if self.refine_tol is not None and not self.refine_tol > 0:
            raise ValidationError("refine_tol must be positive")

    def resolved(self) -> tuple[int, float]:
        s = get_settings()
        return (
            self.grid_points if self.grid_points is not None else s.grid_points,
            self.refine_tol if self.refine_tol is not None else s.refine_tol,
        )


@dataclass(frozen=True)
class SpectrumEstimate:
    """Result of the supremum search.

    ``attained`` is False when ``value`` is a jump point of the profile, in which
    case every R < value is feasible but ``value`` itself is not.
    """

    value: float
    epsilon: float
    attained: bool
    support_contained: bool


class SpectrumProfile:
    """The map R -> tr(rho Pi_{rho <= 2^R sigma}) for a block-diagonal pair.

    ``sigma`` need not be normalized. Jump points of the map are the log2 of the
    positive generalized eigenvalues of the pencil (rho, sigma); they are
    computed exactly and added to a uniform grid of candidates.
    """

    def __init__(self, pairs: Sequence[Pair], tol_rank: float | None = None):
        self.tol_rank = get_settings().tol_rank if tol_rank is None else tol_rank
        self.pairs = []
        crossings = []
        rho_pos, sig_pos = [], []
        tail = 0.0
        contained = True
        for rho, sigma in pairs:
            rho = np.asarray(rho, dtype=complex)
            sigma = np.asarray(sigma, dtype=complex)
            wr, _ = _eig_support(rho, self.tol_rank)
            if wr.size == 0:
                continue
            ws, vs = _eig_support(sigma, self.tol_rank)
            leak = _leak_mass(rho, vs)
            tail += float(np.trace(rho).real) - leak
            if leak > SUPPORT_MASS_TOL * max(1.0, float(np.trace(rho).real)):
                contained = False
                crossings.append(self._pencil_crossings(rho, sigma))
            elif ws.size:
                r = vs.conj().T @ rho @ vs
                s = 1.0 / np.sqrt(ws)
                g = (s[:, None] * r) * s[None, :]
                gw = np.linalg.eigvalsh(0.5 * (g + g.conj().T))
                gw = gw[gw > self.tol_rank * max(float(np.max(np.abs(gw))), 1e-300)]
                crossings.append(np.log2(gw))
            rho_pos.append(wr)
            if ws.size:
                sig_pos.append(ws)
            self.pairs.append((rho, sigma))
        if not self.pairs:
            raise ValidationError("spectrum: rho is zero")
        self.support_contained = contained
        self.tail_mass = tail
        self.crossings = np.unique(np.concatenate(crossings)) if crossings else np.empty(0)
        rmin = min(float(w.min()) for w in rho_pos)
        rmax = max(float(w.max()) for w in rho_pos)
        if sig_pos:
            smin = min(float(w.min()) for w in sig_pos)
            smax = max(float(w.max()) for w in sig_pos)
            self.r_lo = math.log2(rmin) - math.log2(smax) - 1.0
            self.r_hi = math.log2(rmax) - math.log2(smin) + 1.0
        else:
            self.r_lo, self.r_hi = -1.0, 1.0
        if self.crossings.size:
            self.r_lo = min(self.r_lo, float(self.crossings[0]) - 1.0)
            self.r_hi = max(self.r_hi, float(self.crossings[-1]) + 1.0)

    def _pencil_crossings(self, rho, sigma) -> np.ndarray:
        with np.errstate(all="ignore"):
            ev = scipy.linalg.eigvals(rho, sigma)
        ev = ev[np.isfinite(ev)]
        ev = ev[(np.abs(ev.imag) <= 1e-8 * np.maximum(1.0, np.abs(ev.real))) & (ev.real > 0)]
        return np.log2(ev.real)

    def evaluate(self, rs) -> tuple[np.ndarray, np.ndarray]:
        """Return (inclusive, strict) profile values at each R in ``rs``.

        ``inclusive`` counts zero eigenvalues of 2^R sigma - rho as non-negative;
        ``strict`` drops them, which yields the left limit at a jump point.
        """
        rs = np.atleast_1d(np.asarray(rs, dtype=float))
        incl = np.zeros(rs.size)
        strict = np.zeros(rs.size)
        scale = np.exp2(rs)[:, None, None]
        for rho, sigma in self.pairs:
            u = scale * sigma[None] - rho[None]
            w, v = np.linalg.eigh(u)
            q = np.einsum("kij,kij->kj", v.conj(), rho[None] @ v).real
            tol = self.tol_rank * np.maximum(1.0, np.max(np.abs(w), axis=1))[:, None]
            incl += np.sum(q * (w >= -tol), axis=1)
            strict += np.sum(q * (w > tol), axis=1)
        return incl, strict

    def _refine(self, lo: float, hi: float, eps: float, refine_tol: float) -> float:
        while hi - lo > refine_tol:
            pts = np.linspace(lo, hi, 18)[1:-1]
            incl, _ = self.evaluate(pts)
            ok = incl <= eps + FEASIBILITY_SLACK
            bad = np.nonzero(~ok)[0]
            if bad.size == 0:
                lo = float(pts[-1])
            else:
                j = int(bad[0])
                hi = float(pts[j])
                if j > 0:
                    lo = float(pts[j - 1])
        return lo

    def estimate(
        self, epsilon: float, grid_points: int | None = None, refine_tol: float | None = None
    ) -> SpectrumEstimate:
        return self.estimate_many([epsilon], grid_points, refine_tol)[0]

    def estimate_many(
        self,
        epsilons: Sequence[float],
        grid_points: int | None = None,
        refine_tol: float | None = None,
    ) -> list[SpectrumEstimate]:
        s = get_settings()
        grid_points = s.grid_points if grid_points is None else grid_points
        refine_tol = s.refine_tol if refine_tol is None else refine_tol
        cand = np.unique(
            np.concatenate([np.linspace(self.r_lo, self.r_hi, grid_points), self.crossings])
        )
        incl, strict = self.evaluate(cand)
        return [self._sup(float(e), cand, incl, strict, refine_tol) for e in epsilons]

    def _sup(self, eps, cand, incl, strict, refine_tol) -> SpectrumEstimate:
        if not 0.0 < eps < 1.0:
            raise ValidationError(f"epsilon must lie in (0, 1), got {eps}")
        thr = eps + FEASIBILITY_SLACK
        left_ok = strict <= thr
        here_ok = incl <= thr
        # f(R) -> 0 as R -> -inf, so extend downward until some candidate is left-feasible
        step = 1.0
        while not left_ok[0]:
            lo = float(cand[0]) - step
            i_lo, s_lo = self.evaluate([lo])
            cand = np.concatenate([[lo], cand])
            incl = np.concatenate([i_lo, incl])
            strict = np.concatenate([s_lo, strict])
            left_ok = strict <= thr
            here_ok = incl <= thr
            step *= 2.0
            if step > 2.0**12:
                raise ValidationError("spectrum: no feasible R found")
        idx = int(np.nonzero(left_ok)[0][-1])
        if idx == cand.size - 1 and here_ok[idx]:
            # every candidate up to the window edge is feasible
            # beyond the window the profile tends to tr(rho Pi_supp(sigma))
            if self.tail_mass <= thr:
                return SpectrumEstimate(INF, eps, True, self.support_contained)
            hi = float(cand[-1])
            step = 1.0
            while self.evaluate([hi + step])[0][0] <= thr:
                hi += step
                step *= 2.0
                if step > 64.0:
                    return SpectrumEstimate(INF, eps, True, self.support_contained)
            r = self._refine(hi, hi + step, eps, refine_tol)
            return SpectrumEstimate(r, eps, True, self.support_contained)
        c = float(cand[idx])
        if not here_ok[idx]:
            return SpectrumEstimate(c, eps, False, self.support_contained)
        r = self._refine(c, float(cand[idx + 1]), eps, refine_tol)
        return SpectrumEstimate(r, eps, True, self.support_contained)


def info_spectrum_blocks(pairs: Sequence[Pair], q: SpectrumQuery) -> SpectrumEstimate:
    grid, tol = q.resolved()
    return SpectrumProfile(pairs).estimate(q.epsilon, grid, tol)


def info_spectrum_detail(rho, sigma, q: SpectrumQuery) -> SpectrumEstimate:
    rho = validate_density(rho, "rho")
    sigma = validate_psd(sigma, "sigma")
    return info_spectrum_blocks([(rho, sigma)], q)


def info_spectrum(rho, sigma, q: SpectrumQuery | float) -> float:
    """D_s^epsilon(rho||sigma) in bits.

    The supremum is taken over a candidate set (uniform grid plus exact jump
    points) with local bisection; the result is exact for commuting inputs and
    otherwise a lower estimate of the supremum. ``sigma`` may be unnormalized.
    """
    if not isinstance(q, SpectrumQuery):
        q = SpectrumQuery(float(q))
    return info_spectrum_detail(rho, sigma, q).value


def theorem3_rhs(lam: float, epsilon: float, ds: float) -> float:
    """(1 - eps) [lam + (1 - lam) 2^{-ds}]^{-1}, the lower bound on 2^{D_2(rho||lam rho + (1-lam) sigma)}."""
    if not 0.0 < lam < 1.0:
        raise ValidationError(f"lambda must lie in (0, 1), got {lam}")
    if not 0.0 < epsilon < 1.0:
        raise ValidationError(f"epsilon must lie in (0, 1), got {epsilon}")
    if ds == INF:
        return (1.0 - epsilon) / lam
    return (1.0 - epsilon) / (lam + (1.0 - lam) * 2.0 ** (-ds))


# --------------------------------------------------------------------------
# commuting i.i.d. case

MAX_TYPES = 5_000_000


def _compositions(n: int, k: int) -> np.ndarray:
    """All length-k non-negative integer vectors summing to n, one per row."""
    if k == 1:
        return np.array([[n]], dtype=np.int64)
    rows = []
    for first in range(n, -1, -1):
        rest = _compositions(n - first, k - 1)
        rows.append(np.column_stack([np.full(len(rest), first, dtype=np.int64), rest]))
    return np.vstack(rows)


def _n_types(n: int, k: int) -> int:
    return math.comb(n + k - 1, k - 1)


def loglikelihood_distribution(p, q, n: int, resolution: float = 2.0**-20):
    """Law of sum_i log2(p(x_i)/q(x_i)) under x ~ p^n.

    Returns sorted bucket values (rounded down to ``resolution``) and their
    probabilities. Letters sharing a log-ratio bucket are merged first, so the
    cost is the number of types over the distinct log-ratio atoms.
    """
    p = validate_distribution(p, "p")
    q = validate_distribution(q, "q", size=p.size)
    if n < 1 or n > 10**6:
        raise ValidationError(f"n must lie in [1, 1e6], got {n}")
    mask = p > 0
    if np.any(q[mask] <= 0):
        raise SupportError("supp(p) is not contained in supp(q)")
    ratio = np.log2(p[mask]) - np.log2(q[mask])
    keys = np.floor(ratio / resolution + 1e-9).astype(np.int64)
    atoms, inverse = np.unique(keys, return_inverse=True)
    probs = np.bincount(inverse, weights=p[mask])
    # keep the exact per-atom log-ratio (weighted mean within a bucket)
    values = np.bincount(inverse, weights=p[mask] * ratio) / probs
    k = atoms.size
    if _n_types(n, k) > MAX_TYPES:
        raise SizeCapError(f"{_n_types(n, k)} types exceed cap {MAX_TYPES}")
    counts = _compositions(n, k)
    logpmf = gammaln(n + 1) - gammaln(counts + 1).sum(axis=1) + counts @ np.log(probs)
    sums = counts @ values
    buckets = np.floor(sums / resolution + 1e-9).astype(np.int64)
    order = np.argsort(buckets, kind="stable")
    b_sorted = buckets[order]
    w_sorted = np.exp(logpmf[order])
    uniq, start = np.unique(b_sorted, return_index=True)
    mass = np.add.reduceat(w_sorted, start)
    return uniq * resolution, mass


def iid_spectrum_classical(p, q, n: int, epsilon: float, resolution: float = 2.0**-20) -> float:
    """D_s^epsilon(p^n || q^n) for commuting (diagonal) states, exact up to ``resolution``.

    The returned value is the jump point of the log-likelihood CDF rounded down
    to the bucket grid, hence never above the true supremum.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValidationError(f"epsilon must lie in (0, 1), got {epsilon}")
    values, mass = loglikelihood_distribution(p, q, n, resolution)
    cdf = np.cumsum(mass)
    j = int(np.searchsorted(cdf, epsilon + FEASIBILITY_SLACK, side="right"))
    j = min(j, values.size - 1)
    return float(values[j])


def commuting_spectra(rho, sigma, tol: float = 1e-10):
    """Joint eigenvalue lists (p, q) of commuting rho and sigma, or None if they do not commute."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(rho))), float(np.max(np.abs(sigma))))
    if np.max(np.abs(rho @ sigma - sigma @ rho)) > tol * scale**2:
        return None
    w, v = np.linalg.eigh(rho)
    p, q = [], []
    start = 0
    # diagonalize sigma inside each (numerically) degenerate eigenspace of rho
    while start < w.size:
        stop = start + 1
        while stop < w.size and w[stop] - w[start] <= 1e-9 * scale:
            stop += 1
        block = v[:, start:stop]
        sw = np.linalg.eigvalsh(block.conj().T @ sigma @ block)
        p.extend([float(np.mean(w[start:stop]))] * (stop - start))
        q.extend(sw.tolist())
        start = stop
    return np.clip(np.array(p), 0.0, None), np.clip(np.array(q), 0.0, None)
