"""
Verification paths that do not share code with the series-based moment engine.

* ``wick_moments_zero_mean``: Isserlis pairing enumeration over normally ordered
  complex Gaussian amplitudes.
* ``finite_difference_moments``: mixed central differences of the scalar generating
  function, evaluated in the real quadrature form at 40-digit precision.
* ``mc_intensity_moments``: Monte Carlo over the Husimi Q distribution followed by
  antinormal-to-normal reordering.
* ``simon_ppt_entangled``: partial transposition test for two modes.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from math import comb, factorial, prod

import mpmath
import numpy as np
from scipy.linalg import solve_triangular

from .errors import CapacityError, UnsupportedInputError, ValidationError
from .gaussian_core import (
    PHYSICAL_TOL, DisplacementConfig, NormalCM, QuadratureState, from_normal, is_physical,
    symplectic_eigenvalues,
)
from .moments import MomentTable, multi_indices

FD_STEP = 1e-3
FD_MAX_ORDER = 4
FD_DPS = 40
MC_CHUNK = 1 << 16
MC_MIN_SAMPLES = 10 ** 4


# --------------------------------------------------------------------------- Wick

def _pair_expectation(cm: NormalCM, u, v) -> complex:
    """E[u v] for u, v in {(mode, conj)} where conj=True stands for alpha^*."""
    (j, cj), (l, cl) = u, v
    if cj and not cl:
        return cm.B[j] if j == l else cm.dbar(j, l)
    if cl and not cj:
        return cm.B[j] if j == l else cm.dbar(l, j)
    if not cj:
        return cm.C[j] if j == l else cm.d(j, l)
    return np.conj(cm.C[j]) if j == l else np.conj(cm.d(j, l))


def _pairings_sum(cm: NormalCM, factors: tuple) -> complex:
    if not factors:
        return 1.0
    first, rest = factors[0], factors[1:]
    total = 0j
    for i, partner in enumerate(rest):
        total += _pair_expectation(cm, first, partner) * _pairings_sum(cm, rest[:i] + rest[i + 1:])
    return total


def wick_moments_zero_mean(cm: NormalCM, multi, disp: DisplacementConfig | None = None) -> float:
    """<W_1^k_1 ... W_n^k_n> of an undisplaced state by summing over all pairings."""
    if disp is not None and np.any(disp.amplitudes != 0):
        raise UnsupportedInputError("the Wick oracle handles zero-mean states only")
    multi = tuple(int(k) for k in multi)
    if len(multi) != cm.n_modes:
        raise ValidationError(f"multi-index has {len(multi)} entries for {cm.n_modes} modes")
    if any(k > 3 for k in multi):
        raise CapacityError("the Wick oracle is limited to third order per mode")
    factors = []
    for mode, k in enumerate(multi):
        factors += [(mode, True)] * k + [(mode, False)] * k
    value = _pairings_sum(cm, tuple(factors))
    return float(np.real(value))


def wick_closed_forms(cm: NormalCM, k: int = 0, l: int | None = None) -> dict:
    """Closed Wick expressions for one mode (and a cross moment when ``l`` is given)."""
    B, C2 = cm.B[k], abs(cm.C[k]) ** 2
    out = {"W": B, "W2": 2 * B * B + C2, "W3": 6 * B ** 3 + 9 * B * C2}
    if l is not None:
        out["WjWl"] = cm.B[k] * cm.B[l] + abs(cm.d(k, l)) ** 2 + abs(cm.dbar(k, l)) ** 2
    return out


# --------------------------------------------------------- finite differences

_STENCILS = {
    0: {0: 1},
    1: {-1: -0.5, 1: 0.5},
    2: {-1: 1, 0: -2, 1: 1},
    3: {-2: -0.5, -1: 1, 1: -1, 2: 0.5},
    4: {-2: 1, -1: -4, 0: 6, 1: -4, 2: 1},
}


def _quadrature_generating_function(S, mu, dps: int = FD_DPS):
    """lambda -> det(I + L S)^{-1/2} exp(-1/2 mu^T (I + L S)^{-1} L mu) at high precision.

    ``S = sigma - I/2`` is the covariance of the (formal) P distribution and
    L = diag(lambda_1, lambda_1, ...).
    """
    with mpmath.workdps(dps):
        S = mpmath.matrix(S.tolist())
        mu = mpmath.matrix(list(mu))
    dim = S.rows

    def G(lams):
        with mpmath.workdps(dps):
            L = mpmath.diag([lams[r // 2] for r in range(dim)])
            M = mpmath.eye(dim) + L * S
            y = mpmath.lu_solve(M, L * mu)
            quad = sum(mu[r] * y[r] for r in range(dim))
            return mpmath.exp(-quad / 2) / mpmath.sqrt(mpmath.det(M))

    return G


def finite_difference_moments(cm: NormalCM, disp: DisplacementConfig | None = None, cap=None,
                              step: float = FD_STEP) -> MomentTable:
    """Moments from mixed central differences of G at lambda = 0 plus one Richardson level.

    Every multi-index <= ``cap`` of total order <= 4 is returned.
    """
    n = cm.n_modes
    cap = tuple((3,) * n if cap is None else cap)
    if any(c > FD_MAX_ORDER for c in cap):
        raise CapacityError(f"finite differences are limited to order {FD_MAX_ORDER} per mode")
    if disp is None:
        disp = DisplacementConfig.none(n)
    S = from_normal(cm, check=False).sigma - 0.5 * np.eye(2 * n)
    xi = disp.fields()
    mu = np.ravel(np.column_stack([np.sqrt(2) * xi.real, np.sqrt(2) * xi.imag]))
    G = _quadrature_generating_function(S, mu)

    cache = {}

    def value(offsets, h):
        key = (offsets, h)
        if key not in cache:
            cache[key] = G([mpmath.mpf(o) * mpmath.mpf(h) for o in offsets])
        return cache[key]

    def derivative(multi, h):
        with mpmath.workdps(FD_DPS):
            total = mpmath.mpf(0)
            for combo in itertools.product(*(_STENCILS[k].items() for k in multi)):
                offsets = tuple(o for o, _ in combo)
                weight = prod(w for _, w in combo)
                total += mpmath.mpf(weight) * value(offsets, h)
            return total / mpmath.mpf(h) ** sum(multi)

    entries = {}
    for multi in multi_indices(cap):
        if sum(multi) > FD_MAX_ORDER:
            continue
        with mpmath.workdps(FD_DPS):
            coarse, fine = derivative(multi, step), derivative(multi, step / 2)
            d = (4 * fine - coarse) / 3
        entries[multi] = float((-1) ** sum(multi) * d)
    return MomentTable(cap, entries)


# --------------------------------------------------------------- Monte Carlo

@dataclass(frozen=True)
class MCEstimate:
    value: float
    std_error: float
    n_samples: int
    seed: int


@lru_cache(maxsize=None)
def _reorder_matrix(m_max: int) -> np.ndarray:
    """Lower-triangular T with <a^m a^dag^m> = sum_j T[m, j] <a^dag^j a^j>.

    T[m, j] = binom(m, m-j)^2 (m-j)!.
    """
    T = np.zeros((m_max + 1, m_max + 1))
    for m in range(m_max + 1):
        for p in range(m + 1):
            T[m, m - p] = comb(m, p) ** 2 * factorial(p)
    return T


def _antinormal_to_normal(cap) -> np.ndarray:
    """Matrix mapping antinormal monomials to normal ones (lexicographic multi-index order)."""
    inv = np.ones((1, 1))
    for c in cap:
        T = _reorder_matrix(c)
        inv = np.kron(inv, solve_triangular(T, np.eye(c + 1), lower=True))
    return inv


def _sampling_factor(cov: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        w, V = np.linalg.eigh(cov)
        return V * np.sqrt(np.clip(w, 0, None))


def _chunk_stats(seed_seq, size, factor, mean, exps, convert):
    rng = np.random.default_rng(seed_seq)
    y = mean + rng.standard_normal((size, mean.size)) @ factor.T
    w = 0.5 * (y[:, 0::2] ** 2 + y[:, 1::2] ** 2)  # |beta_k|^2
    anti = np.prod(w[:, None, :] ** exps[None, :, :], axis=2)
    vals = anti @ convert.T
    mu = vals.mean(axis=0)
    m2 = ((vals - mu) ** 2).sum(axis=0)
    return size, mu, m2


def mc_intensity_moments(state: QuadratureState, cap=None, n_samples: int = 10 ** 6, seed: int = 0,
                         workers: int | None = None, chunk: int = MC_CHUNK) -> dict:
    """Monte Carlo estimates of normally ordered intensity moments.

    Quadrature vectors are drawn from the Husimi function N(<X>, sigma + I/2); the
    antinormal moments <prod_k a_k^m a_k^dag^m> = E_Q[prod |beta_k|^{2m}] are mapped
    to normal order with the inverse of ``_reorder_matrix`` for each mode. The result
    depends only on ``seed`` and ``chunk``, not on ``workers``. The zero multi-index
    (exactly 1, no sampling error) is omitted.
    """
    ok, margin = is_physical(state)
    if not ok:
        raise ValidationError(f"Monte Carlo needs a physical state (margin {margin:.3e})")
    if n_samples < MC_MIN_SAMPLES:
        raise ValidationError(f"need at least {MC_MIN_SAMPLES} samples, got {n_samples}")
    n = state.n_modes
    cap = tuple((3,) * n if cap is None else cap)
    idx = list(multi_indices(cap))
    exps = np.array(idx, dtype=float)
    convert = _antinormal_to_normal(cap)
    factor = _sampling_factor(state.sigma + 0.5 * np.eye(2 * n))

    sizes = [chunk] * (n_samples // chunk)
    if n_samples % chunk:
        sizes.append(n_samples % chunk)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = [(c, s, factor, state.mean, exps, convert) for c, s in zip(children, sizes)]
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda a: _chunk_stats(*a), jobs))
    else:
        parts = [_chunk_stats(*a) for a in jobs]

    # pairwise mean/variance merge, in chunk order
    count, mean, m2 = parts[0]
    for nb, mb, m2b in parts[1:]:
        total = count + nb
        delta = mb - mean
        mean = mean + delta * nb / total
        m2 = m2 + m2b + delta ** 2 * count * nb / total
        count = total
    stderr = np.sqrt(m2 / (count - 1) / count)
    return {multi: MCEstimate(float(mean[i]), float(stderr[i]), count, seed)
            for i, multi in enumerate(idx) if any(multi)}


# ---------------------------------------------------------------------- PPT

def simon_ppt_entangled(state: QuadratureState, tol: float = PHYSICAL_TOL) -> tuple[bool, float]:
    """Two-mode PPT test: flip p_l and inspect the smallest symplectic eigenvalue.

    Returns ``(entangled, 1/2 - nu_min)``.
    """
    if state.n_modes != 2:
        raise ValidationError(f"the PPT test needs exactly two modes, got {state.n_modes}")
    P = np.diag([1.0, 1.0, 1.0, -1.0])
    nu = symplectic_eigenvalues(P @ state.sigma @ P)[0]
    return bool(nu < 0.5 - tol), float(0.5 - nu)
