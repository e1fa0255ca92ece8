"""Factories for common Gaussian states and random-state generators for property tests."""

from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .gaussian_core import (
    DisplacementConfig, NormalCM, QuadratureState, StandardFormParams, is_physical, phase_shift,
)


def vacuum(n: int = 1) -> NormalCM:
    return NormalCM(np.zeros(n), np.zeros(n))


def thermal(nbar) -> NormalCM:
    nbar = np.atleast_1d(np.asarray(nbar, dtype=float))
    return NormalCM(nbar, np.zeros(nbar.size))


def squeezed_vacuum(r: float, phase: float = 0.0) -> NormalCM:
    """Single-mode squeezed vacuum with sigma = diag(e^{2r}, e^{-2r})/2 rotated by ``phase``."""
    cm = NormalCM([np.sinh(r) ** 2], [np.sinh(r) * np.cosh(r)])
    return phase_shift(cm, [phase]) if phase else cm


def twin_beam(r: float, phase: float = 0.0) -> NormalCM:
    """Two-mode squeezed vacuum: B = sinh^2 r, D = sinh r cosh r e^{i phase}, C = Dbar = 0."""
    s, c = np.sinh(r), np.cosh(r)
    return NormalCM([s * s, s * s], [0.0, 0.0], {(0, 1): s * c * np.exp(1j * phase)}, {})


def product(*cms: NormalCM) -> NormalCM:
    """Tensor product of uncorrelated states."""
    B = np.concatenate([cm.B for cm in cms])
    C = np.concatenate([cm.C for cm in cms])
    D, Dbar, offset = {}, {}, 0
    for cm in cms:
        for (j, l), v in cm.D.items():
            D[(j + offset, l + offset)] = v
        for (j, l), v in cm.Dbar.items():
            Dbar[(j + offset, l + offset)] = v
        offset += cm.n_modes
    return NormalCM(B, C, D, Dbar)


def _xxpp_to_xpxp(n: int) -> np.ndarray:
    perm = np.empty(2 * n, dtype=int)
    perm[0::2] = np.arange(n)
    perm[1::2] = np.arange(n) + n
    return np.eye(2 * n)[perm]


def random_passive(n: int, rng: np.random.Generator) -> np.ndarray:
    """Orthogonal symplectic matrix (xpxp ordering) from a Haar-random unitary."""
    U = unitary_group.rvs(n, random_state=rng) if n > 1 else np.exp(2j * np.pi * rng.random()).reshape(1, 1)
    O = np.block([[U.real, -U.imag], [U.imag, U.real]])
    P = _xxpp_to_xpxp(n)
    return P @ O @ P.T


def random_symplectic(n: int, rng: np.random.Generator, max_squeeze: float = 1.0) -> np.ndarray:
    """Euler decomposition: passive . single-mode squeezers . passive."""
    r = rng.uniform(0, max_squeeze, n)
    Z = np.diag(np.ravel(np.column_stack([np.exp(-r), np.exp(r)])))
    return random_passive(n, rng) @ Z @ random_passive(n, rng)


def random_physical_state(n: int, rng: np.random.Generator, max_squeeze: float = 1.0,
                          max_thermal: float = 1.0) -> QuadratureState:
    """sigma = S diag(nu) S^T with random symplectic S and nu_k >= 1/2 (Williamson form)."""
    nu = 0.5 + rng.uniform(0, max_thermal, n)
    S = random_symplectic(n, rng, max_squeeze)
    return QuadratureState(S @ np.diag(np.repeat(nu, 2)) @ S.T)


def random_classical_state(n: int, rng: np.random.Generator, scale: float = 1.0) -> QuadratureState:
    """sigma = I/2 + G G^T: every such state has a nonnegative-definite A_N."""
    G = rng.normal(size=(2 * n, 2 * n)) * np.sqrt(scale / (2 * n))
    return QuadratureState(0.5 * np.eye(2 * n) + G @ G.T)


def random_single_mode_nonclassical(rng: np.random.Generator, margin: float = 1e-6,
                                    max_b: float = 3.0) -> NormalCM:
    """Random physical single-mode (B, C) with B - |C| < -margin.

    Physicality for one mode reads (B + 1/2)^2 - |C|^2 >= 1/4, i.e. |C| <= sqrt(B(B+1)).
    """
    while True:
        B = rng.uniform(0, max_b)
        cmax = np.sqrt(B * (B + 1))
        absC = rng.uniform(B, cmax)
        if B - absC < -margin:
            return NormalCM([B], [absC * np.exp(1j * rng.uniform(-np.pi, np.pi))])


def random_standard_form(rng: np.random.Generator, symmetric: bool = True,
                         max_q: float = 3.0) -> StandardFormParams:
    """Rejection-sample a physical two-mode standard form."""
    while True:
        q_j = 0.5 + rng.uniform(0, max_q)
        q_l = q_j if symmetric else 0.5 + rng.uniform(0, max_q)
        bound = np.sqrt(q_j * q_l)
        params = StandardFormParams(q_j, q_l, rng.uniform(-bound, bound), rng.uniform(-bound, bound))
        if is_physical(params.state())[0]:
            return params


def random_displacement(n: int, rng: np.random.Generator, max_x: float = 4.0) -> DisplacementConfig:
    return DisplacementConfig(np.sqrt(rng.uniform(0, max_x, n)), rng.uniform(0, 2 * np.pi, n))


__all__ = [
    "vacuum", "thermal", "squeezed_vacuum", "twin_beam", "product",
    "random_passive", "random_symplectic", "random_physical_state", "random_classical_state",
    "random_single_mode_nonclassical", "random_standard_form", "random_displacement",
]
