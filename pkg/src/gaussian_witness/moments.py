"""
Integrated intensity moments <W_1^k_1 ... W_n^k_n> of Gaussian states.

The normal generating function

    G(lambda) = <: exp(-sum_k lambda_k W_k) :>
              = det(I + Lambda A_N)^{-1/2} exp(-1/2 Xi^dag (I + Lambda A_N)^{-1} Lambda Xi),

with Lambda = diag(lambda_1, lambda_1, ..., lambda_n, lambda_n), is regular at
lambda = 0. Moments are read off its Taylor coefficients:

    <W^k> = (-1)^{|k|} (prod_j k_j!) [lambda^k] G.

The log-determinant and the resolvent are expanded as
log det(I + Lambda A) = sum_m (-1)^{m+1} tr[(Lambda A)^m] / m and
(I + Lambda A)^{-1} Lambda = sum_m (-Lambda A)^m Lambda, both exact after truncation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import factorial, prod
from typing import Iterator

import numpy as np
from numpy.polynomial import Polynomial

from .errors import ConsistencyError
from .gaussian_core import DisplacementConfig, NormalCM
from .series import TruncatedSeries, check_cap

DEFAULT_ORDER = 3
IMAG_TOL = 1e-12


def multi_indices(cap) -> Iterator[tuple[int, ...]]:
    """All multi-indices componentwise <= cap, in lexicographic order."""
    return itertools.product(*(range(c + 1) for c in cap))


def format_index(multi) -> str:
    return ",".join(str(k) for k in multi)


def parse_index(text: str) -> tuple[int, ...]:
    return tuple(int(k) for k in text.split(","))


@dataclass(frozen=True)
class MomentTable:
    """Real moments keyed by multi-index."""

    cap: tuple[int, ...]
    entries: dict

    def __getitem__(self, multi) -> float:
        return self.entries[tuple(multi)]

    def to_json(self) -> dict:
        return {format_index(k): v for k, v in self.entries.items()}

    @classmethod
    def from_json(cls, data: dict) -> "MomentTable":
        entries = {parse_index(k): float(v) for k, v in data.items()}
        cap = tuple(max(k[i] for k in entries) for i in range(len(next(iter(entries)))))
        return cls(cap, entries)


@dataclass(frozen=True)
class MomentPolynomialTable:
    """Moments as polynomials in x = |xi|^2 (all modes displaced by sqrt(x) e^{i alpha_k})."""

    cap: tuple[int, ...]
    phases: np.ndarray
    entries: dict

    def __getitem__(self, multi) -> Polynomial:
        return self.entries[tuple(multi)]

    def evaluate(self, x: float) -> MomentTable:
        return MomentTable(self.cap, {k: float(p(x)) for k, p in self.entries.items()})


def _shift(arr: np.ndarray, axis: int) -> tuple[tuple, tuple]:
    """Index pairs (dst, src) that raise the degree along ``axis`` by one."""
    nd = arr.ndim - 2
    dst = tuple(slice(1, None) if i == axis else slice(None) for i in range(nd))
    src = tuple(slice(None, -1) if i == axis else slice(None) for i in range(nd))
    return dst, src


def _resolvent_terms(A: np.ndarray, cap: tuple[int, ...]):
    """Series of log det(I + Lambda A) and of (I + Lambda A)^{-1} Lambda.

    Returns ``(logdet, N)`` with shapes ``box`` and ``box + (2n, 2n)``.
    """
    n = len(cap)
    box = tuple(c + 1 for c in cap)
    dim = 2 * n
    P = np.zeros(box + (dim, dim), dtype=complex)
    P[(0,) * n] = np.eye(dim)
    logdet = np.zeros(box, dtype=complex)
    N = np.zeros_like(P)
    for m in range(sum(cap) + 1):
        if m:
            logdet += (-1) ** (m + 1) * np.trace(P, axis1=-2, axis2=-1) / m
        # (Lambda A)^m Lambda: column block k picks up lambda_k
        PL = np.zeros_like(P)
        nxt = np.zeros_like(P)
        for k in range(n):
            cols = slice(2 * k, 2 * k + 2)
            dst, src = _shift(P, k)
            PL[dst + (slice(None), cols)] = P[src + (slice(None), cols)]
            # Lambda A P: row block k picks up lambda_k
            nxt[dst + (cols, slice(None))] = np.einsum("rs,...st->...rt", A[cols, :], P[src])
        N += (-1) ** m * PL
        P = nxt
    return logdet, N


def generating_series(cm: NormalCM, disp: DisplacementConfig | None = None, cap=None,
                      symbolic: bool = False) -> TruncatedSeries:
    """Taylor coefficients of G_N up to ``cap``.

    With ``symbolic=True`` every mode is displaced by sqrt(x) e^{i alpha_k} where the
    phases are taken from ``disp`` (its amplitudes are ignored), and the series
    coefficients are polynomials in x of degree <= total order.
    """
    n = cm.n_modes
    cap = check_cap((DEFAULT_ORDER,) * n if cap is None else cap, n)
    x_degree = sum(cap) if symbolic else 0
    logdet, N = _resolvent_terms(cm.matrix(), cap)

    det_part = TruncatedSeries.zeros(cap, x_degree)
    det_part.coeffs[..., 0] = -0.5 * logdet
    G = det_part.exp()
    if disp is None:
        return G
    if disp.n_modes != n:
        raise ValueError(f"displacement has {disp.n_modes} modes, state has {n}")
    if symbolic:
        u = DisplacementConfig(np.ones(n), disp.phases).vector()
        power = 1
    else:
        u = disp.vector()
        power = 0
    quad = np.einsum("r,...rs,s->...", u.conj(), N, u)
    exponent = TruncatedSeries.zeros(cap, x_degree)
    exponent.coeffs[..., power] = -0.5 * quad
    return G * exponent.exp()


def _real(values: np.ndarray, what: str) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(values))))
    if np.max(np.abs(values.imag)) > IMAG_TOL * scale:
        raise ConsistencyError(f"{what} has an imaginary residue {np.max(np.abs(values.imag)):.3e}")
    return values.real


def _moment_factor(multi) -> float:
    return (-1) ** sum(multi) * prod(factorial(k) for k in multi)


def intensity_moments(cm: NormalCM, disp: DisplacementConfig | None = None, cap=None) -> MomentTable:
    """All moments <W_1^k_1 ... W_n^k_n> with k <= cap for explicit displacement amplitudes."""
    series = generating_series(cm, disp, cap)
    entries = {}
    for multi in multi_indices(series.cap):
        c = _real(series.coefficient(multi), f"moment {multi}")[0]
        entries[multi] = float(_moment_factor(multi) * c)
    return MomentTable(series.cap, entries)


def intensity_moment_polynomials(cm: NormalCM, phases, cap=None) -> MomentPolynomialTable:
    """Moments as exact polynomials in x for equal-amplitude displacement with ``phases``."""
    phases = np.asarray(phases, dtype=float).reshape(-1)
    disp = DisplacementConfig(np.zeros(phases.size), phases)
    series = generating_series(cm, disp, cap, symbolic=True)
    entries = {}
    for multi in multi_indices(series.cap):
        coef = _real(series.coefficient(multi), f"moment polynomial {multi}")
        coef = _moment_factor(multi) * coef
        order = sum(multi)
        tail = coef[order + 1:]
        if tail.size and np.max(np.abs(tail)) > IMAG_TOL * max(1.0, np.max(np.abs(coef))):
            raise ConsistencyError(f"moment {multi} has x-degree above {order}")
        entries[multi] = Polynomial(coef[:order + 1])
    return MomentPolynomialTable(series.cap, disp.phases, entries)
