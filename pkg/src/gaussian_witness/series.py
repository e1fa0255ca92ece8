"""
Truncated multivariate power series in (lambda_1, ..., lambda_n) whose coefficients
are polynomials in an auxiliary variable x.

Coefficients live in a dense complex array of shape ``(cap_1+1, ..., cap_n+1, x_deg+1)``.
Products keep only monomials with lambda_k-degree <= cap_k; terms outside the box are
dropped before accumulation, so nothing wraps around.
"""

from __future__ import annotations

from math import factorial

import numpy as np
from scipy.signal import convolve

from .errors import CapacityError, ValidationError

MAX_CAP = 6


class TruncatedSeries:
    """Dense truncated series with per-variable degree caps."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: np.ndarray):
        self.coeffs = np.asarray(coeffs, dtype=complex)

    @classmethod
    def zeros(cls, cap, x_degree: int = 0) -> "TruncatedSeries":
        return cls(np.zeros(tuple(c + 1 for c in cap) + (x_degree + 1,), dtype=complex))

    @classmethod
    def one(cls, cap, x_degree: int = 0) -> "TruncatedSeries":
        s = cls.zeros(cap, x_degree)
        s.coeffs[(0,) * (len(cap) + 1)] = 1.0
        return s

    @property
    def cap(self) -> tuple[int, ...]:
        return tuple(d - 1 for d in self.coeffs.shape[:-1])

    @property
    def x_degree(self) -> int:
        return self.coeffs.shape[-1] - 1

    @property
    def total_degree(self) -> int:
        return sum(self.cap)

    def coefficient(self, multi) -> np.ndarray:
        """Polynomial-in-x coefficient (ascending powers) of lambda^multi."""
        return self.coeffs[tuple(multi)]

    def _coerce(self, other) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            if other.coeffs.shape != self.coeffs.shape:
                raise ValueError(f"series shapes differ: {self.coeffs.shape} vs {other.coeffs.shape}")
            return other
        out = TruncatedSeries.zeros(self.cap, self.x_degree)
        out.coeffs[(0,) * (len(self.cap) + 1)] = other
        return out

    def __add__(self, other):
        return TruncatedSeries(self.coeffs + self._coerce(other).coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        return TruncatedSeries(self.coeffs - self._coerce(other).coeffs)

    def __neg__(self):
        return TruncatedSeries(-self.coeffs)

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return TruncatedSeries(self.coeffs * other)
        self._coerce(other)
        full = convolve(self.coeffs, other.coeffs, mode="full", method="direct")
        return TruncatedSeries(full[tuple(slice(0, d) for d in self.coeffs.shape)])

    __rmul__ = __mul__

    def exp(self) -> "TruncatedSeries":
        """exp(s) for a series whose constant term does not depend on x."""
        origin = (0,) * len(self.cap)
        c0 = self.coeffs[origin]
        if np.any(c0[1:] != 0):
            raise ValueError("exp needs an x-independent constant term")
        rest = TruncatedSeries(self.coeffs.copy())
        rest.coeffs[origin + (0,)] = 0.0
        # rest has no constant term: powers beyond the total degree vanish
        out = TruncatedSeries.one(self.cap, self.x_degree)
        term = TruncatedSeries.one(self.cap, self.x_degree)
        for k in range(1, self.total_degree + 1):
            term = term * rest
            out = out + term * (1.0 / factorial(k))
        return out * np.exp(c0[0])


def check_cap(cap, n_modes: int) -> tuple[int, ...]:
    cap = tuple(int(c) for c in cap)
    if len(cap) != n_modes:
        raise ValidationError(f"cap has {len(cap)} entries for {n_modes} modes")
    if any(c < 0 for c in cap):
        raise ValidationError(f"cap entries must be nonnegative, got {cap}")
    if any(c > MAX_CAP for c in cap):
        raise CapacityError(f"per-mode order cap is limited to {MAX_CAP}, got {cap}")
    return cap
