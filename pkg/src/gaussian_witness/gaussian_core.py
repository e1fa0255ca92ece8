"""
Gaussian state representations and local operations.

Quadrature convention: x = (a + a^dag)/sqrt(2), p = -i(a - a^dag)/sqrt(2), so the
vacuum covariance matrix is I/2. Quadrature vectors are ordered (x_1, p_1, ..., x_n, p_n).

The normally ordered covariance matrix A_N is stored through its independent
correlators

    B_k    = <:da_k^dag da_k:>
    C_k    = <:da_k^2:>
    D_jl   = <:da_j da_l:>         (symmetric in j, l)
    Dbar_jl = <:da_j^dag da_l:>    (Dbar_lj = conj(Dbar_jl))

and assembled on demand in the (a_1^dag, a_1, ..., a_n^dag, a_n) block layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import UnsupportedInputError, ValidationError

PHYSICAL_TOL = 1e-10
CLASSICAL_TOL = 1e-10
SYMMETRY_TOL = 1e-12


def symplectic_form(n: int) -> np.ndarray:
    """Block-diagonal Omega = diag(w, ..., w) with w = [[0, 1], [-1, 0]]."""
    return np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def symplectic_eigenvalues(sigma: np.ndarray) -> np.ndarray:
    """Sorted symplectic eigenvalues of a real symmetric 2n x 2n matrix."""
    sigma = np.asarray(sigma, dtype=float)
    n = sigma.shape[0] // 2
    ev = np.abs(np.linalg.eigvals(1j * symplectic_form(n) @ sigma))
    # eigenvalues of i*Omega*sigma come in +-nu pairs
    return np.sort(ev)[::2]


def _pair_key(j: int, l: int) -> tuple[int, int]:
    if j == l:
        raise ValueError("pair correlators need two distinct modes")
    return (j, l) if j < l else (l, j)


@dataclass(frozen=True)
class QuadratureState:
    """Quadrature covariance matrix ``sigma`` plus mean vector <X>."""

    sigma: np.ndarray
    mean: np.ndarray = None  # type: ignore[assignment]

    def __post_init__(self):
        sigma = np.array(self.sigma, dtype=float)
        if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1] or sigma.shape[0] % 2:
            raise ValidationError(f"sigma must be a square 2n x 2n matrix, got shape {sigma.shape}")
        scale = max(1.0, float(np.max(np.abs(sigma))))
        if np.max(np.abs(sigma - sigma.T)) > SYMMETRY_TOL * scale:
            raise ValidationError("sigma is not symmetric")
        sigma = 0.5 * (sigma + sigma.T)
        if self.mean is None:
            mean = np.zeros(sigma.shape[0])
        else:
            mean = np.array(self.mean, dtype=float).reshape(-1)
        if mean.shape != (sigma.shape[0],):
            raise ValidationError(f"mean must have length {sigma.shape[0]}, got {mean.shape}")
        sigma.flags.writeable = False
        mean.flags.writeable = False
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "mean", mean)

    @property
    def n_modes(self) -> int:
        return self.sigma.shape[0] // 2

    def amplitudes(self) -> np.ndarray:
        """Complex mean field <a_k> = (<x_k> + i<p_k>)/sqrt(2)."""
        return (self.mean[0::2] + 1j * self.mean[1::2]) / np.sqrt(2)


@dataclass(frozen=True)
class NormalCM:
    """Normally ordered covariance data (B, C, D, Dbar) of an n-mode Gaussian state.

    ``D`` and ``Dbar`` map pairs ``(j, l)`` with ``j < l`` to complex numbers; missing
    pairs are zero. Use :meth:`d` and :meth:`dbar` for index-order-aware access.
    """

    B: np.ndarray
    C: np.ndarray
    D: Mapping[tuple[int, int], complex] = field(default_factory=dict)
    Dbar: Mapping[tuple[int, int], complex] = field(default_factory=dict)

    def __post_init__(self):
        B = np.array(self.B, dtype=float).reshape(-1)
        C = np.array(self.C, dtype=complex).reshape(-1)
        if B.shape != C.shape:
            raise ValidationError(f"B and C must have equal length, got {B.shape} and {C.shape}")
        n = B.size
        if n == 0:
            raise ValidationError("a state needs at least one mode")
        D, Dbar = {}, {}
        for name, src, dst in (("D", self.D, D), ("Dbar", self.Dbar, Dbar)):
            for (j, l), v in dict(src).items():
                j, l = int(j), int(l)
                if not (0 <= j < n and 0 <= l < n) or j == l:
                    raise ValidationError(f"{name} key {(j, l)} is not a pair of distinct modes < {n}")
                v = complex(v)
                if j > l:
                    # stored canonically with j < l
                    j, l = l, j
                    if name == "Dbar":
                        v = v.conjugate()
                dst[(j, l)] = v
        B.flags.writeable = False
        C.flags.writeable = False
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "Dbar", Dbar)

    @property
    def n_modes(self) -> int:
        return self.B.size

    def d(self, j: int, l: int) -> complex:
        return self.D.get(_pair_key(j, l), 0j)

    def dbar(self, j: int, l: int) -> complex:
        v = self.Dbar.get(_pair_key(j, l), 0j)
        return v if j < l else v.conjugate()

    def matrix(self) -> np.ndarray:
        """Assemble the Hermitian 2n x 2n matrix A_N."""
        n = self.n_modes
        A = np.zeros((2 * n, 2 * n), dtype=complex)
        for k in range(n):
            A[2 * k:2 * k + 2, 2 * k:2 * k + 2] = [[self.B[k], self.C[k]],
                                                   [self.C[k].conjugate(), self.B[k]]]
        for j in range(n):
            for l in range(n):
                if j == l:
                    continue
                D, Db = self.d(j, l), self.dbar(j, l)
                A[2 * j:2 * j + 2, 2 * l:2 * l + 2] = [[Db.conjugate(), D],
                                                       [D.conjugate(), Db]]
        return A

    @classmethod
    def from_matrix(cls, A: np.ndarray) -> "NormalCM":
        A = np.asarray(A, dtype=complex)
        n = A.shape[0] // 2
        scale = max(1.0, float(np.max(np.abs(A))))
        if np.max(np.abs(A - A.conj().T)) > SYMMETRY_TOL * scale:
            raise ValidationError("A_N is not Hermitian")
        B = np.real(np.diag(A)[0::2])
        C = A[0::2, 1::2].diagonal().copy()
        D = {(j, l): A[2 * j, 2 * l + 1] for j in range(n) for l in range(j + 1, n)}
        Dbar = {(j, l): A[2 * j + 1, 2 * l + 1] for j in range(n) for l in range(j + 1, n)}
        return cls(B, C, D, Dbar)

    def subsystem(self, modes) -> "NormalCM":
        """Marginal on ``modes`` (in the given order)."""
        modes = [int(m) for m in modes]
        if len(set(modes)) != len(modes) or any(not 0 <= m < self.n_modes for m in modes):
            raise ValidationError(f"invalid mode selection {modes} for {self.n_modes} modes")
        D, Dbar = {}, {}
        for a, j in enumerate(modes):
            for b, l in enumerate(modes):
                if a < b:
                    D[(a, b)] = self.d(j, l)
                    Dbar[(a, b)] = self.dbar(j, l)
        return NormalCM(self.B[modes], self.C[modes], D, Dbar)

    def allclose(self, other: "NormalCM", atol: float = 1e-12) -> bool:
        return self.n_modes == other.n_modes and np.allclose(self.matrix(), other.matrix(), rtol=0, atol=atol)


@dataclass(frozen=True)
class DisplacementConfig:
    """Coherent amplitudes |xi_k| and phases alpha_k of the displacement vector Xi."""

    amplitudes: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=float).reshape(-1)
        ph = np.array(self.phases, dtype=float).reshape(-1)
        if amp.shape != ph.shape:
            raise ValidationError("amplitudes and phases must have equal length")
        if np.any(amp < 0):
            raise ValidationError("displacement amplitudes must be nonnegative")
        ph = np.mod(ph, 2 * np.pi)
        amp.flags.writeable = False
        ph.flags.writeable = False
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "phases", ph)

    @classmethod
    def none(cls, n: int) -> "DisplacementConfig":
        return cls(np.zeros(n), np.zeros(n))

    @classmethod
    def uniform(cls, x: float, phases) -> "DisplacementConfig":
        """Equal amplitude sqrt(x) on every mode with the given phases."""
        phases = np.atleast_1d(np.asarray(phases, dtype=float))
        return cls(np.full(phases.shape, np.sqrt(x)), phases)

    @classmethod
    def from_fields(cls, xi) -> "DisplacementConfig":
        xi = np.atleast_1d(np.asarray(xi, dtype=complex))
        return cls(np.abs(xi), np.angle(xi))

    @property
    def n_modes(self) -> int:
        return self.amplitudes.size

    def fields(self) -> np.ndarray:
        """Complex amplitudes xi_k = |xi_k| e^{i alpha_k}."""
        return self.amplitudes * np.exp(1j * self.phases)

    def vector(self) -> np.ndarray:
        """Xi = (xi_1, xi_1^*, ..., xi_n, xi_n^*)."""
        xi = self.fields()
        out = np.empty(2 * xi.size, dtype=complex)
        out[0::2] = xi
        out[1::2] = xi.conj()
        return out

    def phase_shift(self, phis) -> "DisplacementConfig":
        return DisplacementConfig(self.amplitudes, self.phases + np.asarray(phis, dtype=float))

    def subsystem(self, modes) -> "DisplacementConfig":
        modes = list(modes)
        return DisplacementConfig(self.amplitudes[modes], self.phases[modes])


@dataclass(frozen=True)
class StandardFormParams:
    """Two-mode standard form sigma_st: diagonal blocks q_j I, q_l I, cross block diag(q_jl, q'_jl)."""

    q_j: float
    q_l: float
    q_jl: float
    qp_jl: float

    def sigma(self) -> np.ndarray:
        return np.array([
            [self.q_j, 0.0, self.q_jl, 0.0],
            [0.0, self.q_j, 0.0, self.qp_jl],
            [self.q_jl, 0.0, self.q_l, 0.0],
            [0.0, self.qp_jl, 0.0, self.q_l],
        ])

    def state(self) -> QuadratureState:
        return QuadratureState(self.sigma())

    def normal(self) -> NormalCM:
        """B_k = q_k - 1/2, D = (q_jl - q'_jl)/2, Dbar = (q_jl + q'_jl)/2; C = 0."""
        return NormalCM(
            [self.q_j - 0.5, self.q_l - 0.5], [0.0, 0.0],
            {(0, 1): (self.q_jl - self.qp_jl) / 2}, {(0, 1): (self.q_jl + self.qp_jl) / 2},
        )


def is_physical(state: QuadratureState, tol: float = PHYSICAL_TOL) -> tuple[bool, float]:
    """Check sigma + (i/2) Omega >= 0 through the smallest symplectic eigenvalue.

    Returns
    -------
    (bool, float)
        Whether the state is physical and the margin ``min(nu) - 1/2``.

    Symplectic eigenvalues only mean something for positive-definite sigma (an
    indefinite sigma can have all |eig(i Omega sigma)| >= 1/2), so when sigma is not
    positive definite the margin is the smallest eigenvalue of sigma + (i/2) Omega.
    """
    if np.linalg.eigvalsh(state.sigma)[0] <= 0:
        margin = float(np.linalg.eigvalsh(state.sigma + 0.5j * symplectic_form(state.n_modes))[0])
        return False, min(margin, -np.finfo(float).tiny)
    margin = float(symplectic_eigenvalues(state.sigma)[0] - 0.5)
    return margin >= -tol, margin


def is_classical(cm: NormalCM, tol: float = CLASSICAL_TOL) -> tuple[bool, float]:
    """A Gaussian state has a regular or delta-like P function iff A_N >= 0.

    The margin is the smallest eigenvalue of A_N; for one mode it equals B - |C|.
    """
    margin = float(np.linalg.eigvalsh(cm.matrix())[0])
    return margin >= -tol, margin


def to_normal(state: QuadratureState, check: bool = True) -> NormalCM:
    """Convert a quadrature covariance matrix to normally ordered correlators."""
    if check:
        ok, margin = is_physical(state)
        if not ok:
            raise ValidationError(
                f"state violates sigma + i/2 Omega >= 0 (min symplectic eigenvalue - 1/2 = {margin:.3e})")
    s = state.sigma
    n = state.n_modes
    B = (s[0::2, 0::2].diagonal() + s[1::2, 1::2].diagonal()) / 2 - 0.5
    C = (s[0::2, 0::2].diagonal() - s[1::2, 1::2].diagonal()) / 2 + 1j * s[0::2, 1::2].diagonal()
    D, Dbar = {}, {}
    for j in range(n):
        for l in range(j + 1, n):
            xx, pp = s[2 * j, 2 * l], s[2 * j + 1, 2 * l + 1]
            xp, px = s[2 * j, 2 * l + 1], s[2 * j + 1, 2 * l]
            D[(j, l)] = complex(xx - pp, xp + px) / 2
            Dbar[(j, l)] = complex(xx + pp, xp - px) / 2
    return NormalCM(B, C, D, Dbar)


def from_normal(cm: NormalCM, mean=None, check: bool = True) -> QuadratureState:
    """Inverse of :func:`to_normal`."""
    n = cm.n_modes
    s = np.zeros((2 * n, 2 * n))
    for k in range(n):
        B, C = cm.B[k], cm.C[k]
        s[2 * k, 2 * k] = B + 0.5 + C.real
        s[2 * k + 1, 2 * k + 1] = B + 0.5 - C.real
        s[2 * k, 2 * k + 1] = s[2 * k + 1, 2 * k] = C.imag
    for j in range(n):
        for l in range(j + 1, n):
            D, Db = cm.d(j, l), cm.dbar(j, l)
            block = np.array([[Db.real + D.real, D.imag + Db.imag],
                              [D.imag - Db.imag, Db.real - D.real]])
            s[2 * j:2 * j + 2, 2 * l:2 * l + 2] = block
            s[2 * l:2 * l + 2, 2 * j:2 * j + 2] = block.T
    state = QuadratureState(s, mean)
    if check:
        ok, margin = is_physical(state)
        if not ok:
            raise ValidationError(
                f"correlators give a non-physical sigma (min symplectic eigenvalue - 1/2 = {margin:.3e})")
    return state


def phase_shift(cm: NormalCM, phis) -> NormalCM:
    """Apply local rotations a_k -> a_k e^{i phi_k}."""
    phis = np.asarray(phis, dtype=float).reshape(-1)
    if phis.size != cm.n_modes:
        raise ValidationError(f"need {cm.n_modes} phases, got {phis.size}")
    C = cm.C * np.exp(2j * phis)
    D = {(j, l): v * np.exp(1j * (phis[j] + phis[l])) for (j, l), v in cm.D.items()}
    Dbar = {(j, l): v * np.exp(1j * (phis[l] - phis[j])) for (j, l), v in cm.Dbar.items()}
    return NormalCM(cm.B, C, D, Dbar)


def reduce_to_standard_form(cm: NormalCM, tol: float = 1e-12) -> tuple[StandardFormParams, tuple[float, float]]:
    """Rotate a two-mode state with C_j = C_l = 0 so that D and Dbar become real and nonnegative.

    Returns the standard-form parameters and the local phases (phi_j, phi_l) applied,
    with phi_j chosen in (-pi/2, pi/2].
    """
    if cm.n_modes != 2:
        raise UnsupportedInputError("standard-form reduction is implemented for two modes only")
    if np.any(np.abs(cm.C) >= tol):
        raise UnsupportedInputError(
            "standard-form reduction requires C_j = C_l = 0; use the general witness path "
            "(optimal_phases_M / analyze) for locally squeezed states")
    D, Db = cm.d(0, 1), cm.dbar(0, 1)
    theta_d = np.angle(D) if abs(D) > 0 else 0.0
    theta_db = np.angle(Db) if abs(Db) > 0 else 0.0
    # phi_j + phi_l = -arg D, phi_l - phi_j = -arg Dbar
    phi_j = (theta_db - theta_d) / 2
    phi_l = (-theta_d - theta_db) / 2
    # joint shift by pi leaves every correlator unchanged
    if phi_j <= -np.pi / 2:
        phi_j, phi_l = phi_j + np.pi, phi_l + np.pi
    elif phi_j > np.pi / 2:
        phi_j, phi_l = phi_j - np.pi, phi_l - np.pi
    rotated = phase_shift(cm, [phi_j, phi_l])
    d, db = rotated.d(0, 1).real, rotated.dbar(0, 1).real
    params = StandardFormParams(
        q_j=float(cm.B[0] + 0.5), q_l=float(cm.B[1] + 0.5), q_jl=float(db + d), qp_jl=float(db - d))
    return params, (float(phi_j) + 0.0, float(phi_l) + 0.0)
