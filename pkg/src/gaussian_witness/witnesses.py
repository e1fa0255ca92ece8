"""
Intensity-moment nonclassicality witnesses for displaced Gaussian states.

    R_k  = <W_k><W_k^3> - <W_k^2>^2              (single mode)
    M_jl = <W_j^2><W_l^2> - <W_j W_l>^2          (two modes)

Either is negative only for states without a classical P function. With every mode
displaced by sqrt(x) e^{i alpha_k}, both witnesses are cubics in x (the x^4 terms of
the two products cancel). Their leading coefficients are

    a_R = 2 (B + Re[C e^{-2i alpha}])
    a_M = 2 (B_j + B_l + Re[C_j e^{-2i alpha_j}] + Re[C_l e^{-2i alpha_l}]
             - 2 Re[Dbar_jl e^{i(alpha_j - alpha_l)}] - 2 Re[D_jl e^{-i(alpha_j + alpha_l)}])

so a large enough displacement at phases making a < 0 always drives the witness negative.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .errors import ConsistencyError, ValidationError
from .gaussian_core import DisplacementConfig, NormalCM, StandardFormParams
from .moments import intensity_moment_polynomials, intensity_moments
from .states import product, vacuum

DETECT_TOL = 1e-10
QUARTIC_TOL = 1e-10
ROOT_AGREEMENT_TOL = 1e-8
PHASE_GRID = 256


def _check_mode(cm: NormalCM, k: int) -> int:
    k = int(k)
    if not 0 <= k < cm.n_modes:
        raise ValidationError(f"mode {k} out of range for a {cm.n_modes}-mode state")
    return k


def _check_pair(cm: NormalCM, modes) -> tuple[int, int]:
    if len(modes) != 2:
        raise ValidationError(f"M needs exactly two modes, got {modes}")
    j, l = (_check_mode(cm, m) for m in modes)
    if j == l:
        raise ValidationError("M needs two distinct modes")
    return j, l


# ------------------------------------------------------------ witness values

def witness_R(cm: NormalCM, k: int, disp: DisplacementConfig | None = None) -> float:
    k = _check_mode(cm, k)
    sub_disp = None if disp is None else disp.subsystem([k])
    m = intensity_moments(cm.subsystem([k]), sub_disp, (3,))
    return m[(1,)] * m[(3,)] - m[(2,)] ** 2


def witness_M(cm: NormalCM, modes, disp: DisplacementConfig | None = None) -> float:
    j, l = _check_pair(cm, modes)
    sub_disp = None if disp is None else disp.subsystem([j, l])
    m = intensity_moments(cm.subsystem([j, l]), sub_disp, (2, 2))
    return m[(2, 0)] * m[(0, 2)] - m[(1, 1)] ** 2


# --------------------------------------------------------- cubic structure

@dataclass(frozen=True)
class WitnessPolynomial:
    """Witness value a x^3 + b x^2 + c x + d as a function of x = |xi|^2."""

    a: float
    b: float
    c: float
    d: float
    kind: str
    modes: tuple
    phases: tuple
    quartic_residue: float = 0.0

    @property
    def coefficients(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)

    def __call__(self, x):
        return np.polyval(self.coefficients, x)


def witness_polynomial(cm: NormalCM, kind: str, modes, phases) -> WitnessPolynomial:
    """Cubic coefficients of R (one mode) or M (two modes) for equal-amplitude displacement."""
    kind = kind.upper()
    modes = tuple(int(m) for m in np.atleast_1d(modes))
    phases = tuple(float(p) for p in np.atleast_1d(phases))
    if kind == "R":
        if len(modes) != 1:
            raise ValidationError("R acts on a single mode")
        k = _check_mode(cm, modes[0])
        if len(phases) != 1:
            raise ValidationError("R needs one phase")
        t = intensity_moment_polynomials(cm.subsystem([k]), phases, (3,))
        poly = t[(1,)] * t[(3,)] - t[(2,)] ** 2
    elif kind == "M":
        j, l = _check_pair(cm, modes)
        if len(phases) != 2:
            raise ValidationError("M needs two phases")
        t = intensity_moment_polynomials(cm.subsystem([j, l]), phases, (2, 2))
        poly = t[(2, 0)] * t[(0, 2)] - t[(1, 1)] ** 2
    else:
        raise ValidationError(f"unknown witness kind {kind!r}")
    coef = np.zeros(5)
    coef[:poly.coef.size] = poly.coef
    residue = abs(coef[4])
    if residue > QUARTIC_TOL:
        raise ConsistencyError(f"x^4 term of {kind} does not cancel (residue {residue:.3e})")
    d, c, b, a = coef[:4]
    return WitnessPolynomial(float(a), float(b), float(c), float(d), kind, modes, phases, float(residue))


def leading_coefficient_R(cm: NormalCM, k: int, alpha: float) -> float:
    return 2 * (cm.B[k] + np.real(cm.C[k] * np.exp(-2j * alpha)))


def leading_coefficient_M(cm: NormalCM, modes, alpha_j, alpha_l):
    """Closed-form x^3 coefficient of M; broadcasts over phase arrays."""
    j, l = modes
    aj, al = np.asarray(alpha_j), np.asarray(alpha_l)
    return 2 * (cm.B[j] + cm.B[l]
                + np.real(cm.C[j] * np.exp(-2j * aj)) + np.real(cm.C[l] * np.exp(-2j * al))
                - 2 * np.real(cm.dbar(j, l) * np.exp(1j * (aj - al)))
                - 2 * np.real(cm.d(j, l) * np.exp(-1j * (aj + al))))


# ---------------------------------------------------------- phase selection

def optimal_phase_R(cm: NormalCM, k: int) -> float:
    """alpha = (arg C_k - pi)/2, which turns Re[C e^{-2i alpha}] into -|C|."""
    k = _check_mode(cm, k)
    C = cm.C[k]
    if C == 0:
        return 0.0
    return float((np.angle(C) - np.pi) / 2)


def phase_candidates(cm: NormalCM, j: int, l: int) -> dict:
    D, Db = cm.d(j, l), cm.dbar(j, l)
    out = {}
    # D and Dbar terms both maximal: alpha_j + alpha_l = arg D, alpha_j - alpha_l = -arg Dbar
    s, t = np.angle(D), -np.angle(Db)
    out["correlations"] = ((s + t) / 2, (s - t) / 2)
    # twin beam: only D matters
    out["twin_beam"] = (np.angle(D) / 2, np.angle(D) / 2)
    # local squeezing aligned in both modes, either relative sign of the cross terms
    aj, al = optimal_phase_R(cm, j), optimal_phase_R(cm, l)
    out["local"] = (aj, al)
    out["local_flipped"] = (aj + np.pi, al)
    for kj in range(4):
        for kl in range(4):
            out[f"quarter_{kj}{kl}"] = ((2 * kj + 1) * np.pi / 4, (2 * kl + 1) * np.pi / 4)
    return out


def optimal_phases_M(cm: NormalCM, modes) -> tuple[float, float]:
    """Minimize the leading coefficient of M over (alpha_j, alpha_l).

    Closed-form candidates are evaluated first; a 256 x 256 grid and one BFGS pass
    from the best point guard against the non-convex general case.
    """
    j, l = _check_pair(cm, modes)

    def f(p):
        return float(leading_coefficient_M(cm, (j, l), p[0], p[1]))

    starts = list(phase_candidates(cm, j, l).values())
    grid = np.linspace(0, 2 * np.pi, PHASE_GRID, endpoint=False)
    gj, gl = np.meshgrid(grid, grid, indexing="ij")
    values = leading_coefficient_M(cm, (j, l), gj, gl)
    i = np.unravel_index(np.argmin(values), values.shape)
    starts.append((grid[i[0]], grid[i[1]]))

    best = min(starts, key=f)
    res = minimize(f, np.array(best, dtype=float), method="BFGS", options={"gtol": 1e-12})
    if res.fun < f(best):
        best = tuple(res.x)
    return float(np.mod(best[0], 2 * np.pi)), float(np.mod(best[1], 2 * np.pi))


# ------------------------------------------------------ critical amplitude

def cubic_roots_numeric(a, b, c, d) -> np.ndarray:
    """Companion-matrix roots."""
    return np.roots([a, b, c, d]).astype(complex)


def cubic_roots_radical(a, b, c, d) -> np.ndarray:
    """Cardano roots x_h = -(b + eta^h F + Delta0/(eta^h F)) / (3a), h = 0, 1, 2.

    Delta0 = b^2 - 3ac, Delta1 = 2b^3 - 9abc + 27a^2 d,
    F = cbrt((Delta1 +- sqrt(Delta1^2 - 4 Delta0^3)) / 2) with the sign maximizing |F|.
    """
    if a == 0:
        raise ValueError("not a cubic")
    d0 = b * b - 3 * a * c
    d1 = 2 * b ** 3 - 9 * a * b * c + 27 * a * a * d
    disc = np.sqrt(complex(d1 * d1 - 4 * d0 ** 3))
    cands = [(d1 + disc) / 2, (d1 - disc) / 2]
    inner = max(cands, key=abs)
    if inner == 0:
        return np.full(3, -b / (3 * a), dtype=complex)
    F = inner ** (1 / 3)
    eta = (-1 + 1j * np.sqrt(3)) / 2
    roots = []
    for h in range(3):
        Fh = eta ** h * F
        roots.append(-(b + Fh + d0 / Fh) / (3 * a))
    return np.array(roots)


def _real_roots(roots: np.ndarray, scale: float) -> np.ndarray:
    tol = 1e-7 * max(1.0, scale)
    return np.sort(roots[np.abs(roots.imag) <= tol].real)


def roots_agree(r1: np.ndarray, r2: np.ndarray, tol: float = ROOT_AGREEMENT_TOL) -> bool:
    """Multiset equality of complex roots within ``tol`` relative to max(1, |root|)."""
    remaining = list(r2)
    for z in r1:
        k = int(np.argmin([abs(z - w) for w in remaining]))
        if abs(z - remaining[k]) > tol * max(1.0, abs(z)):
            return False
        remaining.pop(k)
    return True


def critical_amplitude(poly: WitnessPolynomial) -> Optional[float]:
    """x_cr such that the cubic is negative for every x > x_cr, or None when a >= 0.

    x_cr is the largest positive real root, or 0 when there is none (then d <= 0 and
    the witness is already negative without displacement). The amplitude itself is
    |xi|_cr = sqrt(x_cr).
    """
    a, b, c, d = poly.coefficients
    if not a < 0:
        return None
    roots = cubic_roots_numeric(a, b, c, d)
    real = _real_roots(roots, float(np.max(np.abs(roots))))
    positive = real[real > 0]
    if positive.size == 0:
        return 0.0
    x = float(positive[-1])
    # polish against the evaluated cubic
    for _ in range(3):
        slope = np.polyval([3 * a, 2 * b, c], x)
        if slope == 0:
            break
        x -= np.polyval([a, b, c, d], x) / slope
    return max(x, 0.0)


def negative_intervals(poly: WitnessPolynomial, tol: float = DETECT_TOL) -> list[tuple[float, float]]:
    """Maximal subintervals of [0, inf) where the cubic is below -tol (inf as upper end)."""
    a, b, c, d = poly.coefficients
    coef = np.array([a, b, c, d])
    nz = np.flatnonzero(np.abs(coef) > 0)
    if nz.size == 0:
        return []
    roots = np.roots(coef[nz[0]:]) if nz[0] < 3 else np.array([])
    scale = float(np.max(np.abs(roots))) if roots.size else 1.0
    pts = sorted({0.0, *[r for r in _real_roots(np.asarray(roots, dtype=complex), scale) if r > 0]})
    edges = pts + [np.inf]
    out = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        probe = lo + 1.0 if np.isinf(hi) else 0.5 * (lo + hi)
        if poly(probe) < -tol:
            if out and out[-1][1] == lo:
                out[-1] = (out[-1][0], hi)
            else:
                out.append((lo, hi))
    return out


# ------------------------------------------------------------- quantifiers

def nonclassicality_monotone_single(cm: NormalCM, k: int) -> float:
    """max(0, |C_k| - B_k); grows with the nonclassicality depth."""
    k = _check_mode(cm, k)
    return float(max(0.0, abs(cm.C[k]) - cm.B[k]))


def duan_variances(params: StandardFormParams, h: int) -> tuple[float, float]:
    """<(du)^2>, <(dv)^2> for u = (|h| x_j + x_l/h)/sqrt2, v = (|h| p_j - p_l/h)/sqrt2."""
    if h not in (1, -1):
        raise ValidationError("h must be +1 or -1")
    sigma = params.sigma()
    cu = np.array([abs(h), 0.0, 1.0 / h, 0.0]) / np.sqrt(2)
    cv = np.array([0.0, abs(h), 0.0, -1.0 / h]) / np.sqrt(2)
    return float(cu @ sigma @ cu), float(cv @ sigma @ cv)


def duan_sum(params: StandardFormParams) -> float:
    """min over h = +-1 of <(du)^2> + <(dv)^2>; values below 1 certify entanglement."""
    return min(sum(duan_variances(params, h)) for h in (1, -1))


# ------------------------------------------------------------- orchestration

STRATEGIES = ("auto", "R", "M", "M-coherent")


@dataclass
class WitnessReport:
    witness: str
    strategy: str
    modes: tuple
    phases: tuple
    a: float
    b: float
    c: float
    d: float
    x: float
    value: float
    value_at_zero: float
    detected: bool
    x_cr: Optional[float]
    xi_cr: Optional[float]
    monotone: float
    negative_intervals: list = field(default_factory=list)
    quartic_residue: float = 0.0

    @property
    def verdict(self) -> str:
        return "nonclassical-detected" if self.detected else "not-detected"

    def to_json(self) -> dict:
        out = asdict(self)
        out["verdict"] = self.verdict
        out["modes"] = list(self.modes)
        out["phases"] = list(self.phases)
        out["negative_intervals"] = [[lo, None if np.isinf(hi) else hi] for lo, hi in self.negative_intervals]
        return out


def _recommended_x(poly: WitnessPolynomial, x_cr: Optional[float], tol: float) -> float:
    if x_cr is not None:
        return max(2 * x_cr, 1.0)
    intervals = negative_intervals(poly, tol)
    if not intervals:
        return 0.0
    # deepest point of the cubic on [0, inf)
    a, b, c, _ = poly.coefficients
    crit = np.roots([3 * a, 2 * b, c]) if (a or b) else np.array([])
    cands = [0.0] + [float(r.real) for r in np.atleast_1d(crit) if abs(r.imag) < 1e-12 and r.real > 0]
    cands += [lo for lo, hi in intervals] + [0.5 * (lo + hi) for lo, hi in intervals if np.isfinite(hi)]
    return min(cands, key=poly)


def analyze(cm: NormalCM, modes, strategy: str = "auto", x: float | None = None,
            phases=None, tol: float = DETECT_TOL) -> WitnessReport:
    """Pick phases, build the cubic, locate the critical displacement and report a verdict.

    Strategies: ``R`` (one mode, phase from its squeezing direction), ``M`` (two modes,
    phases minimizing the leading coefficient) and ``M-coherent`` (one mode probed
    with M against a coherent reference mode of the same amplitude). ``auto`` picks R
    for one mode and M for two. Explicit ``phases`` bypass the optimization.
    """
    modes = tuple(int(m) for m in np.atleast_1d(modes))
    if strategy not in STRATEGIES:
        raise ValidationError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    if strategy == "auto":
        strategy = "R" if len(modes) == 1 else "M"
    if strategy in ("R", "M-coherent") and len(modes) != 1:
        raise ValidationError(f"strategy {strategy} takes one mode, got {modes}")
    if strategy == "M" and len(modes) != 2:
        raise ValidationError(f"strategy M takes two modes, got {modes}")

    if strategy == "R":
        target, kind, wmodes = cm, "R", modes
        chosen = (optimal_phase_R(cm, modes[0]),) if phases is None else tuple(phases)
    elif strategy == "M":
        target, kind, wmodes = cm, "M", modes
        chosen = optimal_phases_M(cm, modes) if phases is None else tuple(phases)
    else:
        target = product(cm.subsystem(modes), vacuum(1))
        kind, wmodes = "M", (0, 1)
        chosen = (optimal_phase_R(target, 0), 0.0) if phases is None else tuple(phases)

    poly = witness_polynomial(target, kind, wmodes, chosen)
    x_cr = critical_amplitude(poly)
    intervals = negative_intervals(poly, tol)
    x_eval = _recommended_x(poly, x_cr, tol) if x is None else float(x)
    if x_eval < 0:
        raise ValidationError("x = |xi|^2 must be nonnegative")
    value = float(poly(x_eval))
    return WitnessReport(
        witness=kind, strategy=strategy, modes=modes, phases=tuple(float(p) for p in chosen),
        a=poly.a, b=poly.b, c=poly.c, d=poly.d, x=float(x_eval), value=value,
        value_at_zero=float(poly.d), detected=value < -tol,
        x_cr=None if x_cr is None else float(x_cr), xi_cr=None if x_cr is None else float(np.sqrt(x_cr)),
        monotone=float(max(0.0, -poly.a / 2)), negative_intervals=intervals,
        quartic_residue=poly.quartic_residue,
    )
