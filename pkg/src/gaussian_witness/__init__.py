"""Nonclassicality of Gaussian light from integrated intensity moments."""

from .errors import (
    CapacityError, ConsistencyError, UnsupportedInputError, ValidationError, WitnessError,
)
from .gaussian_core import (
    DisplacementConfig, NormalCM, QuadratureState, StandardFormParams, from_normal, is_classical,
    is_physical, phase_shift, reduce_to_standard_form, symplectic_eigenvalues, to_normal,
)
from .moments import (
    MomentPolynomialTable, MomentTable, generating_series, intensity_moment_polynomials,
    intensity_moments,
)
from .series import TruncatedSeries
from .witnesses import (
    WitnessPolynomial, WitnessReport, analyze, critical_amplitude, duan_sum,
    nonclassicality_monotone_single, optimal_phase_R, optimal_phases_M, witness_M,
    witness_polynomial, witness_R,
)

__version__ = "0.1.0"
