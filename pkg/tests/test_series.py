import numpy as np
import pytest

from gaussian_witness import CapacityError, TruncatedSeries, ValidationError
from gaussian_witness.series import MAX_CAP, check_cap


def series_1d(values, x_degree=0):
    s = TruncatedSeries.zeros((len(values) - 1,), x_degree)
    s.coeffs[:, 0] = values
    return s


def test_product_truncates_without_wraparound():
    a = series_1d([1, 1, 1, 1])
    b = a * a
    assert np.allclose(b.coeffs[:, 0], [1, 2, 3, 4])


def test_multivariate_product():
    a = TruncatedSeries.zeros((2, 1))
    a.coeffs[0, 0, 0] = 1
    a.coeffs[1, 0, 0] = 2
    a.coeffs[0, 1, 0] = 3
    b = a * a
    assert b.coefficient((2, 0))[0] == 4
    assert b.coefficient((1, 1))[0] == 12
    assert b.coefficient((0, 1))[0] == 6
    assert b.cap == (2, 1)


def test_exp_matches_taylor():
    cap = 5
    s = series_1d([0.3, -0.7, 0, 0, 0, 0])
    out = s.exp()
    # exp(0.3 - 0.7 t): coefficients e^0.3 (-0.7)^k / k!
    expected = [np.exp(0.3) * (-0.7) ** k / np.prod(range(1, k + 1)) for k in range(cap + 1)]
    assert np.allclose(out.coeffs[:, 0], expected, rtol=1e-14)


def test_exp_of_geometric_log():
    # log(1 + n t) = sum (-1)^{m+1} (n t)^m / m; exp(-log) = 1 / (1 + n t)
    n, cap = 1.7, 6
    s = series_1d([0] + [-((-1) ** (m + 1)) * n ** m / m for m in range(1, cap + 1)])
    assert np.allclose(s.exp().coeffs[:, 0], [(-n) ** k for k in range(cap + 1)], rtol=1e-12)


def test_x_polynomial_axis():
    s = TruncatedSeries.zeros((2,), x_degree=2)
    s.coeffs[1, 1] = 1.0  # x t
    out = s.exp()
    # exp(x t) = 1 + x t + x^2 t^2 / 2
    assert np.allclose(out.coefficient((2,)), [0, 0, 0.5])
    with pytest.raises(ValueError):
        bad = TruncatedSeries.zeros((1,), x_degree=1)
        bad.coeffs[0, 1] = 1.0
        bad.exp()


def test_arithmetic_and_scalars():
    one = TruncatedSeries.one((2, 2))
    s = one * 3 + 1 - one
    assert s.coefficient((0, 0))[0] == 3
    assert (-s).coefficient((0, 0))[0] == -3
    with pytest.raises(ValueError):
        one + TruncatedSeries.one((1, 2))


def test_check_cap():
    assert check_cap([3, 2], 2) == (3, 2)
    with pytest.raises(ValidationError):
        check_cap([3], 2)
    with pytest.raises(ValidationError):
        check_cap([-1], 1)
    with pytest.raises(CapacityError):
        check_cap([MAX_CAP + 1], 1)
