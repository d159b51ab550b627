"""Exact Tauberian constants and the certification harness."""
import math

import numpy as np
import pytest

from sbmlab.errors import BoundViolated, InvalidConstants
from sbmlab.tauberian import (
    laplace_from_cdf,
    lower_coeff_d1,
    upper_bound_U,
    verify_on_family,
)


def test_upper_bound_values():
    assert upper_bound_U(1.0, 1.0, 1.0) == pytest.approx(math.e, rel=1e-14)
    assert upper_bound_U(1.0, 1.0, 0.0) == 0.0
    assert upper_bound_U(3.0, 0.5, 0.25) == pytest.approx(
        3 * math.e * 0.5, rel=1e-14)


def test_d1_pinned_to_twelve_digits():
    # C1 = C2 = 1, p = 1: the max is 2 log 8 (> 2p), so d1 = 1/(4 log 2 * 3)
    d1, simplified = lower_coeff_d1(1.0, 1.0, 1.0, 0.0)
    independent = 0.5 / (2.0 * math.log(8.0))
    assert abs(d1 - independent) / independent < 1e-12
    # compact form (1/4) / log(4 e)
    indep2 = 0.25 / math.log(4 * math.e)
    assert abs(simplified - indep2) / indep2 < 1e-12


def test_d1_max_branches():
    # large under_lambda takes over the max
    d1, _ = lower_coeff_d1(1.0, 1.0, 1.0, 100.0)
    assert d1 == pytest.approx(0.5 / 100.0, rel=1e-12)
    # p large makes 2p the active branch when the log is small
    d1, simplified = lower_coeff_d1(1.0, 1.0, 3.0, 0.0)
    assert simplified is None


def test_d1_monotone_in_c2():
    vals = [lower_coeff_d1(1.0, c2, 1.0)[0] for c2 in (1.0, 2.0, 4.0)]
    assert vals[0] > vals[1] > vals[2]


def test_sandwich_ordering():
    d1, _ = lower_coeff_d1(1.0, 1.0, 0.5)
    for a in (0.1, 0.5, 1.0):
        assert d1 * a**0.5 <= upper_bound_U(1.0, 0.5, a)


def test_invalid_constants():
    with pytest.raises(InvalidConstants):
        lower_coeff_d1(2.0, 1.0, 1.0)
    with pytest.raises(InvalidConstants):
        lower_coeff_d1(-1.0, 1.0, 1.0)


def test_uniform_family():
    # U(a) = a on [0,1]: U_hat = (1 - e^{-lam})/lam <= 1/lam
    U = lambda a: np.clip(a, 0.0, 1.0)  # noqa: E731
    uhat = lambda lam: (1 - math.exp(-lam)) / lam  # noqa: E731
    assert laplace_from_cdf(U, 2.0) == pytest.approx(uhat(2.0), rel=1e-6)
    rep = verify_on_family(U, uhat, 1.0, np.geomspace(0.5, 64, 10),
                           np.linspace(0.05, 1.0, 20))
    assert rep["lower_applicable"]
    assert rep["C2"] <= 1.0 + 1e-12


@pytest.mark.parametrize("p", [0.5, 1.0])
def test_power_families(p):
    U = lambda a: np.clip(a, 0.0, 1.0) ** p  # noqa: E731
    uhat = lambda lam: laplace_from_cdf(U, lam)  # noqa: E731
    rep = verify_on_family(U, uhat, p, np.geomspace(1.0, 128, 12),
                           np.geomspace(0.01, 1.0, 25))
    assert rep["lower_applicable"]
    assert rep["d1"] > 0


def test_point_mass_lower_inapplicable():
    # U = 1_{a >= 1}: the transform e^{-lam} beats every power law
    U = lambda a: (np.asarray(a) >= 1.0).astype(float)  # noqa: E731
    uhat = lambda lam: math.exp(-lam)  # noqa: E731
    rep = verify_on_family(U, uhat, 1.0, np.geomspace(1.0, 60, 10),
                           np.linspace(0.1, 1.0, 10))
    assert not rep["lower_applicable"]
    assert rep["note"] == "lower bound inapplicable"


def test_bound_violated_signal():
    # a distribution function deliberately mismatched to its transform
    U = lambda a: np.clip(a, 0.0, 1.0) ** 0.2  # noqa: E731
    uhat = lambda lam: lam ** -1.0  # noqa: E731
    with pytest.raises(BoundViolated):
        verify_on_family(U, uhat, 1.0, np.geomspace(1.0, 64, 8),
                         np.linspace(0.01, 1.0, 30))
