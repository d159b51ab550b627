"""Shared fixtures: the expensive objects are built once per session."""
import os

import numpy as np
import pytest

from sbmlab import eigensystem, solve_profile, v_infinity

# reference values pinned by the two independent profile solvers (shooting
# and the scaled semilinear flow); see tests below that re-derive them
F0_REF = 1.379687221852
C0_REF = 1.1577694
LAM0_REF = 0.8881496


def fast_mode():
    return os.environ.get("SBMLAB_FAST", "") not in ("", "0")


@pytest.fixture(scope="session")
def prof():
    return solve_profile(h=1e-3)


@pytest.fixture(scope="session")
def vinf(prof):
    return v_infinity(1.0, tol=1e-6)


@pytest.fixture(scope="session")
def sys_zero():
    return eigensystem(0.0, 10, phi_tag="zero")


@pytest.fixture(scope="session")
def sys_half(prof):
    return eigensystem(lambda x: 0.5 * prof.evaluate(x), 10, phi_tag="half-f")


@pytest.fixture(scope="session")
def sys_full(prof):
    return eigensystem(lambda x: prof.evaluate(x), 10, phi_tag="full-f")


@pytest.fixture(scope="session")
def lam0(sys_full):
    return float(sys_full.eigenvalues[0])


@pytest.fixture(scope="session")
def fields_1e4():
    from sbmlab import simulate_fields
    return simulate_fields("delta:0", 1.0, 10_000, 400, 11)


@pytest.fixture(scope="session")
def xs_compact():
    return np.linspace(-4.0, 4.0, 401)
