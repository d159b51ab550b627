"""Shooting solver: classification, bisection, and the profile identities."""
import numpy as np
import pytest

from sbmlab import integrate_shot, profile_identities, solve_profile
from sbmlab.errors import BracketInvalid, InvalidStep
from sbmlab.profile import CONVERGED, OVERSHOOT, UNDERSHOOT

from conftest import C0_REF, F0_REF


def test_constant_two_is_exact_equilibrium():
    # F == 2 solves the equation exactly; no event can fire
    traj, out = integrate_shot(2.0, 1e-3, 4.0)
    assert out.classification == CONVERGED
    assert np.all(traj[:, 0] == 2.0)
    assert np.all(traj[:, 1] == 0.0)


@pytest.mark.parametrize("f0", [0.5, 1.0])
def test_low_starts_undershoot(f0):
    traj, out = integrate_shot(f0, 1e-3, 8.0)
    assert out.classification == UNDERSHOOT
    assert out.crossing_y is not None and 0 < out.crossing_y < 8.0
    assert traj[-1, 0] <= 0.0


def test_above_two_overshoots():
    _, out = integrate_shot(2.5, 1e-3, 8.0)
    assert out.classification == OVERSHOOT


def test_step_validation():
    with pytest.raises(InvalidStep):
        integrate_shot(1.5, -1e-3, 8.0)
    with pytest.raises(InvalidStep):
        integrate_shot(0.0, 1e-3, 8.0)
    with pytest.raises(InvalidStep):
        solve_profile(bracket_tol=0.0)


def test_bracket_endpoints(prof):
    # endpoints 1 and 2 classify on opposite sides of the bisection
    assert integrate_shot(1.0, 1e-3, 8.0)[1].classification == UNDERSHOOT
    assert integrate_shot(2.0, 1e-3, 8.0)[1].classification != UNDERSHOOT


def test_bracket_invalid_when_window_too_short():
    # by y_max = 0.5 the f0 = 1 trajectory has not crossed yet
    with pytest.raises(BracketInvalid):
        solve_profile(h=1e-3, y_max=0.5)


def test_solved_profile_basics(prof):
    assert 1.0 < prof.f0 < 2.0
    assert abs(prof.f0 - F0_REF) < 2e-8
    assert abs(prof.c0 - C0_REF) < 5e-6
    assert abs(prof.tail_ratio - 1.0) < 1e-2   # asymptotic regime reached
    assert prof.ode_residual_sup < 1e-5
    # strict monotone decrease and positivity over the whole table
    assert np.all(prof.values > 0)
    assert np.all(np.diff(prof.values) < 0)


def test_step_halving_is_stable():
    a = solve_profile(h=2e-3, bracket_tol=1e-12)
    b = solve_profile(h=1e-3, bracket_tol=1e-12)
    assert abs(a.f0 - b.f0) < 1e-9


def test_identities(prof):
    rep = profile_identities(prof)
    assert abs(rep["int_F"] - rep["int_F2"]) / rep["int_F"] < 1e-4
    assert abs(rep["tail_ratio"] - 1.0) < 1e-2
    assert rep["fprime_formula_err"] < 1e-5
    assert rep["residual_sup"] < 1e-5


def test_fprime_formula_identity_case(prof):
    # x0 = y makes the integral empty and the kernel 1: the identity is exact
    rep = profile_identities(prof, fprime_pairs=[(1.0, 1.0)])
    assert rep["fprime_formula_err"] == 0.0


def test_even_extension(prof):
    xs = np.array([-3.0, -1.2, 0.0, 1.2, 3.0])
    F = prof.evaluate(xs)
    assert np.allclose(F, F[::-1])
    Fp = prof.evaluate_prime(xs)
    assert np.allclose(Fp, -Fp[::-1])
    assert prof.evaluate_prime(0.0) == 0.0
    # beyond y_max the Gaussian tail takes over smoothly
    inside = prof.evaluate(prof.y_max - 1e-6)
    outside = prof.evaluate(prof.y_max + 1e-6)
    assert 0 < outside < inside


def test_pde_oracle_cross_check(prof, vinf, xs_compact):
    # the scaled semilinear flow computes the same profile independently
    err = np.abs(prof.evaluate(xs_compact) - vinf.at(xs_compact)).max()
    assert err < 1e-3
    assert abs(prof.f0 - vinf.at(0.0)) < 1e-4
