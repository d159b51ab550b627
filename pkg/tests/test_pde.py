"""Semilinear solver: exact values, comparison, scaling, rate readouts."""
import math

import numpy as np
import pytest

from sbmlab import evolve, h_u, rate_experiment, tilde_v, v_infinity, v_lambda
from sbmlab.errors import DomainTooSmall, LadderTooShort, NoConvergence

from conftest import F0_REF


@pytest.fixture(scope="module")
def v2():
    return v_lambda(2.0, 1.0)


def test_constant_data_closed_form():
    # flat data evolves by the logistic flow alone: V_s(r) = 2r/(2+rs)
    x = np.linspace(-10, 10, 801)
    sol = evolve(np.full(x.shape, 2.0), x, 1.0, 1e-3)
    assert np.abs(sol.values - 1.0).max() < 1e-10
    sol = evolve(np.full(x.shape, 5.0), x, 0.4, 1e-3)
    assert np.abs(sol.values - 5.0 / (1 + 5.0 * 0.4 / 2)).max() < 1e-10


def test_zero_data_fixed_point():
    x = np.linspace(-10, 10, 401)
    sol = evolve(np.zeros_like(x), x, 1.0, 1e-2)
    assert np.abs(sol.values).max() == 0.0


def test_heat_semigroup_domination(v2):
    # absorption only removes mass: V(phi)(t,.) <= P_t phi
    eps = v2.init_tag["eps"]
    x = v2.x_grid
    heat = 2.0 * np.exp(-x * x / (2 * (1.0 + eps))) / math.sqrt(
        2 * math.pi * (1.0 + eps))
    assert np.all(v2.values <= heat + 1e-10)


def test_comparison_principle():
    x = np.linspace(-10, 10, 2001)
    lo = np.exp(-x * x / 2)
    hi = 2.5 * np.exp(-x * x / 2)
    sa = evolve(lo, x, 0.5, 1e-3)
    sb = evolve(hi, x, 0.5, 1e-3)
    assert np.all(sb.values >= sa.values - 1e-12)


def test_v_lambda_monotone_in_lambda(v2):
    v1 = v_lambda(1.0, 1.0)
    xs = np.linspace(-3, 3, 61)
    assert np.all(v2.at(xs) >= v1.at(xs) - 1e-10)


def test_frames_agree(v2):
    # x-frame mollified-delta solve against the scaled-flow readout
    # V^2(1, x) = W(2 log 2, x).  The mollified start skips the early
    # absorption of the true delta solution, a bias of order sqrt(eps);
    # halving eps and extrapolating in sqrt(eps) removes it.
    xs = np.linspace(-3, 3, 121)
    w = h_u(4.0, xs)[0]
    assert np.abs(v2.at(xs) - w).max() < 4e-3
    vb = v_lambda(2.0, 1.0, eps=5e-5)
    r2 = math.sqrt(2)
    extrap = (r2 * vb.at(xs) - v2.at(xs)) / (r2 - 1)
    assert np.abs(extrap - w).max() < 3e-4


def test_scaling_law():
    # V^{lam r}(s, x) = lam^2 V^r(lam^2 s, lam x) at (r, lam, s) = (1, 2, 1/4);
    # compared on |x| <= 2 sqrt(s) where the solution is order one
    s = 0.25
    lhs = v_lambda(2.0, s)
    rhs = v_lambda(1.0, 1.0, eps=4e-4)
    xs = np.linspace(-2 * math.sqrt(s), 2 * math.sqrt(s), 81)
    rel = np.abs(lhs.at(xs) - 4 * rhs.at(2 * xs)) / np.abs(4 * rhs.at(2 * xs))
    assert rel.max() < 3e-3


def test_v_infinity_bound_and_monotonicity(vinf):
    # V^inf(1, .) <= 2/t = 2
    assert vinf.values.max() <= 2.0
    assert abs(vinf.at(0.0) - F0_REF) < 1e-4
    v8 = v_lambda(8.0, 1.0)
    xs = np.linspace(-3, 3, 61)
    assert np.all(vinf.at(xs) >= v8.at(xs) - 1e-10)


def test_v_infinity_needs_reachable_tolerance():
    with pytest.raises(NoConvergence):
        v_infinity(1.0, tol=1e-9, tau_cap=12.0)


def test_h_u_monotone_to_profile():
    us = np.array([4.0, 16.0, 100.0, 10_000.0])
    vals = h_u(us, np.array([0.0, 1.0]))
    assert np.all(np.diff(vals[:, 0]) > 0)
    assert np.all(np.diff(vals[:, 1]) > 0)
    # remaining gap at u = 1e4 is the genuine lambda^{-(2 lam0 - 1)} rate,
    # about 0.08 at lambda = sqrt(u) = 100
    assert abs(vals[-1, 0] - F0_REF) < 0.1


def test_h_u_identity_cross_frame():
    # u V^1(u, sqrt(u) x) = V^{sqrt u}(1, x) at u = 4
    u = 4.0
    xs = np.linspace(-2, 2, 81)
    rhs = h_u(u, xs)[0]
    sol = v_lambda(1.0, u, eps=4e-4)
    lhs = u * sol.at(math.sqrt(u) * xs)
    assert np.abs(lhs - rhs).max() < 2e-3


def test_expbnds_sandwich(v2, vinf):
    xs = np.linspace(-3, 3, 121)
    vl = v2.at(xs)
    vi = vinf.at(xs)
    gap = np.exp(-vl) - np.exp(-vi)
    diff = vi - vl
    assert np.all(gap <= diff + 1e-12)
    assert np.all(diff <= math.exp(2.0) * gap + 1e-12)


def test_strict_positivity_of_rate_difference(v2, vinf):
    xs = np.linspace(-5, 5, 201)
    assert np.all(vinf.at(xs) - v2.at(xs) > 0)


def test_tilde_v_bound_and_limit():
    sol = tilde_v(1.0, 1.0, 1.0)
    assert sol.values.max() <= 1.0 / (1 + 0.5) + 1e-9
    # b -> infinity: monotone with shrinking increments (pointwise limit)
    vals = [tilde_v(b, 1.0, 1.0).at(0.25) for b in (4.0, 16.0, 64.0)]
    assert vals[0] < vals[1] < vals[2]
    assert vals[2] - vals[1] < vals[1] - vals[0]


def test_tilde_v_scaling():
    # V~^{b,eps}(s, x) = r^2 V~^{b/r^2, eps r}(r^2 s, r x), r = 2
    lhs = tilde_v(1.0, 0.5, 0.5)
    rhs = tilde_v(0.25, 1.0, 2.0)
    xs = np.linspace(-1.5, 2.0, 71)
    a = lhs.at(xs)
    b = 4 * rhs.at(2 * xs)
    assert np.abs(a - b).max() / np.abs(a).max() < 2e-3


def test_time_step_halving(v2):
    finer = v_lambda(2.0, 1.0, dt=1.25e-4)
    assert abs(finer.at(0.0) - v2.at(0.0)) < 2e-4


def test_domain_too_small():
    x = np.linspace(-2, 2, 201)
    with pytest.raises(DomainTooSmall):
        evolve(np.exp(-x * x / 2), x, 1.0, 1e-2)


def test_negative_data_rejected():
    x = np.linspace(-5, 5, 101)
    with pytest.raises(ValueError):
        evolve(-np.ones_like(x), x, 0.1, 1e-2)


def test_rate_experiment_contract(lam0):
    with pytest.raises(LadderTooShort):
        rate_experiment(1.0, [16, 32, 64])
    with pytest.raises(ValueError):
        rate_experiment(1.0, [0.5, 1, 2, 4])
    table, fits = rate_experiment(1.0, [16, 32, 64, 128, 256],
                                  tau_limit=40.0)
    D = table.columns["D"]
    assert np.all(D > 0)
    assert np.all(np.diff(D) < 0)
    assert fits["slope"] < 0
    # t-exponent at fixed lambda tracks -(1/2 + lam0)
    assert abs(fits["t_exponent"] + 0.5 + lam0) < 0.05


def test_v_infinity_self_similar_interface(vinf):
    # V^inf(4, x) must come out as the t=1 limit profile rescaled
    # (interface coherence; both readouts share one scaled-flow limit)
    v4 = v_infinity(4.0, tol=1e-6)
    xs = np.linspace(-4, 4, 81)
    assert np.abs(v4.at(xs) - vinf.at(xs / 2) / 4).max() < 1e-6
