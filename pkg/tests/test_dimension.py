"""Box dimension, Riesz energy, subordinator sampler oracles."""
import math

import numpy as np
import pytest

from sbmlab.dimension import (
    PointSet,
    box_dimension,
    cantor_points,
    levy_tail,
    riesz_energy,
    subordinator_range,
)
from sbmlab.errors import CoincidentPoints, DegenerateSet, InversionFailure

ALPHA = 0.7762993  # 2*lam0 - 1 at the computed lead eigenvalue


def test_singleton_slope_zero():
    rep = box_dimension(np.array([0.37]), [0.5, 0.25, 0.125])
    assert rep["slope"] == 0.0
    assert rep["counts"] == [1, 1, 1]


def test_coincident_points_degenerate():
    with pytest.raises(DegenerateSet):
        box_dimension(np.array([1.0, 1.0, 1.0]), [0.5, 0.25])
    with pytest.raises(DegenerateSet):
        box_dimension(np.array([]), [0.5, 0.25])


def test_uniform_sample_dimension_one():
    rng = np.random.default_rng(1)
    pts = rng.uniform(0, 1, 10**6)
    rep = box_dimension(pts, 2.0 ** -np.arange(4, 13))
    assert abs(rep["slope"] - 1.0) < 0.05


def test_cantor_dimension():
    pts = cantor_points(12)
    # the triadic ladder matches the set's self-similarity scales exactly
    rep = box_dimension(pts, 3.0 ** -np.arange(1, 9))
    assert abs(rep["slope"] - math.log(2) / math.log(3)) < 0.03
    assert rep["counts"] == [2 ** k for k in range(1, 9)]


def test_two_point_energy_exact():
    for beta in (0.3, 0.5, 0.9):
        assert riesz_energy(np.array([0.0, 1.0]), beta) == pytest.approx(1.0)


def test_energy_translation_and_scaling():
    rng = np.random.default_rng(3)
    pts = rng.uniform(0, 1, 400)
    beta = 0.5
    e = riesz_energy(pts, beta)
    assert riesz_energy(pts + 17.3, beta) == pytest.approx(e, rel=1e-12)
    c = 2.5
    assert riesz_energy(c * pts, beta) == pytest.approx(e * c**-beta,
                                                        rel=1e-12)


def test_energy_guards():
    with pytest.raises(CoincidentPoints):
        riesz_energy(np.array([0.0, 0.0, 1.0]), 0.5)
    with pytest.raises(ValueError):
        riesz_energy(np.array([0.0, 1.0]), 1.5)
    with pytest.raises(DegenerateSet):
        riesz_energy(np.array([1.0]), 0.5)


def test_uniform_grid_energy_closed_form():
    # int int |x-y|^{-1/2} dx dy over the unit square = 8/3
    n = 4096
    pts = (np.arange(n) + 0.5) / n
    e = riesz_energy(pts, 0.5)
    assert abs(e - 8 / 3) / (8 / 3) < 0.02


def test_subordinator_range_monotone():
    ps = subordinator_range(0.5, jump_floor=1e-3, seed=2)
    assert np.all(np.diff(ps.points) > 0)
    assert ps.meta["n_jumps"] == len(ps)


def test_subordinator_jump_counts_poisson():
    counts = [subordinator_range(0.5, jump_floor=1e-2, seed=s).meta["n_jumps"]
              for s in range(60)]
    mean_target = levy_tail(1e-2, 0.5)
    z = (np.mean(counts) - mean_target) / math.sqrt(mean_target / 60)
    assert abs(z) < 3.5


def test_inversion_failure():
    with pytest.raises(InversionFailure):
        from sbmlab.dimension import _invert_tail
        _invert_tail(np.array([1e9]), 0.5, 1e-2, False)


def test_stable_oracle_settles_orientation():
    # brute-force pure-stable subordinators: the range has box dimension
    # alpha (not 1 - alpha), at alpha = 1/2 and at alpha = 2*lam0 - 1
    ps = subordinator_range(0.5, jump_floor=1e-7, seed=4, pure_stable=True)
    span = ps.points.max() - ps.points.min()
    rep = box_dimension(ps, span * 2.0 ** -np.arange(3, 11))
    assert abs(rep["slope"] - 0.5) < 0.1
    ps = subordinator_range(ALPHA, jump_floor=1e-6, seed=4, pure_stable=True)
    span = ps.points.max() - ps.points.min()
    rep = box_dimension(ps, span * 2.0 ** -np.arange(3, 11))
    assert abs(rep["slope"] - ALPHA) < 0.1


def test_log_corrected_range_energy_stable():
    # capacity positivity: the range energy at beta = alpha stays finite
    # and stable as the jump floor deepens
    vals = []
    for floor in (1e-3, 3e-4, 1e-4):
        ps = subordinator_range(ALPHA, jump_floor=floor, seed=4)
        sub = ps.points[:: max(1, len(ps) // 2000)]
        vals.append(riesz_energy(PointSet(sub), ALPHA))
    assert max(vals) / min(vals) < 1.25
    # the box-count slope of the log-corrected range is inflated toward 1
    # by the squared logarithm at reachable scales; only the pure-stable
    # oracle above reads the clean exponent
    ps = subordinator_range(ALPHA, jump_floor=1e-4, seed=4)
    span = ps.points.max() - ps.points.min()
    rep = box_dimension(ps, span * 2.0 ** -np.arange(6, 14))
    assert ALPHA < rep["slope"] < 1.05
