"""Box-counting dimension, Riesz energy/capacity, and the log-corrected
subordinator whose range carries the lower-bound dimension argument."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import CoincidentPoints, DegenerateSet, InversionFailure


@dataclass
class PointSet:
    points: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.sort(np.asarray(self.points, dtype=float))
        if not np.all(np.isfinite(self.points)):
            raise ValueError("points must be finite")

    def __len__(self):
        return self.points.shape[0]


def box_dimension(points, scale_ladder):
    """Least-squares slope of log N(eps) against log(1/eps), where N(eps)
    counts occupied intervals [i eps, (i+1) eps)."""
    pts = points.points if isinstance(points, PointSet) else np.asarray(points, float)
    if pts.size == 0:
        raise DegenerateSet("empty point set")
    scales = np.asarray(sorted(scale_ladder, reverse=True), dtype=float)
    if scales.size < 2:
        raise ValueError("need at least two scales")
    if pts.size == 1:
        return {"slope": 0.0, "scales": scales.tolist(),
                "counts": [1] * scales.size}
    if pts.max() - pts.min() <= 0:
        raise DegenerateSet("all points coincide")
    counts = np.array([np.unique(np.floor(pts / eps + 1e-9)).size
                       for eps in scales])
    slope = float(np.polyfit(np.log(1.0 / scales), np.log(counts), 1)[0])
    return {"slope": slope, "scales": scales.tolist(), "counts": counts.tolist()}


def box_counts(points, scale_ladder):
    """N(eps) per scale (for pooling across replicates before the fit)."""
    pts = points.points if isinstance(points, PointSet) else np.asarray(points, float)
    return np.array([np.unique(np.floor(pts / eps + 1e-9)).size
                     for eps in np.asarray(scale_ladder, float)])


def riesz_energy(points, beta, block=1024):
    """(1/(N(N-1))) sum_{i != j} |x_i - x_j|^{-beta}; capacity proxy is the
    reciprocal.  Pairs are accumulated in row blocks, diagonal excluded."""
    pts = points.points if isinstance(points, PointSet) else np.asarray(points, float)
    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    n = pts.shape[0]
    if n < 2:
        raise DegenerateSet("need at least two points")
    total = 0.0
    for start in range(0, n, block):
        rows = pts[start : start + block, None]
        d = np.abs(rows - pts[None, :])
        ii = np.arange(start, min(start + block, n))
        d[ii - start, ii] = np.inf  # exclude self-pairs
        if np.any(d == 0):
            raise CoincidentPoints("coincident points give infinite energy")
        if beta == 0.5:
            total += float(np.sum(1.0 / np.sqrt(d)))
        else:
            total += float(np.sum(d ** -beta))
    return total / (n * (n - 1))


def riesz_capacity(points, beta, block=1024):
    return 1.0 / riesz_energy(points, beta, block=block)


def cantor_points(depth):
    """Left endpoints of the level-`depth` middle-thirds construction."""
    pts = np.array([0.0])
    w = 1.0
    for _ in range(depth):
        w /= 3.0
        pts = np.concatenate([pts, pts + 2 * w])
    return PointSet(np.sort(pts), {"source": "cantor", "depth": depth})


# ------------------------------------------------------------- subordinator --

def levy_tail(x, alpha, pure_stable=False):
    """H(x) = nu([x, infty)): x^{-alpha} log(1/x + 1)^2, or plain x^{-alpha}."""
    if pure_stable:
        return x ** -alpha
    return x ** -alpha * np.log1p(1.0 / x) ** 2


def _invert_tail(ys, alpha, floor, pure_stable):
    """Solve H(x) = y elementwise for x >= floor (bracketed bisection)."""
    ys = np.asarray(ys, dtype=float)
    if pure_stable:
        return ys ** (-1.0 / alpha)
    f_lo = float(levy_tail(floor, alpha))
    if np.any(ys > f_lo * (1 + 1e-12)):
        raise InversionFailure(f"target above H(floor) = {f_lo}")
    lo = np.full(ys.shape, floor)
    hi = np.full(ys.shape, max(2 * floor, 1.0))
    for _ in range(600):
        unbr = levy_tail(hi, alpha) > ys
        if not unbr.any():
            break
        hi[unbr] *= 4
        if hi.max() > 1e300:
            raise InversionFailure("tail inversion failed to bracket")
    else:  # pragma: no cover
        raise InversionFailure("tail inversion failed to bracket")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        above = levy_tail(mid, alpha) > ys
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return 0.5 * (lo + hi)


def subordinator_range(alpha, t_horizon=1.0, jump_floor=1e-6, seed=0,
                       pure_stable=False):
    """Range points {Z_s} of the subordinator with Levy tail H.

    Jumps above jump_floor arrive as a Poisson process of intensity
    H(jump_floor) with sizes drawn by inverse-tail sampling; small jumps
    enter through their compensator mean drift."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    rng = np.random.default_rng(np.random.Philox(key=seed))
    H_floor = float(levy_tail(jump_floor, alpha, pure_stable))
    n = rng.poisson(t_horizon * H_floor)
    times = np.sort(rng.uniform(0.0, t_horizon, size=n))
    u = rng.uniform(0.0, 1.0, size=n)
    sizes = _invert_tail(H_floor * u, alpha, jump_floor, pure_stable)
    # E[sum of jumps below the floor] per unit time:
    # int_0^b x dnu(x) = int_0^b H(x) dx - b H(b)
    integral, _ = quad(lambda x: levy_tail(x, alpha, pure_stable), 0.0,
                       jump_floor, limit=200)
    drift = integral - jump_floor * H_floor
    z = np.cumsum(sizes) + drift * times
    return PointSet(z, {"source": "subordinator", "alpha": alpha,
                        "jump_floor": jump_floor, "t_horizon": t_horizon,
                        "n_jumps": int(n), "poisson_mean": t_horizon * H_floor,
                        "drift": drift, "seed": seed,
                        "pure_stable": pure_stable})
