"""Shooting solver for the singular even profile on the half line.

The profile solves

    F''(y)/2 + y F'(y)/2 + F(y) - F(y)^2/2 = 0,   F'(0) = 0,
    F > 0,  F ~ c0 * y * exp(-y^2/2)  as  y -> infinity,

and is extended to the real line by symmetry.  The starting value F(0) is
found by bisection: trials that cross zero lie below the true value, trials
above it settle onto a slowly decaying algebraic tail and never cross.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BracketInvalid, InvalidStep, NonFinite

UNDERSHOOT = "undershoot"
OVERSHOOT = "overshoot"
CONVERGED = "converged"

# profile values below this level are replaced by the asymptotic tail form;
# past it the integrated trajectory is contaminated by the algebraic mode
TAIL_SWITCH_LEVEL = 1e-8

# F' turning positive only counts as a geometric event above this floor,
# where it cannot be tail round-off
GROWTH_GUARD = 1e-8


@dataclass
class ShotOutcome:
    classification: str
    crossing_y: float | None = None


@dataclass
class ProfileF:
    """Tabulated even profile on the half-line grid k*h, k = 0..K."""

    grid_step: float
    y_max: float
    values: np.ndarray
    values_prime: np.ndarray
    f0: float
    c0: float
    ode_residual_sup: float
    y_cut: float              # last grid point backed by integration
    tail_ratio: float         # F(y_cut) / (c0 * y_cut * exp(-y_cut^2/2))
    c0_matched: float = field(repr=False, default=0.0)

    def __post_init__(self):
        if not (1.0 < self.f0 < 2.0):
            raise BracketInvalid(f"F(0) = {self.f0} outside (1, 2)")
        if np.any(self.values <= 0):
            raise NonFinite("profile values must be strictly positive")
        if np.any(np.diff(self.values) >= 0):
            raise NonFinite("profile values must be strictly decreasing")

    @property
    def y_grid(self):
        return self.grid_step * np.arange(self.values.shape[0])

    def evaluate(self, x):
        """F at arbitrary real x (even extension, asymptotic tail beyond y_max)."""
        x = np.asarray(x, dtype=float)
        a = np.abs(x)
        inside = np.interp(np.minimum(a, self.y_max), self.y_grid, self.values)
        tail = self.c0_matched * a * np.exp(-a * a / 2)
        return np.where(a <= self.y_max, inside, tail)

    def evaluate_prime(self, x):
        """F' at arbitrary real x (odd extension)."""
        x = np.asarray(x, dtype=float)
        a = np.abs(x)
        inside = np.interp(np.minimum(a, self.y_max), self.y_grid, self.values_prime)
        tail = self.c0_matched * (1 - a * a) * np.exp(-a * a / 2)
        mag = np.where(a <= self.y_max, inside, tail)
        return np.where(x < 0, -mag, np.where(x > 0, mag, 0.0))


def integrate_shot(f0_trial, h, y_max):
    """Integrate one shooting trial with classical RK4.

    Returns (trajectory, outcome) where trajectory is an (n, 2) array of
    (F, F') rows, truncated at the classification event.
    """
    if h <= 0:
        raise InvalidStep(f"step h = {h} must be positive")
    if f0_trial <= 0:
        raise InvalidStep(f"f0_trial = {f0_trial} must be positive")
    n = int(round(y_max / h)) + 1
    traj = np.empty((n, 2))
    F = float(f0_trial)
    Fp = 0.0
    traj[0, 0] = F
    traj[0, 1] = Fp
    growth_cap = max(2.5, 1.25 * f0_trial)
    outcome = ShotOutcome(CONVERGED)
    i_end = n - 1
    for i in range(1, n):
        y = (i - 1) * h
        k1f = Fp
        k1p = -y * Fp - 2.0 * F + F * F
        ym = y + 0.5 * h
        f2 = F + 0.5 * h * k1f
        p2 = Fp + 0.5 * h * k1p
        k2f = p2
        k2p = -ym * p2 - 2.0 * f2 + f2 * f2
        f3 = F + 0.5 * h * k2f
        p3 = Fp + 0.5 * h * k2p
        k3f = p3
        k3p = -ym * p3 - 2.0 * f3 + f3 * f3
        ye = y + h
        f4 = F + h * k3f
        p4 = Fp + h * k3p
        k4f = p4
        k4p = -ye * p4 - 2.0 * f4 + f4 * f4
        F += h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f)
        Fp += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        traj[i, 0] = F
        traj[i, 1] = Fp
        if not (math.isfinite(F) and math.isfinite(Fp)):
            raise NonFinite(f"state overflow at y = {ye} for f0 = {f0_trial}")
        if F <= 0.0:
            outcome = ShotOutcome(UNDERSHOOT, crossing_y=ye)
            i_end = i
            break
        if (Fp > 0.0 and GROWTH_GUARD < F < 2.0) or F >= growth_cap:
            outcome = ShotOutcome(OVERSHOOT, crossing_y=ye)
            i_end = i
            break
    return traj[: i_end + 1], outcome


def solve_profile(bracket_tol=1e-12, h=1e-4, y_max=8.0, residual_tol=1e-5):
    """Bisect F(0) in [1, 2] and assemble the full tabulated profile.

    Beyond the point where the integrated values drop below
    TAIL_SWITCH_LEVEL, the table is continued with the asymptotic form
    c0 * y * exp(-y^2/2), continuity-matched at the switch point.
    """
    if bracket_tol <= 0:
        raise InvalidStep("bracket_tol must be positive")
    lo, hi = 1.0, 2.0
    out_lo = integrate_shot(lo, h, y_max)[1].classification
    out_hi = integrate_shot(hi, h, y_max)[1].classification
    if out_lo != UNDERSHOOT or out_hi == UNDERSHOOT:
        raise BracketInvalid(
            f"bracket endpoints classify ({out_lo}, {out_hi}); "
            "expected (undershoot, non-undershoot)")
    while hi - lo > bracket_tol:
        mid = 0.5 * (lo + hi)
        if integrate_shot(mid, h, y_max)[1].classification == UNDERSHOOT:
            lo = mid
        else:
            hi = mid
    f0 = 0.5 * (lo + hi)

    traj, outcome = integrate_shot(f0, h, y_max)
    below = traj[:, 0] < TAIL_SWITCH_LEVEL
    if not below.any():
        # midpoint landed on the far undershoot side; use the safe endpoint
        traj, outcome = integrate_shot(hi, h, y_max)
        below = traj[:, 0] < TAIL_SWITCH_LEVEL
        if not below.any():
            raise BracketInvalid("trajectory never reached the tail-switch level")
    j_cut = int(np.argmax(below))
    y_cut = j_cut * h
    F_cut = traj[j_cut, 0]
    Fp_cut = traj[j_cut, 1]
    # c0 from the integral identity for F' evaluated on the pure Gaussian
    # mode, F' = c0 (1 - y^2) exp(-y^2/2); the plain -e^{y^2/2} F'/y^2 form
    # carries a 1/y^2 bias that is visible at y_cut ~ 6.4
    c0 = -math.exp(y_cut * y_cut / 2) * Fp_cut / (y_cut * y_cut - 1.0)
    c0_matched = F_cut / (y_cut * math.exp(-y_cut * y_cut / 2))
    tail_ratio = c0_matched / c0

    n = int(round(y_max / h)) + 1
    y = h * np.arange(n)
    values = np.empty(n)
    primes = np.empty(n)
    values[: j_cut + 1] = traj[: j_cut + 1, 0]
    primes[: j_cut + 1] = traj[: j_cut + 1, 1]
    yt = y[j_cut + 1 :]
    values[j_cut + 1 :] = c0_matched * yt * np.exp(-yt * yt / 2)
    primes[j_cut + 1 :] = c0_matched * (1 - yt * yt) * np.exp(-yt * yt / 2)

    # discrete ODE residual on the integrated segment (central differences)
    seg = values[: j_cut + 1]
    d2 = (seg[2:] - 2 * seg[1:-1] + seg[:-2]) / (h * h)
    d1 = (seg[2:] - seg[:-2]) / (2 * h)
    yy = y[1:j_cut]
    res = d2 / 2 + yy * d1 / 2 + seg[1:-1] - seg[1:-1] ** 2 / 2
    residual_sup = float(np.abs(res).max())
    if residual_sup > residual_tol:
        raise NonFinite(
            f"ODE residual {residual_sup:.2e} exceeds tolerance {residual_tol:.2e}")

    return ProfileF(
        grid_step=h,
        y_max=y_max,
        values=values,
        values_prime=primes,
        f0=f0,
        c0=c0,
        ode_residual_sup=residual_sup,
        y_cut=y_cut,
        tail_ratio=tail_ratio,
        c0_matched=c0_matched,
    )


def profile_identities(prof: ProfileF, fprime_pairs=None):
    """Certify the integral and tail identities of the profile.

    Returns a dict with the full-line integrals of F and F^2 (trapezoid on
    the integrated segment plus closed-form tail), the tail ratio, the
    discrete ODE residual, and the worst mismatch in the integral formula

        F'(y) = e^{-y^2/2 + x0^2/2} F'(x0)
                + int_{x0}^{y} e^{-y^2/2 + z^2/2} F(z)(F(z) - 2) dz.
    """
    h = prof.grid_step
    y = prof.y_grid
    j_cut = int(round(prof.y_cut / h))
    yc = prof.y_cut
    c0m = prof.c0_matched
    seg_y = y[: j_cut + 1]
    seg_F = prof.values[: j_cut + 1]
    # tail integrals: int_yc^inf c y e^{-y^2/2} dy = c e^{-yc^2/2};
    # int_yc^inf (c y e^{-y^2/2})^2 dy = c^2 (yc e^{-yc^2}/2 + sqrt(pi)/4 erfc(yc))
    tail_F = c0m * math.exp(-yc * yc / 2)
    tail_F2 = c0m * c0m * (yc * math.exp(-yc * yc) / 2
                           + math.sqrt(math.pi) / 4 * math.erfc(yc))
    int_F = 2 * (np.trapezoid(seg_F, seg_y) + tail_F)
    int_F2 = 2 * (np.trapezoid(seg_F**2, seg_y) + tail_F2)

    if fprime_pairs is None:
        fprime_pairs = [(0.0, 0.0), (0.0, 1.0), (0.0, 2.0), (1.0, 1.0),
                        (1.0, 3.0), (2.0, 4.0)]
    worst = 0.0
    for x0, yq in fprime_pairs:
        i0 = int(round(x0 / h))
        i1 = int(round(yq / h))
        if i1 < i0:
            i0, i1 = i1, i0
        zz = y[i0 : i1 + 1]
        Fz = prof.values[i0 : i1 + 1]
        yv = y[i1]
        # e^{-y^2/2 + z^2/2} with z <= y keeps the exponent non-positive
        kernel = np.exp((zz - yv) * (zz + yv) / 2)
        integral = np.trapezoid(kernel * Fz * (Fz - 2.0), zz)
        lhs = prof.values_prime[i1]
        rhs = kernel[0] * prof.values_prime[i0] + integral
        worst = max(worst, abs(lhs - rhs))

    return {
        "int_F": float(int_F),
        "int_F2": float(int_F2),
        "tail_ratio": float(prof.tail_ratio),
        "residual_sup": float(prof.ode_residual_sup),
        "fprime_formula_err": float(worst),
    }
