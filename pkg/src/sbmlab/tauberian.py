"""Two-sided power bounds on a sub-probability distribution function from
power bounds on its Laplace transform (exact constants, no asymptotics).

With U a distribution function of a sub-probability on (0, infty) and
U_hat(lam) = int e^{-lam x} dU(x):

(a)  U_hat(lam) <= C2 lam^{-p} for all lam > 0
     implies  U(a) <= e C2 a^p for all a > 0;

(b)  adding U_hat(lam) >= C1 lam^{-p} for lam > lam_lower gives
     U(a) >= d1 a^p on [0, 1] with
     d1 = (C1/2) (2 log((2p/e)^p 4 e C2 / C1) v 2p v lam_lower)^{-p},
     simplifying to (C1/4) / log(4 e C2 / C1) when p <= 1, lam_lower <= 4.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import BoundViolated, InvalidConstants


def upper_bound_U(C2, p, a):
    """Pointwise upper bound e * C2 * a^p."""
    if a < 0:
        raise ValueError("a must be non-negative")
    return math.e * C2 * a ** p


def lower_coeff_d1(C1, C2, p, under_lambda=0.0):
    """(d1, simplified) lower-bound coefficients.

    simplified is None unless p <= 1 and under_lambda <= 4, where the
    compact form applies."""
    if C1 <= 0 or C2 <= 0 or p <= 0 or under_lambda < 0:
        raise InvalidConstants("need C1, C2, p > 0 and under_lambda >= 0")
    if C1 > C2:
        raise InvalidConstants(
            f"C1 = {C1} > C2 = {C2}: two-sided bounds inconsistent")
    arg = (2 * p / math.e) ** p * 4 * math.e * C2 / C1
    beta = max(2 * math.log(arg), 2 * p, under_lambda)
    d1 = (C1 / 2) * beta ** (-p)
    simplified = None
    if p <= 1 and under_lambda <= 4:
        simplified = (C1 / 4) / math.log(4 * math.e * C2 / C1)
    return d1, simplified


def laplace_from_cdf(U, lam, x_max=50.0, n=200_001):
    """Numerical U_hat(lam) = lam * int_0^inf e^{-lam x} U(x) dx for a
    sub-probability distribution function U with U(0) = 0."""
    hi = min(x_max, 60.0 / lam + 1.0)
    x = np.linspace(0.0, hi, n)
    return float(lam * np.trapezoid(np.exp(-lam * x) * U(x), x))


def verify_on_family(u_of_a, uhat_of_lam, p, lambda_grid, a_grid,
                     lower_floor=1e-6):
    """Fit the transform constants on lambda_grid and certify both bounds.

    C2 = sup lam^p U_hat(lam), C1 = inf lam^p U_hat(lam).  When C1/C2
    falls below lower_floor the transform decays faster than every power
    and the lower bound is reported inapplicable rather than checked.
    Raises BoundViolated with the offending (a, U(a)) otherwise.
    """
    lams = np.asarray(lambda_grid, dtype=float)
    scaled = np.array([lam ** p * uhat_of_lam(lam) for lam in lams])
    C2 = float(scaled.max())
    C1 = float(scaled.min())
    under_lambda = float(lams.min())
    report = {"C1": C1, "C2": C2, "p": p, "under_lambda": under_lambda,
              "lower_applicable": C1 > lower_floor * C2,
              "violations": []}
    if report["lower_applicable"]:
        d1, simplified = lower_coeff_d1(C1, C2, p, under_lambda)
        report["d1"] = d1
        report["d1_simplified"] = simplified
    else:
        report["d1"] = None
        report["note"] = "lower bound inapplicable"
    for a in np.asarray(a_grid, dtype=float):
        if not 0 < a <= 1:
            continue
        ua = float(u_of_a(a))
        hi = upper_bound_U(C2, p, a)
        if ua > hi * (1 + 1e-9):
            raise BoundViolated(f"U({a}) = {ua} exceeds upper bound {hi}")
        if report["lower_applicable"]:
            lo = report["d1"] * a ** p
            if ua < lo * (1 - 1e-9):
                raise BoundViolated(f"U({a}) = {ua} below lower bound {lo}")
    return report
