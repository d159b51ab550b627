"""Eigen-decomposition of the Ornstein-Uhlenbeck generator with killing.

The generator L h = h''/2 - (x/2) h' acts on L^2(m), m the standard
Gaussian.  Killing by a non-negative potential phi gives L - phi, which the
unitary map  f |-> e^{-x^2/4} (2 pi)^{-1/4} f  carries to the Schrodinger
operator  -g''/2 + (x^2/8 - 1/4 + phi) g  on L^2(dx).  That operator is
discretized by second-order central differences with Dirichlet walls at
+-L and diagonalized with LAPACK's tridiagonal bisection/inverse-iteration
solver.  Eigenvalues optionally get one Richardson step over (h, h/2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import BoxTooSmall, ConvergenceFailure, DivisionNearZero, NegativeKilling

PHI_ZERO = "zero"
PHI_HALF_F = "half-f"
PHI_FULL_F = "full-f"
PHI_CUSTOM = "custom"


@dataclass
class GridFunction:
    x_grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.x_grid = np.asarray(self.x_grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.x_grid.shape != self.values.shape:
            raise ValueError("grid and values must have matching shapes")


def symmetric_grid(L, h):
    n = int(round(2 * L / h)) + 1
    return -L + h * np.arange(n)


def grid_function(f, L, h):
    """Tabulate a callable (or scalar) on the symmetric grid."""
    x = symmetric_grid(L, h)
    if np.isscalar(f):
        return GridFunction(x, np.full(x.shape, float(f)))
    return GridFunction(x, np.asarray(f(x), dtype=float))


def schrodinger_potential(phi: GridFunction) -> GridFunction:
    """q(x) = x^2/8 - 1/4 + phi(x), the transformed potential."""
    if np.any(phi.values < 0):
        raise NegativeKilling("killing function must be non-negative")
    x = phi.x_grid
    return GridFunction(x, x * x / 8 - 0.25 + phi.values)


@dataclass
class SpectralSystem:
    phi_tag: str
    domain_L: float
    grid_step: float
    x_grid: np.ndarray
    eigenvalues: np.ndarray          # ascending, possibly Richardson-refined
    eigenfunctions_psi: np.ndarray   # row n = psi_n on x_grid, L2(m)-normalized
    m_weights: np.ndarray            # trapezoid weights against the Gaussian m
    phi_values: np.ndarray
    theta: float                     # int psi_0 dm
    psi_integrals: np.ndarray        # int psi_n dm for each n

    @property
    def n_max(self):
        return self.eigenvalues.shape[0] - 1

    def integrate_m(self, values):
        return float(np.dot(self.m_weights, values))

    def psi_at(self, n, x):
        return np.interp(x, self.x_grid, self.eigenfunctions_psi[n])


def _solve_grid(phi_vals, L, h, n_max):
    x = symmetric_grid(L, h)
    if phi_vals.shape != x.shape:
        raise ValueError("phi tabulated on the wrong grid")
    q = schrodinger_potential(GridFunction(x, phi_vals)).values
    d = 1.0 / (h * h) + q[1:-1]
    e = np.full(x.shape[0] - 3, -0.5 / (h * h))
    try:
        lam, g = eigh_tridiagonal(d, e, select="i", select_range=(0, n_max))
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise ConvergenceFailure(str(exc)) from exc
    # Dirichlet walls: embed interior eigenvectors, normalize in L2(dx)
    G = np.zeros((x.shape[0], n_max + 1))
    G[1:-1, :] = g / math.sqrt(h)
    # boundary amplitude of the highest requested mode must be spectrally small
    edge = max(np.abs(G[1:4, n_max]).max(), np.abs(G[-4:-1, n_max]).max())
    if edge > 1e-5 * np.abs(G[:, n_max]).max():
        raise BoxTooSmall(
            f"mode {n_max} has boundary amplitude {edge:.2e}; increase L")
    psi = (np.exp(x * x / 4)[:, None] * (2 * math.pi) ** 0.25) * G
    for k in range(n_max + 1):
        j = int(np.argmax(np.abs(G[:, k])))
        if G[j, k] < 0:
            psi[:, k] = -psi[:, k]
    return x, lam, psi.T


def _m_weights(x, h):
    w = h * np.exp(-x * x / 2) / math.sqrt(2 * math.pi)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def eigensystem(phi, n_max, L=12.0, h=1 / 400, richardson=True,
                phi_tag=PHI_CUSTOM) -> SpectralSystem:
    """Lowest n_max+1 eigenpairs of -(L - phi) on L^2(m).

    phi may be a callable, a scalar, or a GridFunction on the (L, h) grid.
    With richardson=True the eigenvalues are extrapolated over (h, h/2) and
    the eigenfunctions come from the h/2 grid.
    """
    def tab(hh):
        x = symmetric_grid(L, hh)
        if isinstance(phi, GridFunction):
            if phi.x_grid.shape == x.shape and np.allclose(phi.x_grid, x):
                return phi.values
            return np.interp(x, phi.x_grid, phi.values)
        if np.isscalar(phi):
            return np.full(x.shape, float(phi))
        return np.asarray(phi(x), dtype=float)

    x1, lam1, psi1 = _solve_grid(tab(h), L, h, n_max)
    if richardson:
        x2, lam2, psi2 = _solve_grid(tab(h / 2), L, h / 2, n_max)
        lam = (4 * lam2 - lam1) / 3
        x, psi, h_used = x2, psi2, h / 2
    else:
        lam, x, psi, h_used = lam1, x1, psi1, h
    w = _m_weights(x, h_used)
    ints = psi @ w
    theta = float(ints[0])
    if np.any(np.diff(lam) < 0):
        raise ConvergenceFailure("eigenvalues not sorted ascending")
    return SpectralSystem(
        phi_tag=phi_tag,
        domain_L=L,
        grid_step=h_used,
        x_grid=x,
        eigenvalues=np.asarray(lam),
        eigenfunctions_psi=psi,
        m_weights=w,
        phi_values=tab(h_used),
        theta=theta,
        psi_integrals=ints,
    )


def ou_kernel_exact(t, x, y):
    """Closed-form OU transition density with respect to m."""
    if t <= 0:
        raise ValueError("t must be positive")
    et = math.exp(t)
    return (1 - math.exp(-t)) ** -0.5 * math.exp(
        (-x * x - y * y + 2 * x * y * math.exp(t / 2)) / (2 * (et - 1)))


def heat_kernel(sys: SpectralSystem, t, x, y, n_terms=None):
    """Partial eigen-expansion sum_{n<=n_terms} e^{-lam_n t} psi_n(x) psi_n(y)."""
    if t <= 0:
        raise ValueError("t must be positive")
    if n_terms is None:
        n_terms = sys.n_max
    if n_terms > sys.n_max:
        raise ValueError("n_terms exceeds n_max of the system")
    px = np.array([sys.psi_at(n, x) for n in range(n_terms + 1)])
    py = np.array([sys.psi_at(n, y) for n in range(n_terms + 1)])
    return float(np.sum(np.exp(-sys.eigenvalues[: n_terms + 1] * t) * px * py))


def survival_probability(sys: SpectralSystem, x, t):
    """(P_x(rho_phi > t), leading term e^{-lam0 t} theta psi_0(x))."""
    if t <= 0:
        raise ValueError("t must be positive")
    px = np.array([sys.psi_at(n, x) for n in range(sys.n_max + 1)])
    p = float(np.sum(np.exp(-sys.eigenvalues * t) * px * sys.psi_integrals))
    leading = math.exp(-sys.eigenvalues[0] * t) * sys.theta * float(px[0])
    return p, leading


def conditioned_kernel(sys: SpectralSystem, t, x, y):
    """Doob h-transform kernel q(t,x,y) psi_0(y) e^{lam0 t} / psi_0(x)."""
    psi0_x = sys.psi_at(0, x)
    # near the Dirichlet walls psi_0 is truncation-dominated (for profile
    # killing it even grows polynomially until the wall pulls it to zero)
    if abs(x) > sys.domain_L - 0.5 or (
            abs(psi0_x) < 1e-8 * np.abs(sys.eigenfunctions_psi[0]).max()):
        raise DivisionNearZero(f"psi_0({x}) unreliable for the h-transform")
    q = heat_kernel(sys, t, x, y)
    return q * sys.psi_at(0, y) * math.exp(sys.eigenvalues[0] * t) / psi0_x


def variational_bounds(prof, sys_F: SpectralSystem):
    """Two-sided bounds for the lead eigenvalue with full-profile killing.

    lower = 1/2 + (1/2) int F psi_0^2 dm,
    upper = 1 - (1/2) int ((c e^{x^2/2} F)')^2 dm,
    with c normalizing e^{x^2/2} F in L^2(m).
    """
    x = sys_F.x_grid
    w = sys_F.m_weights
    Fx = prof.evaluate(x)
    psi0 = sys_F.eigenfunctions_psi[0]
    lower = 0.5 + 0.5 * float(np.dot(w, Fx * psi0 * psi0))
    trial = np.exp(x * x / 2) * Fx
    c = 1.0 / math.sqrt(float(np.dot(w, trial * trial)))
    dtrial = np.exp(x * x / 2) * (x * Fx + prof.evaluate_prime(x))
    upper = 1.0 - 0.5 * float(np.dot(w, (c * dtrial) ** 2))
    return lower, upper


def s_star(delta):
    """Solve 2 delta = (e^{-s/2} - e^{-s}) / (1 - e^{-s}) for s > 0."""
    if not 0 < delta < 0.25:
        raise ValueError("delta must lie in (0, 1/4)")

    def g(s):
        es = math.exp(-s)
        return (math.exp(-s / 2) - es) / (1 - es) - 2 * delta

    lo, hi = 1e-9, 1.0
    while g(hi) > 0:
        hi *= 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14:
            break
    return 0.5 * (lo + hi)


def kernel_bound_ratio(sys: SpectralSystem, delta, t, xs=None):
    """Diagnostic for the Gaussian-weighted kernel bound.

    Returns sup over a test grid of q(t,x,y) e^{lam0 t} e^{-delta(x^2+y^2)},
    which stays bounded in t >= s_star(delta).
    """
    if xs is None:
        xs = np.linspace(-3, 3, 13)
    lam0 = sys.eigenvalues[0]
    worst = 0.0
    for xv in xs:
        for yv in xs:
            q = heat_kernel(sys, t, xv, yv)
            worst = max(worst, q * math.exp(lam0 * t)
                        * math.exp(-delta * (xv * xv + yv * yv)))
    return worst
