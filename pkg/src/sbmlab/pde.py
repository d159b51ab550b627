"""Semilinear heat equation V_t = V_xx/2 - V^2/2 and its scaled fixed point.

Two frames are used:

* x-frame: Strang splitting with the exact logistic substep
  v -> v / (1 + v dt/4) around a Crank-Nicolson heat step, zero-flux
  boundaries.  Used for bounded data, mollified deltas at moderate size,
  and indicator data.

* self-similar frame: V(s, x) = s^{-1} W(log s, x s^{-1/2}) turns the
  equation into W_tau = W''/2 + (xi/2) W' + W - W^2/2 whose fixed point is
  the singular profile.  One run of this flow yields V^lambda(1, x) =
  W(2 log lambda, x) for every lambda at once, so the large-lambda limit
  and the convergence-rate experiment cost a single evolution.  A fixed
  mollifier in the x-frame cannot reach that limit: lambda * p_eps grows
  without bound pointwise, so its lambda-ladder converges to the spatially
  flat solution 2/t instead of the singular one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import DomainTooSmall, LadderTooShort, NoConvergence, StabilityViolation

INIT_BOUNDED = "bounded"
INIT_DELTA = "delta-mass"
INIT_INDICATOR = "indicator"


@dataclass
class PdeSolution:
    x_grid: np.ndarray
    t_final: float
    values: np.ndarray
    init_tag: dict
    scheme_params: dict = field(default_factory=dict)

    def at(self, x):
        return np.interp(x, self.x_grid, self.values)


# ---------------------------------------------------------------- x-frame --

def _cn_banded(n, dx, dt):
    a = dt / (4 * dx * dx)
    ab = np.zeros((3, n))
    ab[1, :] = 1 + 2 * a
    ab[0, 1:] = -a
    ab[2, :-1] = -a
    ab[0, 1] = -2 * a      # Neumann mirror at the left wall
    ab[2, n - 2] = -2 * a  # and at the right wall
    return ab, a


def _heat_rhs(V, a):
    r = np.empty_like(V)
    r[1:-1] = V[1:-1] * (1 - 2 * a) + a * (V[2:] + V[:-2])
    r[0] = V[0] * (1 - 2 * a) + 2 * a * V[1]
    r[-1] = V[-1] * (1 - 2 * a) + 2 * a * V[-2]
    return r


def evolve(phi0, x_grid, t, dt, init_tag=None, check_max=True,
           boundary_tol=1e-8):
    """Advance non-negative data phi0 on x_grid to time t.

    Raises StabilityViolation if the spatial maximum grows (it cannot for
    this absorbing equation) and DomainTooSmall if a boundary gradient
    develops, signalling that mass has reached the walls.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    V = np.asarray(phi0, dtype=float).copy()
    if np.any(V < 0):
        raise ValueError("initial data must be non-negative")
    x_grid = np.asarray(x_grid, dtype=float)
    n = V.shape[0]
    dx = x_grid[1] - x_grid[0]
    nsteps = int(math.ceil(t / dt - 1e-12)) if t > 0 else 0
    ab, a = _cn_banded(n, dx, dt)
    remaining = t
    vmax = V.max() if n else 0.0
    for _ in range(nsteps):
        step = dt if remaining >= dt * (1 + 1e-12) else remaining
        if step != dt:
            ab, a = _cn_banded(n, dx, step)
        V = V / (1 + V * (step / 4))
        V = solve_banded((1, 1), ab, _heat_rhs(V, a))
        V = V / (1 + V * (step / 4))
        remaining -= step
        new_max = V.max()
        if check_max and new_max > vmax * (1 + 1e-10) + 1e-13:
            raise StabilityViolation(
                f"max grew {vmax:.6e} -> {new_max:.6e} at t_rem={remaining:.3e}")
        vmax = new_max
    scale = max(vmax, 1e-300)
    edge_grad = max(abs(V[1] - V[0]), abs(V[-1] - V[-2]))
    if edge_grad > boundary_tol * scale:
        raise DomainTooSmall(
            f"boundary gradient {edge_grad:.2e} vs max {scale:.2e}")
    return PdeSolution(x_grid, t, V, init_tag or {"kind": INIT_BOUNDED},
                       {"dx": dx, "dt": dt})


def default_domain(t):
    return max(10.0 * math.sqrt(t), 10.0)


def v_lambda(lam, t, eps=None, dx=None, dt=None, L=None):
    """Solution started from lambda * delta_0, mollified by the heat kernel
    at time eps.  A fine startup phase resolves the narrow initial peak."""
    if lam <= 0 or t <= 0:
        raise ValueError("lambda and t must be positive")
    if eps is None:
        eps = 1e-4 * t
    if not t > eps:
        raise ValueError("need t > eps")
    if L is None:
        L = default_domain(t)
    sigma = math.sqrt(eps)
    if dx is None:
        dx = sigma / 10
    if dt is None:
        dt = 2.5e-4 * t
    n = int(round(2 * L / dx)) + 1
    x = -L + dx * np.arange(n)
    V0 = lam * np.exp(-x * x / (2 * eps)) / math.sqrt(2 * math.pi * eps)
    t_sw = min(200 * eps, t / 10)
    dt_f = eps / 2
    t_sw = max(1, int(math.ceil(t_sw / dt_f))) * dt_f
    tag = {"kind": INIT_DELTA, "lambda": lam, "eps": eps}
    sol = evolve(V0, x, t_sw, dt_f, init_tag=tag)
    sol = evolve(sol.values, x, t - t_sw, dt, init_tag=tag)
    sol.scheme_params.update({"eps": eps, "dt_startup": dt_f, "t_switch": t_sw})
    return sol


def tilde_v(b, eps_width, t, dx=None, dt=None, L=None, offset=0.0):
    """Solution started from b * 1_{[offset, offset + eps_width]}.

    Node values carry the fractional coverage of their dual cells so the
    initial mass is exact regardless of grid alignment.  The returned
    solution is checked against the flat-data bound b / (1 + b t / 2).
    """
    if b <= 0 or eps_width <= 0 or t <= 0:
        raise ValueError("b, eps_width, t must be positive")
    if L is None:
        L = default_domain(t) + abs(offset) + eps_width
    if dx is None:
        dx = min(eps_width / 40, 0.01)
    if dt is None:
        dt = 2.5e-4 * t
    n = int(round(2 * L / dx)) + 1
    x = -L + dx * np.arange(n)
    lo, hi = offset, offset + eps_width
    left = np.clip((np.minimum(hi, x + dx / 2) - np.maximum(lo, x - dx / 2)) / dx,
                   0.0, 1.0)
    V0 = b * left
    t_sw = min(0.02 * t, 50 * dx * dx)
    dt_f = min(dt, dx * dx)
    t_sw = max(1, int(math.ceil(t_sw / dt_f))) * dt_f
    tag = {"kind": INIT_INDICATOR, "b": b, "eps_width": eps_width,
           "offset": offset}
    sol = evolve(V0, x, t_sw, dt_f, init_tag=tag)
    sol = evolve(sol.values, x, t - t_sw, dt, init_tag=tag)
    bound = b / (1 + b * t / 2)
    if sol.values.max() > bound * (1 + 1e-8):
        raise StabilityViolation(
            f"indicator solution {sol.values.max():.6e} exceeds flat-data "
            f"bound {bound:.6e}")
    sol.scheme_params.update({"dt_startup": dt_f, "t_switch": t_sw})
    return sol


# ------------------------------------------------------ self-similar frame --

@dataclass
class ScaledFlow:
    """W(tau, xi) evolution with snapshot recording.

    Seeded in the linear regime at s0 where V^1(s0, .) is the heat kernel,
    i.e. W(log s0, xi) = sqrt(s0 / 2 pi) exp(-xi^2 / 2)."""

    xi: np.ndarray
    snapshots: dict
    tau_end: float
    dxi: float
    dtau: float

    def at(self, tau, x=0.0):
        W = self.snapshots[tau]
        return np.interp(x, self.xi, W)


def run_scaled_flow(tau_max, record=(), s0=1e-6, dxi=0.005, dtau=1e-3, L=12.0):
    n = int(round(2 * L / dxi)) + 1
    xi = -L + dxi * np.arange(n)
    W = np.sqrt(s0 / (2 * math.pi)) * np.exp(-xi * xi / 2)
    tau0 = math.log(s0)
    if tau_max <= tau0:
        raise ValueError("tau_max must exceed log(s0)")
    c2 = 0.5 / (dxi * dxi)
    c1 = xi / (4 * dxi)
    up = c2 + c1
    lo = c2 - c1
    di = -2 * c2 + 1.0

    def banded(a):
        ab = np.zeros((3, n))
        ab[0, 1:] = -a * up[:-1]
        ab[1, :] = 1.0 - a * di
        ab[2, :-1] = -a * lo[1:]
        return ab

    ab_full = banded(dtau / 2)
    record = sorted(set(float(r) for r in record))
    snaps = {}
    ri = 0
    tau = tau0
    while tau < tau_max - 1e-12:
        step = min(dtau, tau_max - tau)
        if ri < len(record):
            step = min(step, record[ri] - tau)
        a = step / 2
        ab = ab_full if abs(step - dtau) < 1e-15 else banded(a)
        W = W / (1 + W * (step / 4))
        rhs = np.empty(n)
        rhs[1:-1] = (W[1:-1] * (1 + a * di) + W[2:] * (a * up[1:-1])
                     + W[:-2] * (a * lo[1:-1]))
        rhs[0] = 0.0
        rhs[-1] = 0.0
        W = solve_banded((1, 1), ab, rhs)
        W = W / (1 + W * (step / 4))
        tau += step
        if ri < len(record) and tau >= record[ri] - 1e-12:
            snaps[record[ri]] = W.copy()
            ri += 1
    snaps[tau_max] = W.copy()
    return ScaledFlow(xi=xi, snapshots=snaps, tau_end=tau_max, dxi=dxi,
                      dtau=dtau)


def _aitken_limit(w1, w2, w3):
    """Pointwise Aitken extrapolation of three equispaced-in-tau snapshots."""
    d1 = w2 - w1
    d2 = w3 - w2
    denom = d1 - d2
    safe = np.abs(denom) > 1e-3 * np.abs(d1) + 1e-15
    out = w3.copy()
    out[safe] = w3[safe] + d2[safe] * d2[safe] / denom[safe]
    return out


def v_infinity(t, x_grid=None, tol=1e-6, lam_start=16.0, tau_cap=80.0,
               dxi=0.005, dtau=1e-3, L=12.0):
    """Large-lambda limit at time t, i.e. t^{-1} F(x / sqrt(t)).

    The scaled flow is advanced along the doubling ladder lambda_k =
    lam_start * 2^k (tau_k = 2 log(lambda_k sqrt(t))) until consecutive
    snapshots differ by less than tol in sup norm, then Aitken-extrapolated
    to the fixed point.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    taus = []
    lam = lam_start
    while 2 * math.log(lam * math.sqrt(t)) < tau_cap:
        taus.append(2 * math.log(lam * math.sqrt(t)))
        lam *= 2
    flow = run_scaled_flow(tau_max=taus[-1], record=taus, dxi=dxi, dtau=dtau, L=L)
    keys = sorted(flow.snapshots)
    met = None
    for k in range(1, len(keys)):
        gap = float(np.abs(flow.snapshots[keys[k]]
                           - flow.snapshots[keys[k - 1]]).max())
        if gap < tol and k >= 2:
            met = k
            break
    if met is None:
        raise NoConvergence(
            f"lambda ladder exhausted at tau = {keys[-1]:.1f} without "
            f"meeting tol = {tol:g}")
    W_lim = _aitken_limit(flow.snapshots[keys[met - 2]],
                          flow.snapshots[keys[met - 1]],
                          flow.snapshots[keys[met]])
    if x_grid is None:
        x_grid = flow.xi * math.sqrt(t)
        vals = W_lim / t
    else:
        x_grid = np.asarray(x_grid, dtype=float)
        vals = np.interp(x_grid / math.sqrt(t), flow.xi, W_lim) / t
    sol = PdeSolution(x_grid, t, vals,
                      {"kind": INIT_DELTA, "lambda": math.inf, "eps": 0.0},
                      {"dxi": dxi, "dtau": dtau, "tau_end": keys[met]})
    sol.flow = flow
    sol.profile_limit = W_lim
    return sol


def h_u(us, xs=0.0, dxi=0.005, dtau=1e-3, L=12.0):
    """H_u(x) = V^{sqrt u}(1, x) = W(log u, x) for one or many u >= 1.

    Returns an array of shape (len(us), len(xs)); scalars are broadcast.
    """
    us = np.atleast_1d(np.asarray(us, dtype=float))
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if np.any(us < 1):
        raise ValueError("u must be >= 1")
    taus = [math.log(u) for u in us]
    flow = run_scaled_flow(tau_max=max(taus), record=taus, dxi=dxi, dtau=dtau,
                           L=L)
    out = np.empty((us.shape[0], xs.shape[0]))
    for i, tau in enumerate(taus):
        out[i] = np.interp(xs, flow.xi, flow.snapshots[tau])
    return out


def rate_experiment(t, lambda_ladder, dxi=0.005, dtau=1e-3, L=12.0,
                    lambda_t_fit=256.0, ts_fit=(0.25, 0.5, 1.0, 2.0),
                    tau_limit=46.0, s0=1e-6):
    """Convergence-rate table D(lambda) = V^inf(t,0) - V^lambda(t,0).

    Fits the log-log slope in lambda (the tail exponent with opposite
    sign), and the slope in t at fixed lambda = lambda_t_fit.  Everything
    is read off one scaled-flow run via
    (V^inf - V^lambda)(t, 0) = t^{-1} [F(0) - W(2 log(lambda sqrt t), 0)].
    """
    lams = np.asarray(sorted(lambda_ladder), dtype=float)
    if lams.shape[0] < 4:
        raise LadderTooShort("need at least 4 lambda values")
    if np.any(lams < 1 / math.sqrt(t)):
        raise ValueError("rate regime needs lambda >= t^{-1/2}")
    taus = [2 * math.log(l * math.sqrt(t)) for l in lams]
    taus_t = [2 * math.log(lambda_t_fit * math.sqrt(tt)) for tt in ts_fit]
    tail = [tau_limit - 4.0, tau_limit - 2.0, tau_limit]
    flow = run_scaled_flow(tau_max=tau_limit, record=taus + taus_t + tail[:2],
                           s0=s0, dxi=dxi, dtau=dtau, L=L)
    W_lim = _aitken_limit(flow.snapshots[tail[0]], flow.snapshots[tail[1]],
                          flow.snapshots[tail[2]])
    i0 = flow.xi.shape[0] // 2
    F0 = float(W_lim[i0])
    D = np.array([(F0 - flow.snapshots[tau][i0]) / t for tau in taus])
    if np.any(D <= 0):
        raise NoConvergence("non-positive rate differences; ladder too deep")
    ll, ld = np.log(lams), np.log(D)
    A = np.vstack([ll, np.ones_like(ll)]).T
    coef, res, _, _ = np.linalg.lstsq(A, ld, rcond=None)
    slope = float(coef[0])
    dof = max(len(lams) - 2, 1)
    sigma2 = float(res[0]) / dof if res.size else 0.0
    stderr = math.sqrt(sigma2 / float(np.sum((ll - ll.mean()) ** 2)))
    D_t = np.array([(F0 - flow.snapshots[taus_t[i]][i0]) / ts_fit[i]
                    for i in range(len(ts_fit))])
    t_slope = float(np.polyfit(np.log(ts_fit), np.log(D_t), 1)[0])
    from .results import ResultTable
    table = ResultTable(
        {"lambda": lams, "D": D, "logD": ld},
        meta={"t": t, "F0": F0, "dxi": dxi, "dtau": dtau},
    )
    fits = {"slope": slope, "stderr": stderr, "t_exponent": t_slope,
            "F0": F0, "lambda_t_fit": lambda_t_fit}
    return table, fits
