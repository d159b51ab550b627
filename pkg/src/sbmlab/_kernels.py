"""Hot loops for the branching particle system.

Two exact samplers of the same time-t law:

* direct: every exponential clock ring of every particle is simulated
  (rate N per particle, death or binary split with probability 1/2 each;
  Brownian displacement drawn over each waiting time).

* reduced: only lineages with descendants at time t are generated.  A root
  has surviving descendants with probability p = 2/(2 + N t); conditioned
  on that, the genealogy of survivors is a time-inhomogeneous binary tree
  whose visible-branch hazard at remaining time u is N / (2 + N u), and
  positions are Brownian along the thinned lifelines.  Expected cost drops
  from O(N^2 t) to O(N t) per surviving replicate.

Streams are keyed by (seed, replicate, tag) through splitmix64-seeded
xoshiro256**, so replicates are independent and reproducible in any order.
Kernels are numba-compiled when numba is importable and run as plain
Python otherwise (slow but identical logic and keyed streams; clouds agree
across backends up to possible last-ulp differences in transcendentals).
"""
from __future__ import annotations

import numpy as np

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap

np.seterr(over="ignore")  # uint64 wrap-around is intentional in the RNG

_U64 = np.uint64
_SM_GAMMA = _U64(0x9E3779B97F4A7C15)
_SM_M1 = _U64(0xBF58476D1CE4E5B9)
_SM_M2 = _U64(0x94D049BB133111EB)
_REP_GAMMA = _U64(0xD1B54A32D192ED03)


@njit(cache=True, inline="always")
def _splitmix(z):
    z = (z + _SM_GAMMA)
    z = (z ^ (z >> _U64(30))) * _SM_M1
    z = (z ^ (z >> _U64(27))) * _SM_M2
    return z ^ (z >> _U64(31))


@njit(cache=True, inline="always")
def _rotl(x, k):
    return (x << k) | (x >> (_U64(64) - k))


@njit(cache=True, inline="always")
def _seed_state(seed, rep, tag):
    state = np.empty(4, dtype=np.uint64)
    z = (_U64(seed) * _SM_GAMMA) ^ (_U64(rep) * _REP_GAMMA) ^ _U64(tag)
    for i in range(4):
        z = _splitmix(z)
        state[i] = z
    return state


@njit(cache=True, inline="always")
def _next64(state):
    s0, s1, s2, s3 = state[0], state[1], state[2], state[3]
    result = _rotl(s1 * _U64(5), _U64(7)) * _U64(9)
    t = s1 << _U64(17)
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, _U64(45))
    state[0], state[1], state[2], state[3] = s0, s1, s2, s3
    return result


@njit(cache=True, inline="always")
def _u01(state):
    return float(_next64(state) >> _U64(11)) * 1.1102230246251565e-16


@njit(cache=True, inline="always")
def _normal(state):
    while True:
        u = 2.0 * _u01(state) - 1.0
        v = 2.0 * _u01(state) - 1.0
        s = u * u + v * v
        if 0.0 < s < 1.0:
            return u * np.sqrt(-2.0 * np.log(s) / s)


@njit(cache=True)
def direct_cloud(seed, rep, pos0, cnt0, rate, t, out_pos, cap):
    """Positions at time t of the full event-driven system.

    Returns (n_final, events); n_final = -1 signals the event cap."""
    state = _seed_state(seed, rep, _U64(0xD17EC7))
    stack_s = np.empty(1024, dtype=np.float64)
    stack_x = np.empty(1024, dtype=np.float64)
    n_final = 0
    events = 0
    for ia in range(pos0.shape[0]):
        for _ in range(cnt0[ia]):
            top = 0
            stack_s[top] = 0.0
            stack_x[top] = pos0[ia]
            top += 1
            while top > 0:
                top -= 1
                s = stack_s[top]
                x = stack_x[top]
                while True:
                    if rate <= 0.0:
                        out_pos[n_final] = x + np.sqrt(t - s) * _normal(state)
                        n_final += 1
                        break
                    tau = -np.log(1.0 - _u01(state)) / rate
                    events += 1
                    if events > cap:
                        return -1, events
                    if s + tau >= t:
                        out_pos[n_final] = x + np.sqrt(t - s) * _normal(state)
                        n_final += 1
                        break
                    s += tau
                    if _u01(state) < 0.5:
                        break
                    x += np.sqrt(tau) * _normal(state)
                    if top >= stack_s.shape[0]:
                        grown_s = np.empty(stack_s.shape[0] * 2, dtype=np.float64)
                        grown_x = np.empty(stack_x.shape[0] * 2, dtype=np.float64)
                        grown_s[: stack_s.shape[0]] = stack_s
                        grown_x[: stack_x.shape[0]] = stack_x
                        stack_s = grown_s
                        stack_x = grown_x
                    stack_s[top] = s
                    stack_x[top] = x
                    top += 1
                if n_final >= out_pos.shape[0] - 1:
                    return -1, events
    return n_final, events


@njit(cache=True)
def extinction_time(seed, rep, n_init, rate, t_max, cap):
    """Extinction time of the replicate, or -1.0 if alive at t_max.

    Early-exits as soon as one lineage reaches t_max: extinction status at
    every earlier time is then settled.  Positions are never needed."""
    state = _seed_state(seed, rep, _U64(0xE27))
    stack_s = np.empty(1024, dtype=np.float64)
    t_ext = 0.0
    events = 0
    for _ in range(n_init):
        top = 0
        stack_s[top] = 0.0
        top += 1
        while top > 0:
            top -= 1
            s = stack_s[top]
            while True:
                tau = -np.log(1.0 - _u01(state)) / rate
                events += 1
                if events > cap:
                    return -2.0, events
                if s + tau >= t_max:
                    return -1.0, events
                s += tau
                if _u01(state) < 0.5:
                    if s > t_ext:
                        t_ext = s
                    break
                if top >= stack_s.shape[0]:
                    grown = np.empty(stack_s.shape[0] * 2, dtype=np.float64)
                    grown[: stack_s.shape[0]] = stack_s
                    stack_s = grown
                stack_s[top] = s
                top += 1
    return t_ext, events


@njit(cache=True)
def reduced_cloud(seed, rep, pos0, cnt0, rate, t, out_pos):
    """Positions at time t via the conditioned genealogy (same law as
    direct_cloud).  Returns n_final, or -1 if out_pos is too small."""
    state = _seed_state(seed, rep, _U64(0x5ED))
    p_root = 2.0 / (2.0 + rate * t)
    stack_s = np.empty(1024, dtype=np.float64)
    stack_x = np.empty(1024, dtype=np.float64)
    n_final = 0
    for ia in range(pos0.shape[0]):
        for _ in range(cnt0[ia]):
            if _u01(state) >= p_root:
                continue
            top = 0
            stack_s[top] = 0.0
            stack_x[top] = pos0[ia]
            top += 1
            while top > 0:
                top -= 1
                s = stack_s[top]
                x = stack_x[top]
                while True:
                    u = t - s
                    z = _u01(state) * (2.0 + rate * u) - 2.0
                    if z <= 0.0:
                        # no further visible branch: single particle at t
                        out_pos[n_final] = x + np.sqrt(u) * _normal(state)
                        n_final += 1
                        if n_final >= out_pos.shape[0]:
                            return -1
                        break
                    tau = u - z / rate
                    s += tau
                    x += np.sqrt(tau) * _normal(state)
                    if top >= stack_s.shape[0]:
                        grown_s = np.empty(stack_s.shape[0] * 2, dtype=np.float64)
                        grown_x = np.empty(stack_x.shape[0] * 2, dtype=np.float64)
                        grown_s[: stack_s.shape[0]] = stack_s
                        grown_x[: stack_x.shape[0]] = stack_x
                        stack_s = grown_s
                        stack_x = grown_x
                    stack_s[top] = s
                    stack_x[top] = x
                    top += 1
    return n_final


@njit(cache=True)
def branch_event_stats(seed, rep, n_init, rate, t_max):
    """(events, offspring_sum) over one replicate of the direct dynamics;
    offspring per event is 0 or 2, so offspring_sum / events estimates the
    critical mean 1."""
    state = _seed_state(seed, rep, _U64(0xC0117))
    stack_s = np.empty(1024, dtype=np.float64)
    events = 0
    offspring = 0
    for _ in range(n_init):
        top = 0
        stack_s[top] = 0.0
        top += 1
        while top > 0:
            top -= 1
            s = stack_s[top]
            while True:
                tau = -np.log(1.0 - _u01(state)) / rate
                if s + tau >= t_max:
                    break
                s += tau
                events += 1
                if _u01(state) < 0.5:
                    break
                offspring += 2
                if top >= stack_s.shape[0]:
                    grown = np.empty(stack_s.shape[0] * 2, dtype=np.float64)
                    grown[: stack_s.shape[0]] = stack_s
                    stack_s = grown
                stack_s[top] = s
                top += 1
    return events, offspring
