"""Compiled inner loops for rollout scoring and subsidy-value estimation.

Pure functions over packed arrays; all randomness enters through pre-drawn
uniform tables so that callers control common-random-number coupling.  The
Python-level mirrors in ``policies`` define the semantics; tests check the
two agree to rounding error.
"""

from __future__ import annotations

import numpy as np
from numba import njit

BASE_MYOPIC = 0
BASE_RANDOM = 1


@njit(cache=True)
def rollout_batch(beliefs0, p_active, p_passive, click, discount, horizon,
                  u_obs, u_act, base_policy):
    """Forced-first-action rollout returns for every arm under shared noise.

    For each first action j and trajectory l, plays j once from ``beliefs0``,
    then follows the base policy for ``horizon`` further steps, accruing
    expected rewards discounted from the second step on.  ``u_obs`` and
    ``u_act`` have shape (L, horizon+1); row l drives trajectory l for every
    j, which is what makes the per-arm scores common-random-number coupled.

    Returns ``(r0, g)``: ``r0[j]`` is the exact first-step expected reward
    and ``g[j, l]`` the discounted return of the steps after the first, so
    the trajectory's full return is ``r0[j] + discount * g[j, l]``.
    """
    n, s = beliefs0.shape
    n_traj = u_obs.shape[0]
    r0 = np.empty(n)
    for j in range(n):
        acc = 0.0
        for i in range(s):
            acc += beliefs0[j, i] * click[j, i]
        r0[j] = acc
    g = np.zeros((n, n_traj))
    b = np.empty((n, s))
    tmp = np.empty(s)
    for j0 in range(n):
        for l in range(n_traj):
            for j in range(n):
                for i in range(s):
                    b[j, i] = beliefs0[j, i]
            df = 1.0
            total = 0.0
            for h in range(horizon + 1):
                if h == 0:
                    a = j0
                    r = r0[j0]
                elif base_policy == BASE_MYOPIC:
                    a = 0
                    r = -1.0
                    for j in range(n):
                        v = 0.0
                        for i in range(s):
                            v += b[j, i] * click[j, i]
                        if v > r:
                            r = v
                            a = j
                else:
                    a = int(u_act[l, h] * n)
                    if a >= n:
                        a = n - 1
                    r = 0.0
                    for i in range(s):
                        r += b[a, i] * click[a, i]
                if h > 0:
                    total += df * r
                    df *= discount
                if h == horizon:
                    break
                like = u_obs[l, h] < r
                for j in range(n):
                    if j == a:
                        z = 0.0
                        for t in range(s):
                            acc = 0.0
                            for i in range(s):
                                w = click[j, i] if like else 1.0 - click[j, i]
                                acc += b[j, i] * w * p_active[j, i, t]
                            tmp[t] = acc
                            z += acc
                        for t in range(s):
                            b[j, t] = tmp[t] / z
                    else:
                        for t in range(s):
                            acc = 0.0
                            for i in range(s):
                                acc += b[j, i] * p_passive[j, i, t]
                            tmp[t] = acc
                        for t in range(s):
                            b[j, t] = tmp[t]
            g[j0, l] = total
    return r0, g


@njit(cache=True)
def whittle_value_pair(belief0, p_active, p_passive, click, discount, subsidy,
                       horizon, u_obs):
    """Single-arm play-first and passive-first values under a given subsidy.

    Both branches follow the subsidy-greedy rule (play when the expected
    reward beats the subsidy) after their forced first step, share the noise
    table ``u_obs`` of shape (L, horizon), and collect the subsidy as the
    passive step's reward.  Returns the two trajectory-averaged values
    ``(v_play_first, v_passive_first)``.
    """
    s = belief0.size
    n_traj = u_obs.shape[0]
    b = np.empty(s)
    tmp = np.empty(s)
    v = np.zeros(2)
    for mode in range(2):
        for l in range(n_traj):
            for i in range(s):
                b[i] = belief0[i]
            df = 1.0
            total = 0.0
            for h in range(horizon):
                r = 0.0
                for i in range(s):
                    r += b[i] * click[i]
                if h == 0:
                    play = mode == 0
                else:
                    play = r > subsidy
                if play:
                    total += df * r
                    like = u_obs[l, h] < r
                    z = 0.0
                    for t in range(s):
                        acc = 0.0
                        for i in range(s):
                            w = click[i] if like else 1.0 - click[i]
                            acc += b[i] * w * p_active[i, t]
                        tmp[t] = acc
                        z += acc
                    for t in range(s):
                        b[t] = tmp[t] / z
                else:
                    total += df * subsidy
                    for t in range(s):
                        acc = 0.0
                        for i in range(s):
                            acc += b[i] * p_passive[i, t]
                        tmp[t] = acc
                    for t in range(s):
                        b[t] = tmp[t]
                df *= discount
            v[mode] += total
    return v[0] / n_traj, v[1] / n_traj


def warm_up() -> None:
    """Trigger compilation of both kernels on tiny inputs."""
    beliefs = np.full((2, 2), 0.5)
    p = np.full((2, 2, 2), 0.5)
    click = np.array([[0.2, 0.8], [0.3, 0.7]])
    u = np.full((1, 2), 0.5)
    rollout_batch(beliefs, p, p, click, 0.9, 1, u, u, BASE_MYOPIC)
    whittle_value_pair(beliefs[0], p[0], p[0], click[0], 0.9, 0.5, 2, u)
