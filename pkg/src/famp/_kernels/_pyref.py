"""Pure-Python/numpy reference implementations of the hot kernels.

These mirror the compiled versions in ``_speedups.pyx`` operation for
operation; the benchmark in ``benchmarks/compare_backends.py`` checks both
speed and numerical agreement.  Keep the arithmetic order identical when
editing either side.
"""

import numpy as np

BACKEND = "python"


def rollout_columns(f_half, goals, y0, v0, alpha, beta, tau, h):
    """RK4 rollout of the linear attractor ODE for many columns at once.

    tau^2 * ydd = alpha * (beta * (g - y) - tau * yd) + f(t)

    ``f_half`` has shape (n_cols, 2 * n_steps + 1): forcing sampled at every
    half step so RK4 stage evaluations need no interpolation.  Returns the
    positions, shape (n_steps + 1, n_cols).
    """
    f_half = np.asarray(f_half, dtype=float)
    n_cols, n_half = f_half.shape
    if n_half < 3 or n_half % 2 == 0:
        raise ValueError("f_half must hold 2*n_steps+1 samples per column")
    n_steps = (n_half - 1) // 2

    inv_tau2 = 1.0 / (tau * tau)
    ab = alpha * beta
    at = alpha * tau

    y = np.asarray(y0, dtype=float).copy()
    v = np.asarray(v0, dtype=float).copy()
    g = np.asarray(goals, dtype=float)

    out = np.empty((n_steps + 1, n_cols))
    out[0] = y
    half = 0.5 * h
    sixth = h / 6.0

    for k in range(n_steps):
        f0 = f_half[:, 2 * k]
        fm = f_half[:, 2 * k + 1]
        f1 = f_half[:, 2 * k + 2]

        a1 = (ab * (g - y) - at * v + f0) * inv_tau2
        y2 = y + half * v
        v2 = v + half * a1
        a2 = (ab * (g - y2) - at * v2 + fm) * inv_tau2
        y3 = y + half * v2
        v3 = v + half * a2
        a3 = (ab * (g - y3) - at * v3 + fm) * inv_tau2
        y4 = y + h * v3
        v4 = v + h * a3
        a4 = (ab * (g - y4) - at * v4 + f1) * inv_tau2

        y = y + sixth * (v + 2.0 * v2 + 2.0 * v3 + v4)
        v = v + sixth * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        out[k + 1] = y

    return out


def detent_force(depth, depths, peak_scales, k_plug, residual_ratio):
    """Snap-through resistance at a given insertion depth.

    Each detent segment ramps linearly from the previous detent depth and
    drops to ``residual_ratio`` times its peak once the detent is passed;
    past the last detent only the residual of that detent remains.
    """
    if depth <= 0.0:
        return 0.0
    prev_depth = 0.0
    prev_residual = 0.0
    for i in range(len(depths)):
        d_click = depths[i]
        if depth <= d_click:
            ramp = k_plug * peak_scales[i] * (depth - prev_depth)
            return ramp if ramp > prev_residual else prev_residual
        prev_residual = residual_ratio * k_plug * peak_scales[i] * (d_click - prev_depth)
        prev_depth = d_click
    return prev_residual


def sim_control_window(pos, vel, passed, des_p, des_v, substeps, dt,
                       kp, kd, mass, origin, axis, depths, peak_scales,
                       k_plug, residual_ratio, lateral_k):
    """Advance the end-effector through one control window.

    Desired position/velocity are held zero-order over ``substeps``
    semi-implicit Euler steps of size ``dt``.  Returns updated position,
    velocity, detent count, and the contact force at the final state.
    """
    d = len(pos)
    p = [float(pos[i]) for i in range(d)]
    v = [float(vel[i]) for i in range(d)]
    dp = [float(des_p[i]) for i in range(d)]
    dv = [float(des_v[i]) for i in range(d)]
    org = [float(origin[i]) for i in range(d)]
    ax = [float(axis[i]) for i in range(d)]
    n_det = len(depths)
    inv_m = 1.0 / mass

    for _ in range(substeps):
        depth = 0.0
        for i in range(d):
            depth += (p[i] - org[i]) * ax[i]
        fd = detent_force(depth, depths, peak_scales, k_plug, residual_ratio)
        for i in range(d):
            u = kp * (dp[i] - p[i]) + kd * (dv[i] - v[i])
            fc = 0.0
            if depth > 0.0:
                lat = (p[i] - org[i]) - depth * ax[i]
                fc = -fd * ax[i] - lateral_k * lat
            v[i] = v[i] + dt * (u + fc) * inv_m
            p[i] = p[i] + dt * v[i]
        depth = 0.0
        for i in range(d):
            depth += (p[i] - org[i]) * ax[i]
        while passed < n_det and depth >= depths[passed]:
            passed += 1

    depth = 0.0
    for i in range(d):
        depth += (p[i] - org[i]) * ax[i]
    fd = detent_force(depth, depths, peak_scales, k_plug, residual_ratio)
    contact = np.zeros(d)
    if depth > 0.0:
        for i in range(d):
            lat = (p[i] - org[i]) - depth * ax[i]
            contact[i] = -fd * ax[i] - lateral_k * lat

    return np.array(p), np.array(v), passed, contact
