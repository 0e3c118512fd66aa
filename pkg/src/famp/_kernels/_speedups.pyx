# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: RK4 attractor rollouts and the simulator inner loop.

Mirrors ``_pyref.py``; keep arithmetic order in sync between the two.
"""

import numpy as np

BACKEND = "compiled"


def rollout_columns(f_half, goals, y0, v0, double alpha, double beta,
                    double tau, double h):
    """RK4 rollout of the linear attractor ODE for many columns at once."""
    cdef double[:, ::1] f = np.ascontiguousarray(f_half, dtype=np.float64)
    cdef Py_ssize_t n_cols = f.shape[0]
    cdef Py_ssize_t n_half = f.shape[1]
    if n_half < 3 or n_half % 2 == 0:
        raise ValueError("f_half must hold 2*n_steps+1 samples per column")
    cdef Py_ssize_t n_steps = (n_half - 1) // 2

    cdef double[::1] g = np.ascontiguousarray(goals, dtype=np.float64)
    y_arr = np.array(y0, dtype=np.float64).copy()
    v_arr = np.array(v0, dtype=np.float64).copy()
    cdef double[::1] y = y_arr
    cdef double[::1] v = v_arr

    out_arr = np.empty((n_steps + 1, n_cols))
    cdef double[:, ::1] out = out_arr

    cdef double inv_tau2 = 1.0 / (tau * tau)
    cdef double ab = alpha * beta
    cdef double at = alpha * tau
    cdef double half = 0.5 * h
    cdef double sixth = h / 6.0

    cdef Py_ssize_t k, c
    cdef double f0, fm, f1, yc, vc, gc
    cdef double a1, y2, v2, a2, y3, v3, a3, y4, v4, a4

    for c in range(n_cols):
        out[0, c] = y[c]
    for k in range(n_steps):
        for c in range(n_cols):
            f0 = f[c, 2 * k]
            fm = f[c, 2 * k + 1]
            f1 = f[c, 2 * k + 2]
            yc = y[c]
            vc = v[c]
            gc = g[c]

            a1 = (ab * (gc - yc) - at * vc + f0) * inv_tau2
            y2 = yc + half * vc
            v2 = vc + half * a1
            a2 = (ab * (gc - y2) - at * v2 + fm) * inv_tau2
            y3 = yc + half * v2
            v3 = vc + half * a2
            a3 = (ab * (gc - y3) - at * v3 + fm) * inv_tau2
            y4 = yc + h * v3
            v4 = vc + h * a3
            a4 = (ab * (gc - y4) - at * v4 + f1) * inv_tau2

            yc = yc + sixth * (vc + 2.0 * v2 + 2.0 * v3 + v4)
            vc = vc + sixth * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
            y[c] = yc
            v[c] = vc
            out[k + 1, c] = yc

    return out_arr


cdef double _detent_force(double depth, double[::1] depths,
                          double[::1] peak_scales, double k_plug,
                          double residual_ratio) noexcept:
    cdef Py_ssize_t i
    cdef double prev_depth = 0.0
    cdef double prev_residual = 0.0
    cdef double d_click, ramp
    if depth <= 0.0:
        return 0.0
    for i in range(depths.shape[0]):
        d_click = depths[i]
        if depth <= d_click:
            ramp = k_plug * peak_scales[i] * (depth - prev_depth)
            return ramp if ramp > prev_residual else prev_residual
        prev_residual = residual_ratio * k_plug * peak_scales[i] * (d_click - prev_depth)
        prev_depth = d_click
    return prev_residual


def detent_force(double depth, depths, peak_scales, double k_plug,
                 double residual_ratio):
    """Snap-through resistance at a given insertion depth."""
    cdef double[::1] dd = np.ascontiguousarray(depths, dtype=np.float64)
    cdef double[::1] ps = np.ascontiguousarray(peak_scales, dtype=np.float64)
    return _detent_force(depth, dd, ps, k_plug, residual_ratio)


def sim_control_window(pos, vel, Py_ssize_t passed, des_p, des_v,
                       Py_ssize_t substeps, double dt, double kp, double kd,
                       double mass, origin, axis, depths, peak_scales,
                       double k_plug, double residual_ratio, double lateral_k):
    """Advance the end-effector through one control window."""
    p_arr = np.array(pos, dtype=np.float64).copy()
    v_arr = np.array(vel, dtype=np.float64).copy()
    cdef double[::1] p = p_arr
    cdef double[::1] v = v_arr
    cdef double[::1] dp = np.ascontiguousarray(des_p, dtype=np.float64)
    cdef double[::1] dv = np.ascontiguousarray(des_v, dtype=np.float64)
    cdef double[::1] org = np.ascontiguousarray(origin, dtype=np.float64)
    cdef double[::1] ax = np.ascontiguousarray(axis, dtype=np.float64)
    cdef double[::1] dd = np.ascontiguousarray(depths, dtype=np.float64)
    cdef double[::1] ps = np.ascontiguousarray(peak_scales, dtype=np.float64)

    cdef Py_ssize_t d = p.shape[0]
    cdef Py_ssize_t n_det = dd.shape[0]
    cdef double inv_m = 1.0 / mass
    cdef Py_ssize_t s, i
    cdef double depth, fd, u, fc, lat

    for s in range(substeps):
        depth = 0.0
        for i in range(d):
            depth += (p[i] - org[i]) * ax[i]
        fd = _detent_force(depth, dd, ps, k_plug, residual_ratio)
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
        while passed < n_det and depth >= dd[passed]:
            passed += 1

    depth = 0.0
    for i in range(d):
        depth += (p[i] - org[i]) * ax[i]
    fd = _detent_force(depth, dd, ps, k_plug, residual_ratio)
    contact = np.zeros(d)
    cdef double[::1] cf = contact
    if depth > 0.0:
        for i in range(d):
            lat = (p[i] - org[i]) - depth * ax[i]
            cf[i] = -fd * ax[i] - lateral_k * lat

    return p_arr, v_arr, passed, contact
