"""Jitted per-sample kernels.

The online tracker runs one of these per incoming signal, so they are
compiled once (cached on disk) and work purely over the flat slot tables;
nothing here ever materializes the degree map or the Laplacian.
"""

import numba
import numpy as np


@numba.njit(cache=True)
def square_diff(x, rows, cols):
    r = rows.shape[0]
    out = np.empty(r)
    for e in range(r):
        d = x[rows[e]] - x[cols[e]]
        out[e] = d * d
    return out


@numba.njit(cache=True)
def blend(z_run, z_new, gamma):
    r = z_run.shape[0]
    out = np.empty(r)
    g1 = 1.0 - gamma
    for e in range(r):
        out[e] = g1 * z_run[e] + gamma * z_new[e]
    return out


@numba.njit(cache=True)
def padmm(w, v, lam, z, rows, cols, rho, tau1, tau2, alpha, beta):
    n = v.shape[0]
    r = w.shape[0]
    deg = np.zeros(n)
    for e in range(r):
        deg[rows[e]] += w[e]
        deg[cols[e]] += w[e]
    u = np.empty(n)
    for i in range(n):
        u[i] = deg[i] - v[i] + lam[i] / rho

    shift = 2.0 * tau1
    shrink = 1.0 / (2.0 * tau1 * beta + 1.0)
    step = tau1 * rho
    w_new = np.empty(r)
    deg_new = np.zeros(n)
    for e in range(r):
        val = (w[e] - step * (u[rows[e]] + u[cols[e]]) - shift * z[e]) * shrink
        if val < 0.0:
            val = 0.0
        w_new[e] = val
        deg_new[rows[e]] += val
        deg_new[cols[e]] += val

    v_new = np.empty(n)
    lam_new = np.empty(n)
    for i in range(n):
        v_lin = (1.0 - rho * tau2) * v[i] + rho * tau2 * deg_new[i] + tau2 * lam[i]
        root = 0.5 * (v_lin + np.sqrt(v_lin * v_lin + 4.0 * tau2 * alpha))
        v_new[i] = root
        lam_new[i] = lam[i] + rho * (deg_new[i] - root)
    return w_new, v_new, lam_new


@numba.njit(cache=True)
def online_step(w, v, lam, z_run, first, gamma, x, rows, cols,
                rho, tau1, tau2, alpha, beta):
    """Fused dissimilarity update plus one padmm iteration (one dispatch)."""
    z_new = square_diff(x, rows, cols)
    z = z_new if first else blend(z_run, z_new, gamma)
    w_new, v_new, lam_new = padmm(w, v, lam, z, rows, cols,
                                  rho, tau1, tau2, alpha, beta)
    return w_new, v_new, lam_new, z
