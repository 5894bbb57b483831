"""Jit-compiled implementations of the hot numeric kernels.

Twin of `_hot_numpy` with identical signatures; see that module for the
contracts.  Importing this module requires numba — the accelerator
dispatch in `_accel` only loads it when the environment allows.
"""

import numpy as np
from numba import njit

BACKEND_NAME = "numba"


@njit(cache=True, nogil=True)
def riesz_energy(pts, s):
    n = pts.shape[0]
    total = 0.0
    if s == 2.0:
        for i in range(n):
            for j in range(i + 1, n):
                dx = pts[i, 0] - pts[j, 0]
                dy = pts[i, 1] - pts[j, 1]
                dz = pts[i, 2] - pts[j, 2]
                d2 = dx * dx + dy * dy + dz * dz
                if d2 == 0.0:
                    return np.inf
                total += 1.0 / d2
        return total
    for i in range(n):
        for j in range(i + 1, n):
            dx = pts[i, 0] - pts[j, 0]
            dy = pts[i, 1] - pts[j, 1]
            dz = pts[i, 2] - pts[j, 2]
            d2 = dx * dx + dy * dy + dz * dz
            if d2 == 0.0:
                return np.inf
            total += d2 ** (-0.5 * s)
    return total


@njit(cache=True, nogil=True)
def riesz_energy_forces(pts, s):
    n = pts.shape[0]
    grad = np.zeros_like(pts)
    total = 0.0
    if s == 2.0:
        for i in range(n):
            for j in range(i + 1, n):
                dx = pts[i, 0] - pts[j, 0]
                dy = pts[i, 1] - pts[j, 1]
                dz = pts[i, 2] - pts[j, 2]
                d2 = dx * dx + dy * dy + dz * dz
                if d2 == 0.0:
                    return np.inf, grad
                inv = 1.0 / d2
                total += inv
                w = 2.0 * inv * inv
                grad[i, 0] -= w * dx
                grad[i, 1] -= w * dy
                grad[i, 2] -= w * dz
                grad[j, 0] += w * dx
                grad[j, 1] += w * dy
                grad[j, 2] += w * dz
        return total, grad
    for i in range(n):
        for j in range(i + 1, n):
            dx = pts[i, 0] - pts[j, 0]
            dy = pts[i, 1] - pts[j, 1]
            dz = pts[i, 2] - pts[j, 2]
            d2 = dx * dx + dy * dy + dz * dz
            if d2 == 0.0:
                return np.inf, grad
            total += d2 ** (-0.5 * s)
            w = s * d2 ** (-0.5 * (s + 2.0))
            grad[i, 0] -= w * dx
            grad[i, 1] -= w * dy
            grad[i, 2] -= w * dz
            grad[j, 0] += w * dx
            grad[j, 1] += w * dy
            grad[j, 2] += w * dz
    return total, grad


@njit(cache=True, nogil=True, inline="always")
def _wendland_profile(r, delta):
    t = r / delta
    u = 1.0 - t
    if u <= 0.0:
        return 0.0
    u2 = u * u
    return (u2 * u2 * u2) * (3.0 + t * (18.0 + 35.0 * t))


@njit(cache=True, nogil=True)
def wendland_gram(pts, delta):
    n = pts.shape[0]
    out = np.empty((n, n))
    for i in range(n):
        out[i, i] = _wendland_profile(0.0, delta)
        for j in range(i + 1, n):
            dx = pts[i, 0] - pts[j, 0]
            dy = pts[i, 1] - pts[j, 1]
            dz = pts[i, 2] - pts[j, 2]
            v = _wendland_profile(np.sqrt(dx * dx + dy * dy + dz * dz), delta)
            out[i, j] = v
            out[j, i] = v
    return out


@njit(cache=True, nogil=True)
def wendland_apply(eval_pts, nodes, delta, coeffs):
    p = eval_pts.shape[0]
    n = nodes.shape[0]
    out = np.empty(p)
    for i in range(p):
        acc = 0.0
        for j in range(n):
            dx = eval_pts[i, 0] - nodes[j, 0]
            dy = eval_pts[i, 1] - nodes[j, 1]
            dz = eval_pts[i, 2] - nodes[j, 2]
            acc += coeffs[j] * _wendland_profile(
                np.sqrt(dx * dx + dy * dy + dz * dz), delta
            )
        out[i] = acc
    return out


@njit(cache=True, nogil=True, inline="always")
def _log_cosh(x):
    ax = abs(x)
    return ax - 0.6931471805599453 + np.log1p(np.exp(-2.0 * ax))


@njit(cache=True, nogil=True)
def bessel_k_many(mu, r, glx, glw, tail_log):
    m = r.shape[0]
    q = glx.shape[0]
    out = np.empty(m)
    for i in range(m):
        ri = r[i]
        t_cut = np.arccosh(1.0 + tail_log / ri)
        for _ in range(3):
            t_cut = np.arccosh(1.0 + (tail_log + _log_cosh(mu * t_cut)) / ri)
        half = 0.5 * t_cut
        acc = 0.0
        for k in range(q):
            t = half * (glx[k] + 1.0)
            acc += glw[k] * np.exp(-ri * np.cosh(t)) * np.cosh(mu * t)
        out[i] = acc * half
    return out
