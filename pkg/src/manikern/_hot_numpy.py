"""Pure-numpy implementations of the hot numeric kernels.

The accelerator dispatch in `_accel` picks either this module or its
jit-compiled twin `_hot_numba`; both expose the same five functions with
identical signatures and float64 semantics.  Pairwise work is row-blocked
to keep peak memory flat for node counts in the low thousands.
"""

import numpy as np

_PAIR_BLOCK = 512
_APPLY_BLOCK = 1024
_BESSEL_BLOCK = 8192

BACKEND_NAME = "numpy"


def _log_cosh(x):
    # overflow-safe log(cosh(x))
    ax = np.abs(x)
    return ax - np.log(2.0) + np.log1p(np.exp(-2.0 * ax))


def riesz_energy(pts, s):
    """Sum of |x_i - x_j|^(-s) over unordered pairs; +inf on coincident points."""
    n = pts.shape[0]
    total = 0.0
    cols = np.arange(n)[None, :]
    for a in range(0, n, _PAIR_BLOCK):
        b = min(a + _PAIR_BLOCK, n)
        diff = pts[a:b, None, :] - pts[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        mask = cols > np.arange(a, b)[:, None]
        vals = d2[mask]
        if vals.size and np.min(vals) == 0.0:
            return np.inf
        if s == 2.0:
            total += float(np.sum(1.0 / vals))
        else:
            total += float(np.sum(vals ** (-0.5 * s)))
    return total


def riesz_energy_forces(pts, s):
    """Energy and its gradient w.r.t. point coordinates, shape (N, 3)."""
    n = pts.shape[0]
    grad = np.zeros_like(pts)
    total = 0.0
    for a in range(0, n, _PAIR_BLOCK):
        b = min(a + _PAIR_BLOCK, n)
        diff = pts[a:b, None, :] - pts[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        d2[np.arange(b - a), np.arange(a, b)] = np.inf
        if np.min(d2) == 0.0:
            return np.inf, grad
        if s == 2.0:
            inv = 1.0 / d2
            total += 0.5 * float(np.sum(inv))
            w = inv * inv
        else:
            total += 0.5 * float(np.sum(d2 ** (-0.5 * s)))
            w = d2 ** (-0.5 * (s + 2.0))
        grad[a:b] = -s * (w.sum(axis=1)[:, None] * pts[a:b] - w @ pts)
    return total, grad


def _wendland_profile(r, delta):
    t = r / delta
    u = np.maximum(1.0 - t, 0.0)
    u2 = u * u
    return (u2 * u2 * u2) * (3.0 + t * (18.0 + 35.0 * t))


def wendland_gram(pts, delta):
    """Dense Gram matrix of the compact-support kernel, exactly symmetric."""
    n = pts.shape[0]
    out = np.empty((n, n))
    for a in range(0, n, _PAIR_BLOCK):
        b = min(a + _PAIR_BLOCK, n)
        diff = pts[a:b, None, :] - pts[None, :, :]
        r = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        out[a:b] = _wendland_profile(r, delta)
    iu = np.triu_indices(n, 1)
    out[iu[1], iu[0]] = out[iu]
    return out


def wendland_apply(eval_pts, nodes, delta, coeffs):
    """sum_j c_j phi(|x - x_j|) for each evaluation point, without storing P x N."""
    p = eval_pts.shape[0]
    out = np.empty(p)
    for a in range(0, p, _APPLY_BLOCK):
        b = min(a + _APPLY_BLOCK, p)
        diff = eval_pts[a:b, None, :] - nodes[None, :, :]
        r = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        out[a:b] = _wendland_profile(r, delta) @ coeffs
    return out


def bessel_k_many(mu, r, glx, glw, tail_log):
    """Modified Bessel K_mu on an array of positive arguments.

    Gauss-Legendre quadrature of exp(-r cosh t) cosh(mu t) on [0, T(r)],
    with T(r) fixed-point adjusted so the discarded tail is exp(-tail_log)
    of the integrand's value at t = 0.
    """
    out = np.empty_like(r)
    for a in range(0, r.shape[0], _BESSEL_BLOCK):
        b = min(a + _BESSEL_BLOCK, r.shape[0])
        rc = r[a:b, None]
        t_cut = np.arccosh(1.0 + tail_log / rc)
        for _ in range(3):
            t_cut = np.arccosh(1.0 + (tail_log + _log_cosh(mu * t_cut)) / rc)
        half = 0.5 * t_cut
        t = half * (glx[None, :] + 1.0)
        integrand = np.exp(-rc * np.cosh(t)) * np.cosh(mu * t)
        out[a:b] = (integrand @ glw) * half[:, 0]
    return out
