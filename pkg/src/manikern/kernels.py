"""Positive-definite radial kernels on R^3.

Two families: a compactly supported piecewise-polynomial profile
(`wendland32`, support radius delta) and the Matern/Sobolev-spline
profile (`matern`, order nu), together with the fractional-order
modified Bessel function K_mu the latter requires.

K_mu is evaluated from its integral representation
``K_mu(r) = integral_0^inf exp(-r cosh t) cosh(mu t) dt`` by fixed
Gauss-Legendre quadrature on an adaptively truncated interval.  With
GL_ORDER = 160 the worst relative error against closed forms and
high-precision references is below 1e-13 for r in [1e-3, 50] and
mu in (0, 3], comfortably inside the 1e-10 contract.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from . import _accel
from .errors import DomainError, ParseError

DEFAULT_DELTA = 8.0 / 3.0

GL_ORDER = 160
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_ORDER)
# truncate where the integrand falls to exp(-TAIL_LOG) of its t=0 value
TAIL_LOG = float(np.log(1e18) + 10.0)


def _as_r(r, minimum=0.0, what="distance"):
    """Validate and flatten distances; returns (1-D array, was_scalar)."""
    arr = np.asarray(r, dtype=float)
    scalar = arr.ndim == 0
    flat = np.atleast_1d(arr).ravel()
    if not np.all(np.isfinite(flat)):
        raise DomainError(f"{what} must be finite")
    if flat.size and np.min(flat) < minimum:
        raise DomainError(f"{what} must be >= {minimum}")
    return flat, arr.shape, scalar


def wendland32(r, delta=DEFAULT_DELTA):
    """Compactly supported profile (1 - r/d)_+^6 (3 + 18 r/d + 35 (r/d)^2).

    Value 3 at r = 0, identically 0 for r >= delta.
    """
    if not (delta > 0.0):
        raise DomainError("support radius must be positive")
    flat, shape, scalar = _as_r(r)
    t = flat / delta
    u = np.maximum(1.0 - t, 0.0)
    u2 = u * u
    out = (u2 * u2 * u2) * (3.0 + t * (18.0 + 35.0 * t))
    return float(out[0]) if scalar else out.reshape(shape)


def bessel_k(mu, r):
    """Modified Bessel function of the second kind, fractional order mu > 0.

    Accuracy target 1e-10 relative for r in [1e-3, 50], mu in (0, 3];
    arguments outside that window are computed best-effort (underflow to 0
    for very large r).  r <= 0 is rejected: K diverges at 0.
    """
    mu = float(mu)
    if not (mu > 0.0) or not math.isfinite(mu):
        raise DomainError("order mu must be positive and finite")
    flat, shape, scalar = _as_r(r, what="argument")
    if flat.size and np.min(flat) <= 0.0:
        raise DomainError("argument must be positive; K diverges at 0")
    out = _accel.bessel_k_many(
        mu, np.ascontiguousarray(flat), _GL_X, _GL_W, TAIL_LOG
    )
    return float(out[0]) if scalar else out.reshape(shape)


def matern(nu, d, r):
    """Matern profile 2^(1-mu)/Gamma(mu) r^mu K_mu(r) with mu = nu - d/2.

    Normalized so the analytic r -> 0 limit is exactly 1.
    """
    nu = float(nu)
    d = float(d)
    mu = nu - 0.5 * d
    if not (mu > 0.0):
        raise DomainError(f"matern requires nu > d/2, got nu={nu}, d={d}")
    flat, shape, scalar = _as_r(r)
    out = np.ones_like(flat)
    pos = flat > 0.0
    if np.any(pos):
        rp = np.ascontiguousarray(flat[pos])
        k = _accel.bessel_k_many(mu, rp, _GL_X, _GL_W, TAIL_LOG)
        out[pos] = (2.0 ** (1.0 - mu) / math.gamma(mu)) * rp**mu * k
    return float(out[0]) if scalar else out.reshape(shape)


@dataclass(frozen=True)
class Kernel:
    """A radial positive-definite kernel with its native Sobolev order.

    `tau` is the Sobolev order of the kernel's native space on R^3:
    4 for wendland32, nu for matern (whose Fourier transform decays
    exactly like (1 + |xi|^2)^(-nu)).
    """

    family: str
    tau: float
    delta: float = DEFAULT_DELTA
    nu: float = 0.0
    d: int = 3

    def __call__(self, r):
        if self.family == "wendland32":
            return wendland32(r, self.delta)
        return matern(self.nu, self.d, r)

    def value_at_zero(self):
        return float(self(0.0))

    def spec(self):
        """Config-file spec string; parse_kernel inverts it."""
        if self.family == "wendland32":
            return f"wendland32:delta={self.delta:.10g}"
        if self.d != 3:
            return f"matern:nu={self.nu:.10g},d={self.d:d}"
        return f"matern:nu={self.nu:.10g}"


def wendland_kernel(delta=DEFAULT_DELTA):
    if not (delta > 0.0):
        raise DomainError("support radius must be positive")
    return Kernel(family="wendland32", tau=4.0, delta=float(delta))


def matern_kernel(nu, d=3):
    nu = float(nu)
    if not (nu > 0.5 * d):
        raise DomainError(f"matern requires nu > d/2, got nu={nu}, d={d}")
    return Kernel(family="matern", tau=nu, nu=nu, d=int(d))


def parse_kernel(text):
    """Parse a kernel spec string like ``wendland32:delta=2.6667``.

    Recognized forms: ``wendland32[:delta=<float>]`` and
    ``matern:nu=<float>[,d=<int>]``.
    """
    name, _, rest = str(text).strip().partition(":")
    args = {}
    if rest:
        for item in rest.split(","):
            key, eq, val = item.partition("=")
            if not eq or not key.strip() or not val.strip():
                raise ParseError(f"malformed kernel argument {item!r} in {text!r}")
            if key.strip() in args:
                raise ParseError(f"duplicate kernel argument {key.strip()!r}")
            args[key.strip()] = val.strip()

    def take_float(key, default=None):
        if key not in args:
            if default is None:
                raise ParseError(f"kernel spec {text!r} needs {key}=<value>")
            return default
        try:
            return float(args.pop(key))
        except ValueError:
            raise ParseError(f"kernel argument {key} is not a number") from None

    if name == "wendland32":
        kernel = wendland_kernel(delta=take_float("delta", DEFAULT_DELTA))
    elif name == "matern":
        nu = take_float("nu")
        d = take_float("d", 3.0)
        if d != int(d):
            raise ParseError("matern dimension d must be an integer")
        kernel = matern_kernel(nu, d=int(d))
    else:
        raise ParseError(f"unknown kernel family {name!r}")
    if args:
        raise ParseError(
            f"unknown kernel argument(s) {', '.join(sorted(args))} in {text!r}"
        )
    return kernel


def kernel_matrix(kernel, pts):
    """Dense symmetric Gram matrix A[i, j] = kernel(|x_i - x_j|).

    Each off-diagonal entry is computed once and mirrored, so the result
    is bitwise symmetric.  Points are expected pairwise distinct; the
    matrix is still returned (and is singular) if they are not.
    """
    pts = np.ascontiguousarray(np.atleast_2d(pts), dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise DomainError(f"points must have shape (N, 3), got {pts.shape}")
    if kernel.family == "wendland32":
        return _accel.wendland_gram(pts, kernel.delta)
    n = pts.shape[0]
    if n == 1:
        return np.array([[kernel.value_at_zero()]])
    condensed = matern(kernel.nu, kernel.d, pdist(pts))
    out = squareform(condensed)
    np.fill_diagonal(out, kernel.value_at_zero())
    return out
