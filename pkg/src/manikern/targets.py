"""Target functions for the convergence experiments.

Two kinds: a smooth polynomial in the ambient coordinates, and rough
targets built as Matern center combinations ``f(x) = sum_j c_j
kappa_nu(|x - x_j|)`` whose coefficients pin f to the polynomial at m
near-minimal Riesz centers.  The Matern order nu = (beta + 3/2) / 2
places f just outside the Sobolev space H^beta(R^3), making beta the
experiment's smoothness knob.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParseError
from .interp import evaluate, fit
from .kernels import matern_kernel
from .nodeset import minimize_riesz

DEFAULT_TARGET_SEED = 7


def poly_target(pts):
    """(1/8)(u^5 - 10 u^3 v^2 + 5 u v^4)(u^2 + v^2 - 60 w^2)."""
    arr = np.asarray(pts, dtype=float)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[1] != 3:
        raise DomainError(f"points must have shape (P, 3), got {arr.shape}")
    u, v, w = arr[:, 0], arr[:, 1], arr[:, 2]
    harmonic = u**5 - 10.0 * u**3 * v**2 + 5.0 * u * v**4
    out = 0.125 * harmonic * (u**2 + v**2 - 60.0 * w**2)
    return float(out[0]) if single else out


@dataclass(frozen=True)
class TargetFunction:
    """A scalar function on R^3 used as interpolation ground truth.

    kind "poly" is the smooth polynomial; kind "fbeta" is a Matern
    center combination of roughness parameter beta, stored with the
    fitted center interpolant that evaluates it.
    """

    kind: str
    beta: float = np.inf
    m_count: int = 0
    seed: int = DEFAULT_TARGET_SEED
    combo: object = None

    def __call__(self, pts):
        if self.kind == "poly":
            return poly_target(pts)
        return evaluate(self.combo, pts)

    def spec(self):
        if self.kind == "poly":
            return "poly"
        return f"fbeta:beta={self.beta:g},m={self.m_count:d},seed={self.seed:d}"


def smooth_target():
    """The polynomial target; smoother than any kernel native space here."""
    return TargetFunction(kind="poly")


def matern_order(beta, d=3):
    """Matern order giving Sobolev roughness beta: nu = (beta + d/2) / 2."""
    return 0.5 * (float(beta) + 0.5 * d)


def build_target(manifold, m_count, beta, seed=DEFAULT_TARGET_SEED):
    """Matern combination pinned to the polynomial at m Riesz centers.

    Deterministic given (manifold, m_count, beta, seed).  The fit
    guarantees the combination reproduces the polynomial at the centers
    to 1e-8 relative.
    """
    m_count = int(m_count)
    if m_count < 1:
        raise DomainError("need at least one center")
    beta = float(beta)
    nu = matern_order(beta)
    kernel = matern_kernel(nu)
    if m_count == 1:
        rng = np.random.default_rng(seed)
        params = rng.uniform(0.0, 1.0, size=(1, manifold.k)) * np.asarray(
            manifold.periods
        )
        points = manifold.embed(params)
    else:
        points = minimize_riesz(manifold, m_count, seed=seed).points
    combo = fit(kernel, points, poly_target(points))
    return TargetFunction(
        kind="fbeta", beta=beta, m_count=m_count, seed=int(seed), combo=combo
    )


def eval_target(target, pts):
    """Pointwise evaluation of a TargetFunction."""
    return target(pts)


def default_center_count(manifold):
    """Centers used when a spec omits m: 25 on curves, 100 on surfaces."""
    return 25 if manifold.k == 1 else 100


def target_from_spec(manifold, text):
    """Build a target from a spec string: ``poly`` or
    ``fbeta:beta=<float>[,m=<int>][,seed=<int>]``."""
    name, _, rest = str(text).strip().partition(":")
    if name == "poly":
        if rest:
            raise ParseError("poly target takes no arguments")
        return smooth_target()
    if name != "fbeta":
        raise ParseError(f"unknown target kind {name!r}")
    args = {}
    for item in rest.split(",") if rest else []:
        key, eq, val = item.partition("=")
        if not eq or not key.strip() or not val.strip():
            raise ParseError(f"malformed target argument {item!r} in {text!r}")
        if key.strip() in args:
            raise ParseError(f"duplicate target argument {key.strip()!r}")
        args[key.strip()] = val.strip()
    if "beta" not in args:
        raise ParseError(f"target spec {text!r} needs beta=<value>")
    try:
        beta = float(args.pop("beta"))
        m_count = int(args.pop("m", default_center_count(manifold)))
        seed = int(args.pop("seed", DEFAULT_TARGET_SEED))
    except ValueError:
        raise ParseError(f"non-numeric argument in target spec {text!r}") from None
    if args:
        raise ParseError(
            f"unknown target argument(s) {', '.join(sorted(args))} in {text!r}"
        )
    return build_target(manifold, m_count, beta, seed=seed)
