"""Near-minimal Riesz-energy node sets and their mesh measures.

Nodes are optimized by gradient descent on the Riesz s-energy of the
embedded points, differentiated through the embedding into parameter
space, with an Armijo backtracking line search.  Collisions make the
energy infinite, so the line search can never accept a configuration
with coincident points.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from . import _accel
from .errors import ConfigurationError, DomainError, SingularConfigurationError

ARMIJO_C1 = 1e-4
MAX_BACKTRACKS = 60


@dataclass(frozen=True)
class MeshMeasures:
    """Fill distance h, separation radius q, and mesh ratio rho = h/q."""

    h: float
    q: float
    rho: float


@dataclass(frozen=True)
class NodeSet:
    """N parameter tuples with their embedded points.

    `provenance` records how the set was produced ("riesz(...)" or
    "explicit"); `energy` is the final Riesz energy when optimized.
    """

    manifold: object
    params: np.ndarray
    points: np.ndarray
    provenance: str
    energy: float = np.nan

    def __post_init__(self):
        self.params.setflags(write=False)
        self.points.setflags(write=False)

    def __len__(self):
        return self.points.shape[0]


def riesz_energy(points, s=2.0):
    """Riesz s-energy sum over unordered pairs of |x_i - x_j|^(-s)."""
    if not (s > 0.0):
        raise DomainError("Riesz exponent s must be positive")
    pts = np.ascontiguousarray(np.atleast_2d(points), dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise DomainError(f"points must have shape (N, 3), got {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise DomainError("points must be finite")
    energy = _accel.riesz_energy(pts, float(s))
    if np.isinf(energy):
        raise SingularConfigurationError("coincident points have infinite energy")
    return float(energy)


def _parameter_gradient(manifold, params, s):
    """Energy and its gradient with respect to the parameters."""
    pts = np.ascontiguousarray(manifold.embed(params))
    energy, force = _accel.riesz_energy_forces(pts, s)
    if np.isinf(energy):
        return np.inf, None, pts
    jac = manifold.jacobian(params)
    grad = np.einsum("nij,ni->nj", jac, force)
    return energy, grad, pts


def minimize_riesz(manifold, n, s=2.0, seed=0, max_iters=5000, tol=1e-8, step=None):
    """Arrange n nodes on the manifold so their Riesz s-energy is near minimal.

    Seed-controlled uniform initialization in parameter space, then
    descent along the negative parameter gradient with an adaptive step
    (grown 1.5x after every accepted move, halved on rejection).  Stops
    when the gradient norm falls below `tol`, the step underflows, or
    `max_iters` accepted moves have been taken.  The energy sequence is
    non-increasing by construction.
    """
    n = int(n)
    if n < 2:
        raise ConfigurationError("need at least 2 nodes")
    if not (s > 0.0):
        raise DomainError("Riesz exponent s must be positive")
    rng = np.random.default_rng(seed)
    periods = np.asarray(manifold.periods)
    params = None
    for _ in range(16):
        trial = rng.uniform(0.0, 1.0, size=(n, manifold.k)) * periods
        if np.isfinite(_accel.riesz_energy(manifold.embed(trial), s)):
            params = trial
            break
    if params is None:
        raise SingularConfigurationError("could not draw distinct initial nodes")

    alpha = float(step) if step else 1.0 / n**2
    energy, grad, _ = _parameter_gradient(manifold, params, s)
    iterations = 0
    for _ in range(int(max_iters)):
        gnorm_sq = float(np.sum(grad * grad))
        if np.sqrt(gnorm_sq) <= tol:
            break
        accepted = False
        for _ in range(MAX_BACKTRACKS):
            trial = (params - alpha * grad) % periods
            trial_energy = _accel.riesz_energy(manifold.embed(trial), s)
            if trial_energy <= energy - ARMIJO_C1 * alpha * gnorm_sq:
                params = trial
                alpha *= 1.5
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            break
        energy, grad, _ = _parameter_gradient(manifold, params, s)
        iterations += 1

    points = manifold.embed(params)
    return NodeSet(
        manifold=manifold,
        params=params,
        points=points,
        provenance=f"riesz(s={s:g}, seed={seed}, iterations={iterations})",
        energy=float(energy),
    )


def explicit_nodeset(manifold, params):
    """Wrap user-supplied parameter tuples as a NodeSet."""
    arr, _ = manifold._as_params(np.atleast_2d(np.asarray(params, dtype=float)))
    points = manifold.embed(arr)
    if len(arr) > 1:
        energy = _accel.riesz_energy(np.ascontiguousarray(points), 2.0)
        if np.isinf(energy):
            raise SingularConfigurationError("node set contains coincident points")
    return NodeSet(
        manifold=manifold, params=arr, points=points, provenance="explicit"
    )


def mesh_measures(nodes, engine=None, resolution=None, knn=None):
    """Fill distance, separation radius, and mesh ratio of a node set.

    `h` is the largest distance from the engine's dense grid to the
    nearest node; `q` is half the smallest pairwise node distance; both
    use the manifold-intrinsic (geodesic) distance.  Warns when the
    engine's grid is too coarse to resolve the separation.
    """
    if engine is None:
        engine = nodes.manifold.geodesic_engine(resolution=resolution, knn=knn)
    if len(nodes) < 2:
        raise ConfigurationError("mesh measures need at least 2 nodes")
    h = engine.fill_distance(nodes.params)
    q = 0.5 * engine.min_pairwise_distance(nodes.params)
    if engine.grid_spacing > q:
        warnings.warn(
            f"geodesic grid spacing {engine.grid_spacing:.3g} exceeds the "
            f"separation estimate {q:.3g}; measures may be coarse",
            stacklevel=2,
        )
    return MeshMeasures(h=float(h), q=float(q), rho=float(h / q))
