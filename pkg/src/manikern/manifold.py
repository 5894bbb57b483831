"""Parametric embedded submanifolds of R^3.

Provides the built-in manifolds (a six-lobed closed curve, a torus, and a
unit circle used as an exactly-solvable test case), midpoint quadrature
grids with metric weights, and approximate geodesic distances.  Geodesics
on curves come from a dense cumulative arc-length table; on surfaces from
shortest paths in a symmetric k-nearest-neighbor graph over a dense
parameter grid, with query points tied to their nearest grid points.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree

from .errors import ConfigurationError, DomainError

TWO_PI = 2.0 * np.pi

DEFAULT_CURVE_SAMPLES = 200_000
DEFAULT_SURFACE_RESOLUTION = (180, 135)
DEFAULT_KNN = 8


@dataclass(frozen=True)
class EvaluationGrid:
    """Uniform midpoint grid over a manifold's period cell.

    weights[i] is the metric volume of cell i (arc length for curves,
    surface area for surfaces), so sum(weights) approximates the total
    measure and sum(w_i g(x_i)) approximates the integral of g.
    """

    manifold_name: str
    resolution: tuple[int, ...]
    params: np.ndarray
    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        for arr in (self.params, self.points, self.weights):
            arr.setflags(write=False)

    def __len__(self):
        return self.points.shape[0]


class ParametricManifold:
    """A k-dimensional (k in {1, 2}) periodic parametric manifold in R^3.

    `embed_fn` maps a (N, k) parameter array to (N, 3) points and
    `jacobian_fn` to (N, 3, k) tangent frames.  All parameters are
    periodic; inputs are wrapped into [0, period) before evaluation.
    """

    def __init__(self, name, k, embed_fn, jacobian_fn, periods=None):
        if k not in (1, 2):
            raise ConfigurationError(f"intrinsic dimension must be 1 or 2, got {k}")
        self.name = name
        self.k = k
        self.periods = tuple(periods) if periods is not None else (TWO_PI,) * k
        self._embed_fn = embed_fn
        self._jacobian_fn = jacobian_fn
        self._engines = {}

    def __repr__(self):
        return f"ParametricManifold({self.name!r}, k={self.k})"

    def _as_params(self, params):
        """Normalize input to a wrapped (N, k) float array.

        Returns (array, single) where `single` records that the caller
        passed one parameter tuple (scalar for k=1, length-k vector).
        """
        arr = np.asarray(params, dtype=float)
        single = False
        if arr.ndim == 0:
            if self.k != 1:
                raise DomainError(
                    f"{self.name} needs {self.k} parameters per point"
                )
            arr = arr.reshape(1, 1)
            single = True
        elif arr.ndim == 1:
            if self.k == 1:
                arr = arr[:, None]
            elif arr.shape[0] == self.k:
                arr = arr[None, :]
                single = True
            else:
                raise DomainError(
                    f"{self.name} needs {self.k} parameters per point, "
                    f"got a length-{arr.shape[0]} vector"
                )
        elif arr.ndim != 2 or arr.shape[1] != self.k:
            raise DomainError(
                f"parameter array must have shape (N, {self.k}), got {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise DomainError("parameters must be finite")
        return arr % np.asarray(self.periods), single

    def wrap(self, params):
        """Reduce parameters into the fundamental period cell."""
        arr, single = self._as_params(params)
        return arr[0] if single else arr

    def embed(self, params):
        """Map parameters to points in R^3; (N, k) -> (N, 3)."""
        arr, single = self._as_params(params)
        pts = self._embed_fn(arr)
        return pts[0] if single else pts

    def jacobian(self, params):
        """Tangent vectors of the embedding; (N, k) -> (N, 3, k)."""
        arr, single = self._as_params(params)
        jac = self._jacobian_fn(arr)
        return jac[0] if single else jac

    def metric_density(self, params):
        """sqrt(det(J^T J)): arc-length or area element per unit parameter."""
        arr, _ = self._as_params(params)
        jac = self._jacobian_fn(arr)
        if self.k == 1:
            return np.linalg.norm(jac[:, :, 0], axis=1)
        return np.linalg.norm(np.cross(jac[:, :, 0], jac[:, :, 1]), axis=1)

    def quadrature_grid(self, resolution):
        """Midpoint grid over the period cell with metric weights.

        `resolution` is one point count per parameter (an int is accepted
        for curves).  Weight_i is the metric density at the midpoint times
        the parameter cell volume.
        """
        if np.isscalar(resolution):
            resolution = (int(resolution),)
        resolution = tuple(int(r) for r in resolution)
        if len(resolution) != self.k:
            raise ConfigurationError(
                f"{self.name} needs {self.k} resolution counts, got {resolution}"
            )
        if any(r < 2 for r in resolution):
            raise ConfigurationError("each resolution count must be at least 2")
        axes = [
            (np.arange(r) + 0.5) * (p / r)
            for r, p in zip(resolution, self.periods)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        params = np.stack([m.ravel() for m in mesh], axis=1)
        cell = np.prod([p / r for r, p in zip(resolution, self.periods)])
        weights = self.metric_density(params) * cell
        return EvaluationGrid(
            manifold_name=self.name,
            resolution=resolution,
            params=params,
            points=self._embed_fn(params),
            weights=weights,
        )

    def geodesic_engine(self, resolution=None, knn=None):
        """Shared geodesic-distance engine, cached per configuration.

        For k=1 `resolution` is the arc-length table sample count and
        `knn` is ignored; for k=2 it is the dense grid shape and `knn`
        the graph neighbor count.
        """
        if self.k == 1:
            key = (int(resolution) if resolution else DEFAULT_CURVE_SAMPLES,)
            if key not in self._engines:
                self._engines[key] = _CurveGeodesic(self, key[0])
        else:
            res = tuple(resolution) if resolution else DEFAULT_SURFACE_RESOLUTION
            key = (res, int(knn) if knn else DEFAULT_KNN)
            if key not in self._engines:
                self._engines[key] = _SurfaceGeodesic(self, key[0], key[1])
        return self._engines[key]

    def geodesic_distance(self, pa, pb, resolution=None, knn=None):
        """Approximate intrinsic distance between two parameter tuples."""
        engine = self.geodesic_engine(resolution=resolution, knn=knn)
        return engine.distance(pa, pb)


class _CurveGeodesic:
    """Intrinsic distances on a closed curve via a cumulative arc-length table."""

    def __init__(self, manifold, samples=DEFAULT_CURVE_SAMPLES):
        if manifold.k != 1:
            raise ConfigurationError("arc-length engine requires a curve")
        self.manifold = manifold
        self.samples = int(samples)
        period = manifold.periods[0]
        theta = np.linspace(0.0, period, self.samples + 1)
        speed = manifold.metric_density(theta[:, None] % period)
        # trapezoid cumulative integral of the speed
        seg = 0.5 * (speed[1:] + speed[:-1]) * (period / self.samples)
        self._theta = theta
        self._cum = np.concatenate([[0.0], np.cumsum(seg)])
        self.length = float(self._cum[-1])
        self.grid_spacing = self.length / self.samples

    def _positions(self, params):
        arr, _ = self.manifold._as_params(params)
        return np.interp(arr[:, 0], self._theta, self._cum)

    def pairwise(self, pa, pb):
        """Elementwise distances between two equal-length parameter arrays."""
        sa = self._positions(pa)
        sb = self._positions(pb)
        gap = np.abs(sa - sb)
        return np.minimum(gap, self.length - gap)

    def distance(self, pa, pb):
        return float(self.pairwise(pa, pb)[0])

    def _node_positions(self, node_params):
        pos = np.sort(self._positions(node_params))
        return pos

    def min_distance_to_nodes(self, query_params, node_params):
        """For each query, arc-length distance to the nearest node."""
        pos = self._node_positions(node_params)
        s = self._positions(query_params)
        idx = np.searchsorted(pos, s)
        right = pos[idx % pos.size]
        left = pos[idx - 1]
        d_right = np.abs(right - s)
        d_left = np.abs(s - left)
        d_right = np.minimum(d_right, self.length - d_right)
        d_left = np.minimum(d_left, self.length - d_left)
        return np.minimum(d_left, d_right)

    def fill_distance(self, node_params):
        """sup over the dense table of the distance to the nearest node."""
        pos = self._node_positions(node_params)
        if pos.size == 1:
            return 0.5 * self.length
        gaps = np.diff(pos)
        wrap_gap = self.length - (pos[-1] - pos[0])
        return 0.5 * float(max(np.max(gaps), wrap_gap))

    def min_pairwise_distance(self, node_params):
        pos = self._node_positions(node_params)
        if pos.size < 2:
            raise ConfigurationError("need at least two nodes")
        gaps = np.diff(pos)
        wrap_gap = self.length - (pos[-1] - pos[0])
        gap = float(min(np.min(gaps), wrap_gap))
        return min(gap, self.length - gap)


class _SurfaceGeodesic:
    """Intrinsic distances on a surface via k-NN graph shortest paths.

    The graph joins each dense-grid point to its `knn` nearest grid
    neighbors (symmetric union) with Euclidean edge weights; query points
    are joined to their `knn` nearest grid points.  Shortest paths then
    approximate geodesics from above up to the local chord/arc defect.
    """

    def __init__(self, manifold, resolution=DEFAULT_SURFACE_RESOLUTION, knn=DEFAULT_KNN):
        if manifold.k != 2:
            raise ConfigurationError("graph engine requires a surface")
        if knn < 4:
            raise ConfigurationError("graph needs at least 4 neighbors")
        self.manifold = manifold
        self.resolution = tuple(int(r) for r in resolution)
        self.knn = int(knn)
        axes = [
            np.arange(r) * (p / r)
            for r, p in zip(self.resolution, manifold.periods)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        self.grid_params = np.stack([m.ravel() for m in mesh], axis=1)
        self.grid_points = manifold.embed(self.grid_params)
        self._tree = cKDTree(self.grid_points)
        dist, idx = self._tree.query(self.grid_points, k=self.knn + 1)
        g = self.grid_points.shape[0]
        rows = np.repeat(np.arange(g), self.knn)
        cols = idx[:, 1:].ravel()
        vals = dist[:, 1:].ravel()
        w = coo_matrix((vals, (rows, cols)), shape=(g, g)).tocsr()
        self._graph = w.maximum(w.T)
        self.grid_spacing = float(np.max(dist[:, 1]))

    def _augmented(self, query_points):
        """Graph over grid + query vertices; queries tie to nearest grid points."""
        g = self.grid_points.shape[0]
        q = query_points.shape[0]
        dist, idx = self._tree.query(query_points, k=self.knn)
        base = self._graph.tocoo()
        rows = np.concatenate([base.row, np.repeat(g + np.arange(q), self.knn)])
        cols = np.concatenate([base.col, idx.ravel()])
        vals = np.concatenate([base.data, dist.ravel()])
        return coo_matrix((vals, (rows, cols)), shape=(g + q, g + q)).tocsr()

    def distance(self, pa, pb):
        ma = self.manifold
        qa = ma.wrap(pa)
        qb = ma.wrap(pb)
        pts = ma.embed(np.vstack([np.atleast_1d(qa), np.atleast_1d(qb)]))
        if np.array_equal(pts[0], pts[1]):
            return 0.0
        g = self.grid_points.shape[0]
        graph = self._augmented(pts)
        d = dijkstra(graph, directed=False, indices=g, min_only=False)
        out = float(d[g + 1])
        if not np.isfinite(out):
            raise ConfigurationError(
                "geodesic graph is disconnected; increase knn or resolution"
            )
        return out

    def pairwise(self, pa, pb):
        arr_a, _ = self.manifold._as_params(pa)
        arr_b, _ = self.manifold._as_params(pb)
        return np.array([
            self.distance(a, b) for a, b in zip(arr_a, arr_b)
        ])

    def fill_distance(self, node_params):
        """max over grid vertices of the graph distance to the nearest node."""
        nodes = self.manifold.embed(node_params)
        g = self.grid_points.shape[0]
        graph = self._augmented(np.atleast_2d(nodes))
        sources = g + np.arange(nodes.shape[0])
        d = dijkstra(graph, directed=False, indices=sources, min_only=True)
        grid_d = d[:g]
        if not np.all(np.isfinite(grid_d)):
            raise ConfigurationError(
                "geodesic graph is disconnected; increase knn or resolution"
            )
        return float(np.max(grid_d))

    def min_pairwise_distance(self, node_params):
        """Smallest node-to-node graph distance, by limited multi-Dijkstra.

        Distances are censored at a search limit that doubles until the
        smallest found pair is certified (limit at least twice the
        candidate means no censored pair can beat it).
        """
        nodes = np.atleast_2d(self.manifold.embed(node_params))
        n = nodes.shape[0]
        if n < 2:
            raise ConfigurationError("need at least two nodes")
        g = self.grid_points.shape[0]
        graph = self._augmented(nodes)
        near = cKDTree(nodes).query(nodes, k=2)[0][:, 1]
        limit = 4.0 * float(np.max(near)) + 4.0 * self.grid_spacing
        chunk = max(32, 50_000_000 // (8 * (g + n)))
        for _ in range(32):
            best = np.inf
            for a in range(0, n, chunk):
                b = min(a + chunk, n)
                d = dijkstra(
                    graph,
                    directed=False,
                    indices=g + np.arange(a, b),
                    limit=limit,
                )
                block = d[:, g:]
                block[np.arange(b - a), np.arange(a, b)] = np.inf
                best = min(best, float(np.min(block)))
            if best <= 0.5 * limit:
                return best
            if np.isinf(limit):
                if np.isinf(best):
                    raise ConfigurationError(
                        "geodesic graph is disconnected; increase knn or resolution"
                    )
                return best
            limit = limit * 4.0 if np.isfinite(best) else np.inf
        raise ConfigurationError("node separation search failed to converge")


def _curve_embed(params):
    theta = params[:, 0]
    rad = 1.0 + np.cos(6.0 * theta) / 3.0
    return np.stack(
        [rad * np.cos(theta), rad * np.sin(theta), np.sin(2.0 * theta) / 3.0],
        axis=1,
    )


def _curve_jacobian(params):
    theta = params[:, 0]
    rad = 1.0 + np.cos(6.0 * theta) / 3.0
    drad = -2.0 * np.sin(6.0 * theta)
    du = drad * np.cos(theta) - rad * np.sin(theta)
    dv = drad * np.sin(theta) + rad * np.cos(theta)
    dw = (2.0 / 3.0) * np.cos(2.0 * theta)
    return np.stack([du, dv, dw], axis=1)[:, :, None]


def _torus_embed(params):
    theta = params[:, 0]
    lam = params[:, 1]
    ring = 1.0 + np.cos(lam) / 3.0
    return np.stack(
        [ring * np.cos(theta), ring * np.sin(theta), np.sin(lam) / 3.0],
        axis=1,
    )


def _torus_jacobian(params):
    theta = params[:, 0]
    lam = params[:, 1]
    ring = 1.0 + np.cos(lam) / 3.0
    dring = -np.sin(lam) / 3.0
    d_theta = np.stack(
        [-ring * np.sin(theta), ring * np.cos(theta), np.zeros_like(theta)],
        axis=1,
    )
    d_lam = np.stack(
        [dring * np.cos(theta), dring * np.sin(theta), np.cos(lam) / 3.0],
        axis=1,
    )
    return np.stack([d_theta, d_lam], axis=2)


def _circle_embed(params):
    theta = params[:, 0]
    return np.stack(
        [np.cos(theta), np.sin(theta), np.zeros_like(theta)], axis=1
    )


def _circle_jacobian(params):
    theta = params[:, 0]
    return np.stack(
        [-np.sin(theta), np.cos(theta), np.zeros_like(theta)], axis=1
    )[:, :, None]


_BUILTINS = {
    "curve6lobe": lambda: ParametricManifold(
        "curve6lobe", 1, _curve_embed, _curve_jacobian
    ),
    "torus": lambda: ParametricManifold("torus", 2, _torus_embed, _torus_jacobian),
    "circle": lambda: ParametricManifold("circle", 1, _circle_embed, _circle_jacobian),
}

MANIFOLD_NAMES = tuple(sorted(_BUILTINS))


def get_manifold(name):
    """Look up a built-in manifold by name; instances are cached."""
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown manifold {name!r}; choose from {', '.join(MANIFOLD_NAMES)}"
        ) from None
    cache = get_manifold.__dict__.setdefault("_cache", {})
    if name not in cache:
        cache[name] = factory()
    return cache[name]
