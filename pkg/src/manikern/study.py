"""Convergence studies: error norms, rate predictions, and reports.

A study runs a hierarchy of node counts on one manifold, interpolates a
target at each level, measures relative errors on a dense quadrature
grid, fits log-log slopes over the trailing levels, and compares them
with the rates predicted by the Sobolev error theory for restricted
kernels.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._accel import backend_name
from .errors import ConfigurationError, DomainError, NormalizationError, ParseError
from .interp import evaluate, fit
from .kernels import parse_kernel
from .manifold import get_manifold
from .nodeset import mesh_measures, minimize_riesz
from .targets import eval_target, target_from_spec

DEFAULT_TRAILING = 4
DEFAULT_CURVE_GRID = 3000
DEFAULT_SURFACE_GRID = (180, 135)
CSV_HEADER = "N,h,q,rho,rel_l2,rel_linf,cond,seconds"

# Derivative order of the measured error norms (plain function values).
MU = 0


def discrete_l2(values, weights):
    """Weighted discrete l2 norm: sqrt(sum_i w_i v_i^2).

    Parameters
    ----------
    values, weights : array_like
        Equal-length vectors; weights must be positive quadrature
        weights.

    Returns
    -------
    float
    """
    values = np.asarray(values, dtype=float).ravel()
    weights = np.asarray(weights, dtype=float).ravel()
    if values.shape != weights.shape:
        raise DomainError(
            f"length mismatch: {values.size} values, {weights.size} weights"
        )
    if values.size == 0:
        raise DomainError("empty vectors have no norm")
    if not np.all(weights > 0.0):
        raise DomainError("weights must be positive")
    return float(np.sqrt(np.sum(weights * values * values)))


def _relative_from_values(approx, truth, weights):
    """Relative l2 / sup errors of approx against truth on a grid."""
    truth = np.asarray(truth, dtype=float).ravel()
    approx = np.asarray(approx, dtype=float).ravel()
    denom_l2 = discrete_l2(truth, weights)
    denom_sup = float(np.max(np.abs(truth)))
    if denom_l2 == 0.0 or denom_sup == 0.0:
        raise NormalizationError(
            "target is identically zero on the grid; relative errors undefined"
        )
    diff = truth - approx
    return {
        "rel_l2": discrete_l2(diff, weights) / denom_l2,
        "rel_linf": float(np.max(np.abs(diff))) / denom_sup,
    }


def relative_errors(interpolant, target, grid):
    """Relative errors of an interpolant against a target on a grid.

    Parameters
    ----------
    interpolant : Interpolant
    target : TargetFunction or callable
        Evaluated at ``grid.points``.
    grid : EvaluationGrid
        Dense quadrature grid; need not contain the interpolation nodes.

    Returns
    -------
    dict
        ``{"rel_l2": ..., "rel_linf": ...}`` with the weighted l2 norm
        and the max norm, each normalized by the target's own grid norm.

    Raises
    ------
    NormalizationError
        If the target vanishes identically on the grid.
    """
    truth = target(grid.points)
    approx = evaluate(interpolant, grid.points)
    return _relative_from_values(approx, truth, grid.weights)


def predicted_rates(tau, k, beta=math.inf, q=2.0):
    """Predicted convergence order of the fill distance, or None.

    Parameters
    ----------
    tau : float
        Ambient Sobolev exponent of the kernel (native space of the
        restriction is H^s with s = tau - (3-k)/2).
    k : int
        Manifold dimension (1 or 2).
    beta : float
        Ambient Sobolev smoothness of the target; ``inf`` for targets
        smoother than any native space here.
    q : float
        Error norm exponent: 2 for the l2 norm, ``inf`` for the sup
        norm.

    Returns
    -------
    float or None
        The exponent r in O(h^r), or None when the parameters fall
        outside the hypotheses of the theory (no prediction).

    Notes
    -----
    With mu = 0 (function values) the applicable regimes are:

    - in-native (beta_M >= s): rate s - k(1/2 - 1/q)+, needs
      floor(s) > k/2;
    - escape (k/2 < beta_M < s): rate beta_M - k(1/2 - 1/q)+, needs
      floor(beta_M) > k/2; quasi-uniformity absorbs the mesh-ratio
      factor rho^(s - beta_M);
    - doubling (beta = inf): l2 rate 2s; no sup-norm prediction.
    """
    k = int(k)
    tau = float(tau)
    q = float(q)
    if k not in (1, 2):
        raise DomainError(f"manifold dimension must be 1 or 2, got {k}")
    if q < 1.0:
        raise DomainError(f"norm exponent q must be >= 1, got {q}")
    s = tau - (3 - k) / 2.0
    half_k = k / 2.0
    if s <= half_k:
        return None
    penalty = k * max(0.5 - (0.0 if math.isinf(q) else 1.0 / q), 0.0)
    if math.isinf(beta):
        if math.floor(s) <= half_k:
            return None
        return 2.0 * s if q == 2.0 else None
    beta_m = float(beta) - (3 - k) / 2.0
    if beta_m >= s:
        if math.floor(s) <= half_k:
            return None
        return s - penalty
    if beta_m > half_k and math.floor(beta_m) > half_k:
        return beta_m - penalty
    return None


def prediction_summary(tau, k, beta=math.inf):
    """Both predicted rates with the quantities they derive from.

    Returns a dict with the native exponent ``s``, the target's
    intrinsic smoothness ``beta_m``, the regime name, the l2 and sup
    rates (None where no prediction applies), and the mesh-ratio
    exponent carried by escape estimates.
    """
    k = int(k)
    s = float(tau) - (3 - k) / 2.0
    beta_m = math.inf if math.isinf(beta) else float(beta) - (3 - k) / 2.0
    l2_rate = predicted_rates(tau, k, beta, 2.0)
    linf_rate = predicted_rates(tau, k, beta, math.inf)
    if l2_rate is None and linf_rate is None:
        regime = "no prediction"
    elif math.isinf(beta):
        regime = "doubling"
    elif beta_m >= s:
        regime = "in-native"
    else:
        regime = "escape"
    return {
        "s": s,
        "k": k,
        "mu": MU,
        "beta": float(beta),
        "beta_m": beta_m,
        "regime": regime,
        "l2_rate": l2_rate,
        "linf_rate": linf_rate,
        "rho_exponent": (s - beta_m) if regime == "escape" else 0.0,
    }


def fit_slope(h, e, trailing=DEFAULT_TRAILING):
    """Least-squares slope of log e against log h over the last rows.

    Parameters
    ----------
    h, e : array_like
        Positive fill distances and errors, one entry per level.
    trailing : int
        How many of the final rows enter the fit (>= 2).

    Returns
    -------
    float
    """
    h = np.asarray(h, dtype=float).ravel()
    e = np.asarray(e, dtype=float).ravel()
    trailing = int(trailing)
    if h.shape != e.shape:
        raise DomainError(f"length mismatch: {h.size} h values, {e.size} errors")
    if trailing < 2:
        raise DomainError(f"slope fit needs trailing >= 2, got {trailing}")
    if h.size < trailing:
        raise DomainError(f"slope fit over {trailing} rows needs at least that many")
    h = h[-trailing:]
    e = e[-trailing:]
    if not (np.all(h > 0.0) and np.all(e > 0.0)):
        raise DomainError("slope fit needs positive h and e")
    return float(np.polyfit(np.log(h), np.log(e), 1)[0])


@dataclass(frozen=True)
class StudyConfig:
    """Resolved description of one convergence study.

    ``kernel`` and ``target`` are spec strings (see ``parse_kernel``
    and ``target_from_spec``); ``hierarchy`` is the strictly increasing
    list of node counts; ``grid_resolution`` is the dense error grid
    (defaults: 3000 points on curves, 180x135 on surfaces);
    ``geodesic_resolution``/``knn`` configure the mesh-measure engine.
    """

    manifold: str
    target: str
    hierarchy: tuple
    kernel: str = "wendland32"
    grid_resolution: object = None
    geodesic_resolution: object = None
    knn: object = None
    seed: int = 0
    trailing: int = DEFAULT_TRAILING
    riesz_s: float = 2.0
    riesz_max_iters: int = 5000
    check_l2_tol: float = 0.5
    check_linf_tol: float = 0.5
    out_dir: object = None

    def __post_init__(self):
        counts = tuple(int(n) for n in self.hierarchy)
        if not counts:
            raise ConfigurationError("hierarchy must not be empty")
        if any(b <= a for a, b in zip(counts, counts[1:])):
            raise ConfigurationError(
                f"hierarchy must be strictly increasing, got {counts}"
            )
        object.__setattr__(self, "hierarchy", counts)

    def resolved(self):
        """Flat dotted-key view with every default substituted."""
        manifold = get_manifold(self.manifold)
        kernel = parse_kernel(self.kernel)
        target = target_from_spec(manifold, self.target)
        grid = self.grid_resolution
        if grid is None:
            grid = DEFAULT_CURVE_GRID if manifold.k == 1 else DEFAULT_SURFACE_GRID
        items = [
            ("manifold.name", manifold.name),
            ("kernel.spec", kernel.spec()),
            ("target.spec", target.spec()),
            ("hierarchy", ",".join(str(n) for n in self.hierarchy)),
            ("grid.resolution", _format_resolution(grid)),
            ("geodesic.resolution", _format_resolution(self.geodesic_resolution)),
            ("geodesic.knn", "default" if self.knn is None else str(int(self.knn))),
            ("seed", str(int(self.seed))),
            ("trailing", str(int(self.trailing))),
            ("riesz.s", f"{float(self.riesz_s):g}"),
            ("riesz.max_iters", str(int(self.riesz_max_iters))),
            ("check.l2_tol", f"{float(self.check_l2_tol):g}"),
            ("check.linf_tol", f"{float(self.check_linf_tol):g}"),
        ]
        return dict(items)

    def resolved_line(self):
        """The ``# key=value ...`` comment line output files start with."""
        body = " ".join(f"{k}={v}" for k, v in self.resolved().items())
        return f"# {body}"


def _format_resolution(resolution):
    if resolution is None:
        return "default"
    if np.isscalar(resolution):
        return str(int(resolution))
    return "x".join(str(int(r)) for r in resolution)


@dataclass
class LevelRow:
    """One hierarchy level of a convergence report.

    Numeric fields are NaN when the level failed; ``error`` then holds
    the failure message (empty on success).
    """

    n: int
    h: float = math.nan
    q: float = math.nan
    rho: float = math.nan
    rel_l2: float = math.nan
    rel_linf: float = math.nan
    cond: float = math.nan
    seconds: float = math.nan
    error: str = ""

    @property
    def ok(self):
        return self.error == "" and math.isfinite(self.rel_l2)


@dataclass
class ConvergenceReport:
    """Everything a convergence study produced.

    ``rows`` are sorted by increasing node count; ``prediction`` is the
    dict from ``prediction_summary``; slopes are NaN when too few
    levels succeeded to fit them.
    """

    config: StudyConfig
    rows: list
    l2_slope: float
    linf_slope: float
    prediction: dict
    trailing: int
    backend: str
    warnings: list = field(default_factory=list)


def _worker_count(n_jobs):
    """Pool width: MANIKERN_THREADS caps the CPU count, at least 1."""
    limit = os.cpu_count() or 1
    env = os.environ.get("MANIKERN_THREADS", "").strip()
    if env:
        try:
            limit = int(env)
        except ValueError:
            raise ConfigurationError(
                f"MANIKERN_THREADS must be an integer, got {env!r}"
            ) from None
    return max(1, min(limit, n_jobs))


def _level_seed(seed, n):
    """Deterministic per-level RNG seed derived from (study seed, N)."""
    ss = np.random.SeedSequence(entropy=(int(seed), int(n)))
    return int(ss.generate_state(1, np.uint64)[0])


def _run_level(manifold, kernel, target, grid, truth, engine, cfg, n, nodes=None):
    """Produce one LevelRow; failures are recorded, not raised."""
    row = LevelRow(n=int(n))
    start = time.perf_counter()
    try:
        if nodes is None:
            nodes = minimize_riesz(
                manifold,
                n,
                s=cfg.riesz_s,
                seed=_level_seed(cfg.seed, n),
                max_iters=cfg.riesz_max_iters,
            )
        measures = mesh_measures(nodes, engine=engine)
        interpolant = fit(kernel, nodes, eval_target(target, nodes.points))
        approx = evaluate(interpolant, grid.points)
        errors = _relative_from_values(approx, truth, grid.weights)
        row.h = measures.h
        row.q = measures.q
        row.rho = measures.rho
        row.rel_l2 = errors["rel_l2"]
        row.rel_linf = errors["rel_linf"]
        row.cond = interpolant.condition_estimate
    except Exception as exc:  # any per-level failure lands in the row
        row.error = f"{type(exc).__name__}: {exc}"
    row.seconds = time.perf_counter() - start
    return row


def run_convergence(cfg, node_sets=None):
    """Run a full convergence study.

    Parameters
    ----------
    cfg : StudyConfig
    node_sets : dict, optional
        Maps node count to a prebuilt NodeSet, skipping Riesz
        minimization for those levels (a programmatic convenience; the
        per-level seeds make regenerated sets identical anyway).

    Returns
    -------
    ConvergenceReport
        Rows by increasing N; a level that fails is recorded in its row
        and the run continues.
    """
    manifold = get_manifold(cfg.manifold)
    kernel = parse_kernel(cfg.kernel)
    target = target_from_spec(manifold, cfg.target)
    grid_resolution = cfg.grid_resolution
    if grid_resolution is None:
        grid_resolution = (
            DEFAULT_CURVE_GRID if manifold.k == 1 else DEFAULT_SURFACE_GRID
        )
    grid = manifold.quadrature_grid(grid_resolution)
    truth = eval_target(target, grid.points)
    engine = manifold.geodesic_engine(
        resolution=cfg.geodesic_resolution, knn=cfg.knn
    )
    counts = cfg.hierarchy
    node_sets = node_sets or {}
    rows = [None] * len(counts)
    with ThreadPoolExecutor(max_workers=_worker_count(len(counts))) as pool:
        futures = {
            pool.submit(
                _run_level,
                manifold,
                kernel,
                target,
                grid,
                truth,
                engine,
                cfg,
                n,
                node_sets.get(n),
            ): i
            for i, n in enumerate(counts)
        }
        for future, i in futures.items():
            rows[i] = future.result()

    warnings_list = _hierarchy_warnings(rows)
    good = [row for row in rows if row.ok]
    l2_slope = math.nan
    linf_slope = math.nan
    if len(good) >= max(2, min(cfg.trailing, len(counts))):
        trail = min(cfg.trailing, len(good))
        if trail < cfg.trailing:
            warnings_list.append(
                f"slope fitted over {trail} rows, fewer than trailing={cfg.trailing}"
            )
        h = [row.h for row in good]
        try:
            l2_slope = fit_slope(h, [row.rel_l2 for row in good], trail)
            linf_slope = fit_slope(h, [row.rel_linf for row in good], trail)
        except DomainError as exc:
            warnings_list.append(f"slope fit failed: {exc}")
    else:
        warnings_list.append(
            f"only {len(good)} of {len(counts)} levels succeeded; slopes not fitted"
        )
    return ConvergenceReport(
        config=cfg,
        rows=rows,
        l2_slope=l2_slope,
        linf_slope=linf_slope,
        prediction=prediction_summary(kernel.tau, manifold.k, target.beta),
        trailing=cfg.trailing,
        backend=backend_name(),
        warnings=warnings_list,
    )


def _hierarchy_warnings(rows):
    """Flag rows out of N order or with non-decreasing fill distance."""
    flags = []
    for a, b in zip(rows, rows[1:]):
        if b.n <= a.n:
            flags.append(f"rows out of order: N={a.n} before N={b.n}")
        if a.ok and b.ok and not (b.h < a.h):
            flags.append(
                f"fill distance not decreasing: h(N={a.n})={a.h:.6g} "
                f"-> h(N={b.n})={b.h:.6g}"
            )
    return flags


def render_csv(config_line, rows, timings=False):
    """CSV text for report rows, starting with the config comment line.

    With ``timings=False`` (the default used for files on disk) the
    seconds column is written as a constant 0.0 so that reruns with the
    same seed produce byte-identical files; real wall times live in the
    JSON report.
    """
    lines = [config_line, CSV_HEADER]
    for row in rows:
        seconds = repr(float(row.seconds)) if timings else "0.0"
        lines.append(
            ",".join(
                [
                    str(int(row.n)),
                    repr(float(row.h)),
                    repr(float(row.q)),
                    repr(float(row.rho)),
                    repr(float(row.rel_l2)),
                    repr(float(row.rel_linf)),
                    repr(float(row.cond)),
                    seconds,
                ]
            )
        )
    return "\n".join(lines) + "\n"


def report_to_csv(report, timings=False):
    """CSV serialization of a report (see ``render_csv``)."""
    return render_csv(report.config.resolved_line(), report.rows, timings=timings)


def rows_from_csv(text):
    """Parse report CSV text back into (config_line, rows).

    Raises ParseError (with the 1-based line number) on a malformed
    header or row; the error column does not round-trip because the
    CSV schema has no such field.
    """
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ParseError("expected leading config comment line", line=1)
    if len(lines) < 2 or lines[1] != CSV_HEADER:
        raise ParseError(f"expected header {CSV_HEADER!r}", line=2)
    rows = []
    for i, line in enumerate(lines[2:], start=3):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 8:
            raise ParseError(f"expected 8 fields, got {len(parts)}", line=i)
        try:
            rows.append(
                LevelRow(
                    n=int(parts[0]),
                    h=float(parts[1]),
                    q=float(parts[2]),
                    rho=float(parts[3]),
                    rel_l2=float(parts[4]),
                    rel_linf=float(parts[5]),
                    cond=float(parts[6]),
                    seconds=float(parts[7]),
                )
            )
        except ValueError:
            raise ParseError(f"non-numeric field in row {line!r}", line=i) from None
    return lines[0], rows


def _jsonable(value):
    """Make NaN/inf JSON-safe: NaN -> None, +-inf -> strings."""
    if isinstance(value, float):
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
    return value


def report_to_json(report, timings=True):
    """JSON serialization with wall times and the failure column.

    The first line is the resolved-config comment; strip lines starting
    with ``#`` before feeding the rest to a strict JSON parser.  With
    ``timings=False`` the seconds fields are zeroed so reruns with the
    same seed produce byte-identical files.
    """
    body = {
        "config": report.config.resolved(),
        "backend": report.backend,
        "trailing": report.trailing,
        "rows": [
            {
                "n": row.n,
                "h": _jsonable(row.h),
                "q": _jsonable(row.q),
                "rho": _jsonable(row.rho),
                "rel_l2": _jsonable(row.rel_l2),
                "rel_linf": _jsonable(row.rel_linf),
                "cond": _jsonable(row.cond),
                "seconds": _jsonable(row.seconds) if timings else 0.0,
                "error": row.error,
            }
            for row in report.rows
        ],
        "slopes": {
            "l2": _jsonable(report.l2_slope),
            "linf": _jsonable(report.linf_slope),
        },
        "predicted": {k: _jsonable(v) for k, v in report.prediction.items()},
        "warnings": list(report.warnings),
    }
    return (
        report.config.resolved_line()
        + "\n"
        + json.dumps(body, indent=2, allow_nan=False)
        + "\n"
    )


def json_body(text):
    """Parse report JSON text, skipping leading ``#`` comment lines."""
    lines = [line for line in text.splitlines() if not line.startswith("#")]
    return json.loads("\n".join(lines))


def plot_script(report, csv_name="report.csv", image_name="report.png"):
    """Text of a standalone script plotting the report's CSV.

    The script draws both relative errors against the fill distance on
    log-log axes and adds dashed guide lines with the predicted slopes,
    anchored at the finest level.  Deterministic given the config and
    predictions; the error values themselves are read from the CSV at
    plot time.
    """
    pred = report.prediction
    lines = [
        report.config.resolved_line(),
        '"""Plot a convergence report; needs matplotlib."""',
        "",
        "import csv",
        "import io",
        "",
        "import matplotlib",
        "",
        'matplotlib.use("Agg")',
        "import matplotlib.pyplot as plt",
        "",
        f"CSV_NAME = {csv_name!r}",
        f"IMAGE_NAME = {image_name!r}",
        f"PREDICTED_L2 = {pred['l2_rate']!r}",
        f"PREDICTED_LINF = {pred['linf_rate']!r}",
        f"REGIME = {pred['regime']!r}",
        "",
        "with open(CSV_NAME) as handle:",
        '    data = [line for line in handle if not line.startswith("#")]',
        "rows = list(csv.DictReader(io.StringIO(''.join(data))))",
        'rows = [r for r in rows if r["h"] != "nan" and r["rel_l2"] != "nan"]',
        'h = [float(r["h"]) for r in rows]',
        'l2 = [float(r["rel_l2"]) for r in rows]',
        'linf = [float(r["rel_linf"]) for r in rows]',
        "",
        "fig, ax = plt.subplots(figsize=(5.5, 4.2))",
        'ax.loglog(h, l2, "o-", label="relative l2")',
        'ax.loglog(h, linf, "s-", label="relative sup")',
        "guides = [",
        '    (PREDICTED_L2, l2[-1], "predicted l2 rate"),',
        '    (PREDICTED_LINF, linf[-1], "predicted sup rate"),',
        "]",
        "for rate, anchor, label in guides:",
        "    if rate is None:",
        "        continue",
        "    ref = [anchor * (x / h[-1]) ** rate for x in h]",
        '    ax.loglog(h, ref, "--", label=f"{label} ({rate:g})")',
        'ax.set_xlabel("fill distance h")',
        'ax.set_ylabel("relative error")',
        f'ax.set_title("{report.config.resolved()["manifold.name"]} / '
        f'{report.config.resolved()["target.spec"]} ({pred["regime"]})")',
        'ax.grid(True, which="both", alpha=0.3)',
        "ax.legend()",
        'fig.savefig(IMAGE_NAME, dpi=150, bbox_inches="tight")',
        'print(f"wrote {IMAGE_NAME}")',
        "",
    ]
    return "\n".join(lines)
