"""Command-line front end: node generation, interpolation, studies.

Subcommands
-----------
nodes
    Generate a Riesz-energy node set, write it as CSV, print measures.
mesh
    Fill distance / separation / mesh ratio of an existing node file.
interp
    One-shot fit and evaluate for ad-hoc use.
converge
    Run a convergence study from a config file (or bundled config name)
    and write report CSV, JSON, and a plot script.

Config files are flat ``key = value`` text with dotted keys
(``manifold.name``, ``kernel.spec``, ...); ``#`` lines are comments.
All randomness flows from the single seed, and every output file begins
with a comment line recording the full resolved configuration.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, ManikernError, ParseError
from .interp import evaluate, fit
from .kernels import parse_kernel
from .manifold import MANIFOLD_NAMES, get_manifold
from .nodeset import explicit_nodeset, mesh_measures, minimize_riesz
from .study import (
    StudyConfig,
    plot_script,
    report_to_csv,
    report_to_json,
    run_convergence,
)

PARAM_NAMES = {1: ("theta",), 2: ("theta", "lambda")}

_REQUIRED_KEYS = ("manifold.name", "target.spec", "hierarchy")
_CONFIG_KEYS = _REQUIRED_KEYS + (
    "kernel.spec",
    "grid.resolution",
    "geodesic.resolution",
    "geodesic.knn",
    "seed",
    "trailing",
    "riesz.s",
    "riesz.max_iters",
    "check.l2_tol",
    "check.linf_tol",
    "output.dir",
)


# ------------------------------------------------------------- config files


def parse_config_text(text):
    """Parse ``key = value`` lines into a dict of raw strings.

    Blank lines and lines starting with ``#`` are skipped.  Raises
    ParseError with the offending 1-based line number.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, eq, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not eq or not key or not value:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        if key in values:
            raise ParseError(f"duplicate key {key!r}", line=lineno)
        values[key] = value
    return values


def _parse_resolution(text):
    """'default' -> None; 'A' -> int; 'AxB' -> (A, B)."""
    text = str(text).strip()
    if text == "default":
        return None
    parts = text.split("x")
    try:
        if len(parts) == 1:
            return int(parts[0])
        if len(parts) == 2:
            return (int(parts[0]), int(parts[1]))
    except ValueError:
        pass
    raise ConfigurationError(f"bad resolution {text!r}; expected N or NxM or default")


def _parse_hierarchy(text):
    try:
        return tuple(int(part) for part in str(text).split(","))
    except ValueError:
        raise ConfigurationError(
            f"bad hierarchy {text!r}; expected comma-separated integers"
        ) from None


_CASTERS = {
    "manifold.name": str,
    "kernel.spec": str,
    "target.spec": str,
    "hierarchy": _parse_hierarchy,
    "grid.resolution": _parse_resolution,
    "geodesic.resolution": _parse_resolution,
    "geodesic.knn": lambda s: None if s == "default" else int(s),
    "seed": int,
    "trailing": int,
    "riesz.s": float,
    "riesz.max_iters": int,
    "check.l2_tol": float,
    "check.linf_tol": float,
    "output.dir": str,
}


def study_config_from_text(text):
    """Build a StudyConfig from config-file text.

    Unknown and missing keys are reported together in one error.
    """
    raw = parse_config_text(text)
    unknown = sorted(set(raw) - set(_CONFIG_KEYS))
    missing = sorted(set(_REQUIRED_KEYS) - set(raw))
    problems = []
    if unknown:
        problems.append(f"unknown keys: {', '.join(unknown)}")
    if missing:
        problems.append(f"missing keys: {', '.join(missing)}")
    if problems:
        raise ConfigurationError("config problems: " + "; ".join(problems))
    cast = {}
    for key, value in raw.items():
        try:
            cast[key] = _CASTERS[key](value)
        except ValueError:
            raise ConfigurationError(f"bad value for {key}: {value!r}") from None
    return StudyConfig(
        manifold=cast["manifold.name"],
        target=cast["target.spec"],
        hierarchy=cast["hierarchy"],
        kernel=cast.get("kernel.spec", "wendland32"),
        grid_resolution=cast.get("grid.resolution"),
        geodesic_resolution=cast.get("geodesic.resolution"),
        knn=cast.get("geodesic.knn"),
        seed=cast.get("seed", 0),
        trailing=cast.get("trailing", 4),
        riesz_s=cast.get("riesz.s", 2.0),
        riesz_max_iters=cast.get("riesz.max_iters", 5000),
        check_l2_tol=cast.get("check.l2_tol", 0.5),
        check_linf_tol=cast.get("check.linf_tol", 0.5),
        out_dir=cast.get("output.dir"),
    )


def bundled_config_names():
    """Names of the configs shipped inside the package."""
    root = resources.files("manikern") / "configs"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def load_config_text(name_or_path):
    """Config text from a filesystem path or a bundled config name."""
    path = Path(name_or_path)
    if path.is_file():
        return path.read_text(), path.stem
    stem = name_or_path[:-4] if str(name_or_path).endswith(".cfg") else str(name_or_path)
    bundle = resources.files("manikern") / "configs" / f"{stem}.cfg"
    if bundle.is_file():
        return bundle.read_text(), stem
    raise ConfigurationError(
        f"no config file or bundled config named {name_or_path!r}; "
        f"bundled configs: {', '.join(bundled_config_names())}"
    )


# --------------------------------------------------------------- file I/O


def _format_row(values):
    return ",".join(repr(float(v)) for v in values)


def write_nodes_csv(path, nodes, config_line):
    """Node CSV: config comment, header of parameters then x,y,z."""
    k = nodes.manifold.k
    header = ",".join(PARAM_NAMES[k] + ("x", "y", "z"))
    lines = [config_line, header]
    for params, point in zip(nodes.params, nodes.points):
        lines.append(_format_row(list(params) + list(point)))
    Path(path).write_text("\n".join(lines) + "\n")


def read_nodes_csv(path, manifold):
    """Parameters from a node CSV written by ``write_nodes_csv``."""
    k = manifold.k
    header = ",".join(PARAM_NAMES[k] + ("x", "y", "z"))
    lines = Path(path).read_text().splitlines()
    rows = []
    seen_header = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not seen_header:
            if line != header:
                raise ParseError(
                    f"expected node header {header!r}, got {line!r}", line=lineno
                )
            seen_header = True
            continue
        parts = line.split(",")
        if len(parts) != k + 3:
            raise ParseError(f"expected {k + 3} fields, got {len(parts)}", line=lineno)
        try:
            rows.append([float(part) for part in parts[:k]])
        except ValueError:
            raise ParseError(f"non-numeric field in {line!r}", line=lineno) from None
    if not seen_header:
        raise ParseError(f"missing node header {header!r}", line=1)
    return np.asarray(rows, dtype=float)


def read_values(path):
    """One float per line; blank lines and ``#`` comments are skipped."""
    values = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise ParseError(f"non-numeric value {line!r}", line=lineno) from None
    return np.asarray(values, dtype=float)


def read_points_csv(path):
    """Evaluation points from a CSV with header ``x,y,z``."""
    lines = Path(path).read_text().splitlines()
    rows = []
    seen_header = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not seen_header:
            if line != "x,y,z":
                raise ParseError(f"expected header 'x,y,z', got {line!r}", line=lineno)
            seen_header = True
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ParseError(f"expected 3 fields, got {len(parts)}", line=lineno)
        try:
            rows.append([float(part) for part in parts])
        except ValueError:
            raise ParseError(f"non-numeric field in {line!r}", line=lineno) from None
    if not seen_header:
        raise ParseError("missing header 'x,y,z'", line=1)
    if not rows:
        raise ParseError("no evaluation points", line=len(lines))
    return np.asarray(rows, dtype=float)


def _print_json(obj):
    print(json.dumps(obj, indent=2))


# ------------------------------------------------------------- subcommands


def cmd_nodes(args):
    manifold = get_manifold(args.manifold)
    resolution = _parse_resolution(args.geodesic_resolution) if args.geodesic_resolution else None
    nodes = minimize_riesz(
        manifold, args.n, s=args.riesz_s, seed=args.seed, max_iters=args.max_iters
    )
    engine = manifold.geodesic_engine(resolution=resolution, knn=args.knn)
    measures = mesh_measures(nodes, engine=engine)
    config_line = (
        f"# manifold.name={manifold.name} n={args.n} riesz.s={args.riesz_s:g} "
        f"seed={args.seed} max_iters={args.max_iters} "
        f"geodesic.resolution={args.geodesic_resolution or 'default'} "
        f"geodesic.knn={args.knn if args.knn is not None else 'default'}"
    )
    write_nodes_csv(args.out, nodes, config_line)
    _print_json(
        {
            "n": len(nodes),
            "h": measures.h,
            "q": measures.q,
            "rho": measures.rho,
            "energy": nodes.energy,
            "provenance": nodes.provenance,
            "out": str(args.out),
        }
    )
    return 0


def cmd_mesh(args):
    manifold = get_manifold(args.manifold)
    resolution = _parse_resolution(args.geodesic_resolution) if args.geodesic_resolution else None
    params = read_nodes_csv(args.nodes, manifold)
    nodes = explicit_nodeset(manifold, params)
    engine = manifold.geodesic_engine(resolution=resolution, knn=args.knn)
    measures = mesh_measures(nodes, engine=engine)
    _print_json(
        {"n": len(nodes), "h": measures.h, "q": measures.q, "rho": measures.rho}
    )
    return 0


def cmd_interp(args):
    manifold = get_manifold(args.manifold)
    kernel = parse_kernel(args.kernel)
    params = read_nodes_csv(args.nodes, manifold)
    nodes = explicit_nodeset(manifold, params)
    values = read_values(args.data)
    if len(values) != len(nodes):
        raise ConfigurationError(
            f"{len(nodes)} nodes but {len(values)} data values"
        )
    interpolant = fit(kernel, nodes, values, ridge=args.ridge)
    points = read_points_csv(args.eval) if args.eval else nodes.points
    results = evaluate(interpolant, points)
    results = np.atleast_1d(results)
    config_line = (
        f"# manifold.name={manifold.name} kernel.spec={kernel.spec()} "
        f"nodes={args.nodes} data={args.data} eval={args.eval or 'nodes'} "
        f"ridge={args.ridge:g}"
    )
    lines = [config_line, "x,y,z,value"]
    for point, value in zip(points, results):
        lines.append(_format_row(list(point) + [value]))
    Path(args.out).write_text("\n".join(lines) + "\n")
    _print_json(
        {
            "n": len(nodes),
            "kernel": kernel.spec(),
            "condition_estimate": interpolant.condition_estimate,
            "node_residual": interpolant.node_residual,
            "inexact": interpolant.inexact,
            "evaluations": int(results.size),
            "out": str(args.out),
        }
    )
    return 0


def cmd_converge(args):
    text, stem = load_config_text(args.config)
    cfg = study_config_from_text(text)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    out_dir = Path(args.out or cfg.out_dir or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    report = run_convergence(cfg)
    csv_path = out_dir / f"{stem}.csv"
    json_path = out_dir / f"{stem}.json"
    plot_path = out_dir / f"{stem}_plot.py"
    csv_path.write_text(report_to_csv(report, timings=args.timings))
    json_path.write_text(report_to_json(report, timings=args.timings))
    plot_path.write_text(
        plot_script(report, csv_name=csv_path.name, image_name=f"{stem}.png")
    )
    pred = report.prediction
    checks = _check_slopes(report) if args.check else []
    _print_json(
        {
            "csv": str(csv_path),
            "json": str(json_path),
            "plot": str(plot_path),
            "l2_slope": _none_if_nan(report.l2_slope),
            "linf_slope": _none_if_nan(report.linf_slope),
            "predicted_l2": pred["l2_rate"],
            "predicted_linf": pred["linf_rate"],
            "regime": pred["regime"],
            "warnings": report.warnings,
            "check": ("fail" if checks else "pass") if args.check else None,
        }
    )
    if checks:
        for line in checks:
            print(f"check failed: {line}", file=sys.stderr)
        return 3
    return 0


def _none_if_nan(value):
    return None if isinstance(value, float) and np.isnan(value) else value


def _check_slopes(report):
    """Slope-vs-prediction mismatches, empty when all bands hold."""
    pred = report.prediction
    cfg = report.config
    failures = []
    for label, slope, rate, tol in (
        ("l2", report.l2_slope, pred["l2_rate"], cfg.check_l2_tol),
        ("linf", report.linf_slope, pred["linf_rate"], cfg.check_linf_tol),
    ):
        if rate is None:
            continue
        if not np.isfinite(slope) or abs(slope - rate) > tol:
            failures.append(
                f"{label} slope {slope:.3f} outside {rate:g} +- {tol:g}"
            )
    return failures


# ------------------------------------------------------------------ parser


def build_parser():
    parser = argparse.ArgumentParser(
        prog="manikern",
        description="Kernel interpolation on embedded curves and surfaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    nodes = sub.add_parser("nodes", help="generate a Riesz-energy node set")
    nodes.add_argument("--manifold", required=True, choices=sorted(MANIFOLD_NAMES))
    nodes.add_argument("--n", type=int, required=True, help="node count")
    nodes.add_argument("--seed", type=int, default=0)
    nodes.add_argument("--riesz-s", type=float, default=2.0, help="energy exponent")
    nodes.add_argument("--max-iters", type=int, default=5000)
    nodes.add_argument("--geodesic-resolution", default=None, help="N or NxM")
    nodes.add_argument("--knn", type=int, default=None)
    nodes.add_argument("--out", default="nodes.csv")
    nodes.set_defaults(func=cmd_nodes)

    mesh = sub.add_parser("mesh", help="mesh measures of a node CSV")
    mesh.add_argument("--manifold", required=True, choices=sorted(MANIFOLD_NAMES))
    mesh.add_argument("--nodes", required=True, help="node CSV path")
    mesh.add_argument("--geodesic-resolution", default=None, help="N or NxM")
    mesh.add_argument("--knn", type=int, default=None)
    mesh.set_defaults(func=cmd_mesh)

    interp = sub.add_parser("interp", help="fit and evaluate once")
    interp.add_argument("--manifold", required=True, choices=sorted(MANIFOLD_NAMES))
    interp.add_argument("--kernel", default="wendland32", help="kernel spec string")
    interp.add_argument("--nodes", required=True, help="node CSV path")
    interp.add_argument("--data", required=True, help="values file, one per line")
    interp.add_argument("--eval", default=None, help="x,y,z CSV of evaluation points")
    interp.add_argument("--ridge", type=float, default=0.0)
    interp.add_argument("--out", default="interp_eval.csv")
    interp.set_defaults(func=cmd_interp)

    converge = sub.add_parser("converge", help="run a convergence study")
    converge.add_argument("config", help="config file path or bundled config name")
    converge.add_argument("--out", default=None, help="output directory")
    converge.add_argument("--seed", type=int, default=None, help="override config seed")
    converge.add_argument(
        "--check",
        action="store_true",
        help="exit nonzero when fitted slopes miss the predicted rates",
    )
    converge.add_argument(
        "--timings",
        action="store_true",
        help="write real wall times (breaks byte-identical reruns)",
    )
    converge.set_defaults(func=cmd_converge)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ManikernError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
