"""Command-line front end.

Subcommands: ``analyze`` (decay table for a set of directions), ``curve``
(boundary samples plus named points, with a rendered figure), ``verify``
(analytic rates against truncated-window slope fits) and ``validate``
(model invariant check).  Models come either from a JSON file or from the
built-in limited-service two-queue system.

Exit codes: 0 success, 1 verification band failure, 2 usage error,
3 invalid model, 4 unstable model, 5 solver non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .directional import classify_type, xi_c
from .geometry import (
    DirectionVector,
    compute_geometry,
    directional_tangency,
    theta_extremes,
    _context as _geometry_context,
)
from .matrix_analytic import (
    GNonConvergenceError,
    StabilityError,
    StabilityVerdict,
    coordinate_profile,
)
from .model import ModelFormatError, load_model, validate
from .oracle import (
    OracleConvergenceError,
    OracleFitError,
    dump_stationary_csv,
    fit_decay,
    solve_truncated,
)
from .polling import LimitedServiceParams, build_limited_service
from .reporting import (
    analysis_bundle_dict,
    direction_label,
    render_analysis_csv,
    render_analysis_text,
    render_json,
    render_verify_csv,
    render_verify_text,
)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INVALID_MODEL = 3
EXIT_UNSTABLE = 4
EXIT_NO_CONVERGENCE = 5

DEFAULT_DIRECTIONS = ((1, 0), (2, 1), (1, 1), (1, 2), (0, 1))


@dataclass
class AnalysisConfig:
    """Resolved CLI options: model source, directions, oracle settings."""

    source: dict
    model: object
    directions: tuple
    fmt: str = "text"
    out: Path | None = None
    oracle_n: int = 60
    band: float = 0.10
    window: tuple | None = None
    samples: int = 512
    plot: bool = True
    dump: Path | None = None


def _parse_direction(token):
    try:
        c1_str, c2_str = token.split(",")
        return DirectionVector(int(c1_str), int(c2_str))
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(
            f"direction must look like 'c1,c2' with nonnegative integers, got {token!r}"
        ) from exc


def _add_model_arguments(parser):
    parser.add_argument("--model", type=Path, help="path to a JSON model file")
    parser.add_argument(
        "--builtin",
        choices=["limited-service"],
        help="use a built-in model family instead of a file",
    )
    parser.add_argument("--l1", type=float, help="queue-1 arrival rate")
    parser.add_argument("--l2", type=float, help="queue-2 arrival rate")
    parser.add_argument("--m1", type=float, help="queue-1 service rate")
    parser.add_argument("--m2", type=float, help="queue-2 service rate")
    parser.add_argument("--K", type=int, help="queue-2 visit limit")


def _resolve_model(args, parser):
    if args.model is not None and args.builtin is not None:
        parser.error("--model and --builtin are mutually exclusive")
    if args.model is not None:
        try:
            return {"path": str(args.model)}, load_model(args.model)
        except (OSError, ModelFormatError, ValueError) as exc:
            print(f"error: cannot load model: {exc}", file=sys.stderr)
            raise SystemExit(EXIT_INVALID_MODEL) from exc
    if args.builtin == "limited-service":
        missing = [k for k in ("l1", "l2", "m1", "m2", "K") if getattr(args, k) is None]
        if missing:
            parser.error(f"--builtin limited-service requires --{' --'.join(missing)}")
        try:
            params = LimitedServiceParams(args.l1, args.l2, args.m1, args.m2, args.K)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            raise SystemExit(EXIT_INVALID_MODEL) from exc
        source = {
            "builtin": "limited-service",
            "params": {
                "lambda1": args.l1,
                "lambda2": args.l2,
                "mu1": args.m1,
                "mu2": args.m2,
                "K": args.K,
            },
        }
        return source, build_limited_service(params)
    parser.error("one of --model or --builtin is required")


def _require_valid(model):
    violations = validate(model)
    if violations:
        for violation in violations:
            print(f"invalid model: {violation}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID_MODEL)


def _require_stable(model):
    profile = coordinate_profile(model)
    if profile.stability is not StabilityVerdict.POSITIVE_RECURRENT:
        print(f"model is not positive recurrent: {profile.stability.value}", file=sys.stderr)
        raise SystemExit(EXIT_UNSTABLE)
    return profile


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def cmd_analyze(config):
    profile = _require_stable(config.model)
    extremes = theta_extremes(config.model)
    classification = classify_type(config.model, profile)
    reports = [xi_c(config.model, c, profile) for c in config.directions]
    bundle = analysis_bundle_dict(config.source, profile, extremes, classification, reports)
    if config.fmt == "json":
        _emit(render_json(bundle), config.out)
    elif config.fmt == "csv":
        _emit(render_analysis_csv(bundle), config.out)
    else:
        _emit(render_analysis_text(bundle), config.out)
    return EXIT_OK


def _named_points(model, profile, directions):
    ctx = _geometry_context(model)
    t1max = ctx.extremes()[1]
    t2max = ctx.extremes()[3]
    points = {
        "P1": ctx.extreme_point("right"),
        "P2": ctx.extreme_point("top"),
        "Q1": (profile.theta1_star, ctx.eta_roots(min(profile.theta1_star, t1max), 1)[1]),
        "Q2": (ctx.eta_roots(min(profile.theta2_star, t2max), 2)[1], profile.theta2_star),
    }
    for c in directions:
        points[f"R_({c.c1},{c.c2})"] = directional_tangency(model, c)
    return points


def _points_csv(points):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["label", "theta1", "theta2"])
    for label in sorted(points):
        x, y = points[label]
        writer.writerow([label, repr(float(x)), repr(float(y))])
    return buffer.getvalue()


def _samples_csv(geometry):
    lines = ["theta1,theta2"]
    for x, y in geometry.boundary_samples:
        lines.append(f"{float(x)!r},{float(y)!r}")
    return "\n".join(lines) + "\n"


def cmd_curve(config):
    profile = _require_stable(config.model)
    geometry = compute_geometry(config.model, samples=config.samples)
    points = _named_points(config.model, profile, config.directions)
    if config.fmt == "json":
        payload = {
            "samples": [[float(x), float(y)] for x, y in geometry.boundary_samples],
            "points": {label: [float(v) for v in p] for label, p in points.items()},
        }
        _emit(render_json(payload), config.out)
    else:
        if config.out is None:
            sys.stdout.write(_samples_csv(geometry))
            sys.stdout.write("\n")
            sys.stdout.write(_points_csv(points))
        else:
            out = Path(config.out)
            out.write_text(_samples_csv(geometry), encoding="utf-8")
            out.with_suffix(".points.csv").write_text(_points_csv(points), encoding="utf-8")
    if config.plot and config.out is not None:
        from .plotting import render_curve_figure

        render_curve_figure(geometry, points, Path(config.out).with_suffix(".png"))
    return EXIT_OK


def cmd_verify(config):
    profile = _require_stable(config.model)
    try:
        ts = solve_truncated(config.model, config.oracle_n)
    except OracleConvergenceError as exc:
        print(f"oracle failed to converge: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_NO_CONVERGENCE) from exc
    if config.dump is not None:
        dump_stationary_csv(ts, config.dump)
    rows = []
    for c in config.directions:
        label = direction_label(c.as_tuple())
        analytic = xi_c(config.model, c, profile).xi
        try:
            fit = fit_decay(ts, c, 0, window=config.window)
        except OracleFitError as exc:
            rows.append({"direction": c.as_tuple(), "label": label, "error": str(exc)})
            continue
        fitted = -fit.slope
        rel_gap = abs(fitted - analytic) / analytic if analytic > 0 else float("inf")
        rows.append(
            {
                "direction": c.as_tuple(),
                "label": label,
                "analytic": analytic,
                "fitted": fitted,
                "rel_gap": rel_gap,
                "pass": rel_gap <= config.band,
                "fit": fit,
            }
        )
    if config.fmt == "json":
        payload = {
            "N": ts.N,
            "band": config.band,
            "solver_residual": ts.solver_residual,
            "rows": [
                {k: v for k, v in row.items() if k != "fit"}
                | ({"fit": row["fit"].to_dict()} if "fit" in row else {})
                for row in rows
            ],
        }
        _emit(render_json(payload), config.out)
    elif config.fmt == "csv":
        _emit(render_verify_csv(rows), config.out)
    else:
        _emit(render_verify_text(rows, config.band), config.out)
    if config.plot and config.out is not None:
        from .plotting import render_verify_figure

        render_verify_figure(ts, rows, Path(config.out).with_suffix(".png"))
    all_ok = all(row.get("pass") for row in rows)
    return EXIT_OK if all_ok else EXIT_VERIFY_FAILED


def cmd_validate(config):
    violations = validate(config.model)
    if config.fmt == "json":
        payload = [
            {
                "kind": v.kind,
                "region": v.region,
                "step": list(v.step),
                "row": v.row,
                "residual": v.residual,
            }
            for v in violations
        ]
        _emit(render_json(payload), config.out)
    else:
        if violations:
            for violation in violations:
                print(str(violation))
        else:
            print(f"model valid (s0={config.model.s0})")
    return EXIT_OK if not violations else EXIT_INVALID_MODEL


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qbd2d",
        description="Stationary tail decay rates of 2d quasi-birth-and-death processes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = dict(formatter_class=argparse.ArgumentDefaultsHelpFormatter)

    p_analyze = sub.add_parser("analyze", help="decay rates for a set of directions", **common)
    _add_model_arguments(p_analyze)
    p_analyze.add_argument("--dirs", nargs="+", type=_parse_direction,
                           default=[DirectionVector(*c) for c in DEFAULT_DIRECTIONS],
                           help="directions as c1,c2 tokens")
    p_analyze.add_argument("--format", choices=["text", "json", "csv"], default="text")
    p_analyze.add_argument("--out", type=Path, default=None)

    p_curve = sub.add_parser("curve", help="boundary samples and named points", **common)
    _add_model_arguments(p_curve)
    p_curve.add_argument("--dirs", nargs="+", type=_parse_direction,
                         default=[DirectionVector(1, 1)])
    p_curve.add_argument("--samples", type=int, default=512)
    p_curve.add_argument("--format", choices=["csv", "json"], default="csv")
    p_curve.add_argument("--out", type=Path, default=None)
    p_curve.add_argument("--no-plot", action="store_true",
                         help="skip the PNG figure next to --out")

    p_verify = sub.add_parser("verify", help="analytic rates vs truncated-window slopes", **common)
    _add_model_arguments(p_verify)
    p_verify.add_argument("--dirs", nargs="+", type=_parse_direction,
                          default=[DirectionVector(*c) for c in DEFAULT_DIRECTIONS])
    p_verify.add_argument("--N", type=int, default=60, help="truncation level")
    p_verify.add_argument("--band", type=float, default=0.10,
                          help="relative tolerance for pass/fail")
    p_verify.add_argument("--window", nargs=2, type=int, default=None,
                          metavar=("K_LO", "K_HI"), help="fit window in ray steps")
    p_verify.add_argument("--format", choices=["text", "json", "csv"], default="text")
    p_verify.add_argument("--out", type=Path, default=None)
    p_verify.add_argument("--no-plot", action="store_true")
    p_verify.add_argument("--dump", type=Path, default=None,
                          help="also write the window solution as x1,x2,j,prob CSV")

    p_validate = sub.add_parser("validate", help="check model invariants", **common)
    _add_model_arguments(p_validate)
    p_validate.add_argument("--format", choices=["text", "json"], default="text")
    p_validate.add_argument("--out", type=Path, default=None)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    source, model = _resolve_model(args, parser)
    config = AnalysisConfig(
        source=source,
        model=model,
        directions=tuple(getattr(args, "dirs", ()) or ()),
        fmt=getattr(args, "format", "text"),
        out=getattr(args, "out", None),
        oracle_n=getattr(args, "N", 60),
        band=getattr(args, "band", 0.10),
        window=tuple(args.window) if getattr(args, "window", None) else None,
        samples=getattr(args, "samples", 512),
        plot=not getattr(args, "no_plot", False),
        dump=getattr(args, "dump", None),
    )
    if args.command != "validate":
        _require_valid(config.model)
    try:
        if args.command == "analyze":
            return cmd_analyze(config)
        if args.command == "curve":
            return cmd_curve(config)
        if args.command == "verify":
            return cmd_verify(config)
        if args.command == "validate":
            return cmd_validate(config)
    except StabilityError as exc:
        print(f"stability error: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except GNonConvergenceError as exc:
        print(f"solver failed to converge: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    parser.error(f"unknown command {args.command}")


if __name__ == "__main__":
    raise SystemExit(main())
