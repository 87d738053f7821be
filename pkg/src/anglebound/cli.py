"""Command-line front end.

Subcommands:
  figure  — reproduce a simulation figure grid: per-cell CSV, aggregate CSV,
            one SVG per panel, and a manifest JSON.
  verify  — run a randomized property suite and report per-property results.
  fit     — fit a constrained surrogate minimizer to an exported CSV dataset
            and write a JSON report.
  sweep   — run a single sweep described by a flat key=value config file.

Exit codes: 0 success, 1 property violation, 2 I/O failure, 3 validation
failure.  Worker count is capped by the DR_THREADS environment variable.
"""

import argparse
import hashlib
import json
import math
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .exceptions import AngleBoundError
from .experiment import (ExperimentConfig, figure_configs, run_sweep, sweep_agg_rows,
                         sweep_cells_rows, worker_count, write_agg_csv, write_cells_csv)
from .risk import bound_margin, bound_sin_values
from .surrogate import empirical_phi_risk, fit_constrained_least_squares, fit_projected_gradient
from .svgplot import line_chart
from .synth import FeatureLaw, LinkFunction, dataset_from_csv
from .verify import SUITES, run_suites

EXIT_OK = 0
EXIT_PROPERTY = 1
EXIT_IO = 2
EXIT_VALIDATION = 3

VERIFY_SUITE_MAP = {
    "geometry": ("geometry",),
    "bounds": ("bounds",),
    "rotinv": ("rotinv",),
    "solvers": ("solvers", "calibration"),
    "all": ("geometry", "bounds", "rotinv", "solvers", "calibration"),
}


def _utc_now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _config_record(config):
    return {
        "cell_id": config.cell_id,
        "law": {"kind": config.law.kind, "dim": config.law.dim, "scale": config.law.scale,
                "correlation": config.law.correlation if config.law.is_correlated else None},
        "link": config.link.kind,
        "beta_star": list(config.beta_star),
        "loss": config.loss,
        "radius": "inf" if math.isinf(config.radius) else config.radius,
        "train_sizes": list(config.train_sizes),
        "replicates": config.replicates,
        "eval_size": config.eval_size,
        "base_seed": config.base_seed,
    }


def _write_manifest(out_dir, command, configs, base_seed, output_paths, started_at):
    records = [_config_record(c) for c in configs]
    digest = hashlib.sha256(
        json.dumps(records, sort_keys=True, separators=(",", ":")).encode()).hexdigest()
    manifest = {
        "command": command,
        "config_digest": digest,
        "base_seed": base_seed,
        "tool_version": __version__,
        "started_at": started_at,
        "finished_at": _utc_now(),
        "output_paths": [str(p) for p in output_paths],
        "configs": records,
    }
    path = out_dir / "manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _check_out_dir(out_dir):
    out_dir.mkdir(parents=True, exist_ok=True)
    probe = out_dir / ".write_probe"
    probe.write_text("")
    probe.unlink()


def _panel_series(sweeps, key):
    series = []
    for sweep in sweeps:
        xs, ys = [], []
        for row in sweep.aggregates:
            if row["n_ok"] > 0:
                xs.append(row["train_size"])
                ys.append(row[f"mean_{key}"])
        if xs:
            series.append((sweep.config.cell_id, xs, ys))
    return series


def cmd_figure(args):
    from pathlib import Path

    out_dir = Path(args.out)
    started = _utc_now()
    try:
        configs = figure_configs(args.figure_id, base_seed=args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        _check_out_dir(out_dir)
    except OSError as exc:
        print(f"error: output directory not writable: {exc}", file=sys.stderr)
        return EXIT_IO
    sweeps = [run_sweep(cfg) for cfg in configs]
    fid = args.figure_id
    outputs = []
    try:
        cells_path = out_dir / f"{fid}_cells.csv"
        agg_path = out_dir / f"{fid}_agg.csv"
        write_cells_csv(sweeps, cells_path)
        write_agg_csv(sweeps, agg_path)
        outputs += [cells_path, agg_path]
        panels = (("panel_a", "excess_01", "excess 0-1 risk"),
                  ("panel_b", "excess_phi", "excess surrogate risk"))
        for tag, key, label in panels:
            svg = line_chart(_panel_series(sweeps, key), title=f"{fid} {tag}",
                             xlabel="training size", ylabel=label, log_x=True)
            path = out_dir / f"{fid}_{tag}.svg"
            path.write_text(svg, encoding="utf-8")
            outputs.append(path)
        outputs.append(_write_manifest(out_dir, f"figure {fid}", configs,
                                       configs[0].base_seed, outputs, started))
    except OSError as exc:
        print(f"error: failed to write outputs: {exc}", file=sys.stderr)
        return EXIT_IO
    for p in outputs:
        print(p)
    return EXIT_OK


def cmd_verify(args):
    names = VERIFY_SUITE_MAP[args.suite]
    results = run_suites(names, args.trials, args.seed)
    failed = [r for r in results if not r.passed]
    for r in results:
        print(r.line())
    if failed:
        print(f"{len(failed)} propert{'y' if len(failed) == 1 else 'ies'} violated; "
              f"reproduce with --seed {args.seed} --trials {args.trials}", file=sys.stderr)
        return EXIT_PROPERTY
    return EXIT_OK


def cmd_fit(args):
    from pathlib import Path

    try:
        x, y, pstar = dataset_from_csv(args.dataset_csv)
    except OSError as exc:
        print(f"error: cannot read {args.dataset_csv}: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: malformed CSV: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    radius = math.inf if args.radius in ("inf", None) else float(args.radius)
    try:
        if args.loss == "square":
            fit = fit_constrained_least_squares(x, y, radius)
        else:
            fit = fit_projected_gradient(x, y, args.loss, radius)
    except AngleBoundError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    report = {
        "loss": args.loss,
        "radius": "inf" if math.isinf(radius) else radius,
        "beta_tilde": [float(b) for b in fit.beta_tilde],
        "lagrange_multiplier": fit.lagrange_multiplier,
        "active": fit.active,
        "iterations": fit.iterations,
        "final_gradient_norm": fit.final_gradient_norm,
        "objective_value": fit.objective_value,
        "converged": fit.converged,
        "n": int(x.shape[0]),
        "dim": int(x.shape[1]),
    }
    if pstar is not None:
        fstar = 2.0 * pstar - 1.0
        f = x @ fit.beta_tilde
        try:
            b_sin, angle, fstar_norm = bound_sin_values(f, fstar)
            report.update({
                "sine_theta": angle.sine,
                "fstar_norm": fstar_norm,
                "bound_sin": b_sin,
                "bound_bartlett": float(np.sqrt(np.mean((f - fstar) ** 2))),
            })
        except AngleBoundError:
            pstar = None
    if pstar is None:
        report.update({"sine_theta": None, "fstar_norm": None, "bound_sin": None,
                       "bound_bartlett": None})
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    try:
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def parse_config_file(path):
    """Flat key=value sweep config mirroring ExperimentConfig fields."""
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"line {lineno}: expected key = value")
            key, _, val = line.partition("=")
            values[key.strip()] = val.strip()
    required = ("law", "dim", "link", "beta_star", "loss")
    for key in required:
        if key not in values:
            raise ValueError(f"missing required key {key!r}")
    law = FeatureLaw(kind=values["law"], dim=int(values["dim"]),
                     scale=float(values.get("scale", 1.0)),
                     correlation=float(values.get("correlation", 0.8)))
    beta_star = tuple(float(b) for b in values["beta_star"].replace(";", ",").split(","))
    radius_raw = values.get("radius", "inf")
    radius = math.inf if radius_raw == "inf" else float(radius_raw)
    kwargs = {}
    if "train_sizes" in values:
        kwargs["train_sizes"] = tuple(int(s) for s in values["train_sizes"].split(","))
    for key, cast in (("replicates", int), ("eval_size", int), ("base_seed", int)):
        if key in values:
            kwargs[key] = cast(values[key])
    return ExperimentConfig(law=law, link=LinkFunction(values["link"]),
                            beta_star=beta_star, loss=values["loss"], radius=radius,
                            cell_id=values.get("cell_id", "sweep"),
                            figure=values.get("figure", "custom"), **kwargs)


def cmd_sweep(args):
    from pathlib import Path

    started = _utc_now()
    try:
        config = parse_config_file(args.config)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, AngleBoundError) as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.seed is not None:
        from dataclasses import replace
        config = replace(config, base_seed=args.seed)
    out_dir = Path(args.out)
    try:
        _check_out_dir(out_dir)
    except OSError as exc:
        print(f"error: output directory not writable: {exc}", file=sys.stderr)
        return EXIT_IO
    sweep = run_sweep(config)
    tag = config.cell_id
    outputs = []
    try:
        cells_path = out_dir / f"{tag}_cells.csv"
        agg_path = out_dir / f"{tag}_agg.csv"
        write_cells_csv([sweep], cells_path)
        write_agg_csv([sweep], agg_path)
        outputs += [cells_path, agg_path]
        svg = line_chart(_panel_series([sweep], "excess_01"), title=tag,
                         xlabel="training size", ylabel="excess 0-1 risk", log_x=True)
        svg_path = out_dir / f"{tag}_excess01.svg"
        svg_path.write_text(svg, encoding="utf-8")
        outputs.append(svg_path)
        outputs.append(_write_manifest(out_dir, "sweep", [config], config.base_seed,
                                       outputs, started))
    except OSError as exc:
        print(f"error: failed to write outputs: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"verdict: {sweep.calibration_verdict}")
    for p in outputs:
        print(p)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="anglebound",
        description="Angle-based excess-risk bounds and the simulation study harness. "
                    "Exit codes: 0 success, 1 property violation, 2 I/O failure, "
                    "3 validation failure.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_fig = sub.add_parser("figure", help="reproduce a figure grid")
    p_fig.add_argument("figure_id", choices=("fig4", "fig5", "fig6"))
    p_fig.add_argument("--out", default="results", help="output directory")
    p_fig.add_argument("--seed", type=int, default=None, help="base seed override")
    p_fig.set_defaults(func=cmd_figure)

    p_ver = sub.add_parser("verify", help="run a randomized property suite")
    p_ver.add_argument("suite", choices=tuple(VERIFY_SUITE_MAP))
    p_ver.add_argument("--trials", type=int, default=100)
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.set_defaults(func=cmd_verify)

    p_fit = sub.add_parser("fit", help="fit a constrained minimizer to a CSV dataset")
    p_fit.add_argument("dataset_csv")
    p_fit.add_argument("--loss", choices=("square", "logistic"), default="square")
    p_fit.add_argument("--radius", default="inf")
    p_fit.add_argument("--out", default=None, help="report JSON path (default stdout)")
    p_fit.set_defaults(func=cmd_fit)

    p_sw = sub.add_parser("sweep", help="run a sweep from a key=value config file")
    p_sw.add_argument("config")
    p_sw.add_argument("--out", default="results")
    p_sw.add_argument("--seed", type=int, default=None)
    p_sw.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "verify" and args.trials < 1:
        print("error: --trials must be >= 1", file=sys.stderr)
        return EXIT_VALIDATION
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
