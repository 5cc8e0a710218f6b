"""Command-line front end.

Exit codes: 0 success, 2 bad configuration, 3 bad or missing data,
4 solver did not converge (artifacts are still written).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from lutherfilter.basis import PRESET_SIZES
from lutherfilter.data_io import (
    DataFormatError,
    Kind,
    load_filter,
    load_spectral_csv,
    save_solution,
)
from lutherfilter.datasets import data_path
from lutherfilter.evaluation import colour_experiment, nrmse
from lutherfilter.solver import SolverConfig, luth_unconstrained, multi_start
from lutherfilter.spectral import GridMismatchError, SensorSet, SpectralSample

log = logging.getLogger("lutherfilter")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NONCONVERGED = 0, 2, 3, 4

TABLE_HEADER = ("method", "nrmse", "de_mean", "de_median", "de_p95", "de_max")


class ConfigError(ValueError):
    pass


@dataclass
class Inputs:
    camera: SensorSet
    cmfs: SensorSet
    lights: list | None
    light_names: list | None
    surfaces: list | None


def _load_inputs(args) -> Inputs:
    camera = load_spectral_csv(args.camera, Kind.SENSITIVITY).sensor_set(args.normalize_camera)
    cmfs = load_spectral_csv(args.cmf, Kind.CMF).sensor_set()
    if (args.illuminants is None) != (args.reflectances is None):
        raise ConfigError("--illuminants and --reflectances must be given together")
    lights = names = surfaces = None
    if args.illuminants is not None:
        table = load_spectral_csv(args.illuminants, Kind.ILLUMINANT)
        lights, names = table.samples(), table.names
        surfaces = load_spectral_csv(args.reflectances, Kind.REFLECTANCE).samples()
    return Inputs(camera, cmfs, lights, names, surfaces)


def _evaluate(inputs: Inputs, filt: SpectralSample | None, args) -> dict:
    if inputs.lights is None:
        effective = inputs.camera.filtered(filt) if filt is not None else inputs.camera
        return {"nrmse": nrmse(effective, inputs.cmfs)}
    report = colour_experiment(
        inputs.camera,
        filt,
        inputs.cmfs,
        inputs.lights,
        inputs.surfaces,
        illuminant_names=inputs.light_names,
        pooled_p95=args.pooled_p95,
        preserve_white=args.preserve_white,
    )
    return report.to_dict()


def _row(label: str, report: dict) -> list:
    keys = ("nrmse", "delta_e_mean", "delta_e_median", "delta_e_p95", "delta_e_max")
    return [label] + [report.get(k) for k in keys]


def _write_table(path: Path, rows: list) -> None:
    lines = [",".join(TABLE_HEADER)]
    for row in rows:
        lines.append(",".join([row[0]] + ["" if v is None else repr(float(v)) for v in row[1:]]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _print_table(rows: list) -> None:
    print(f"{'method':<14}" + "".join(f"{h:>11}" for h in TABLE_HEADER[1:]))
    for row in rows:
        cells = "".join(f"{'-':>11}" if v is None else f"{v:>11.3f}" for v in row[1:])
        print(f"{row[0]:<14}{cells}")


def _solver_config(args, basis_m=None, f_min=None) -> SolverConfig:
    try:
        return SolverConfig(
            basis_m=args.basis_m if basis_m is None else basis_m,
            f_min=args.fmin if f_min is None else f_min,
            f_max=args.fmax,
            epsilon=args.epsilon,
            max_iters=args.max_iters,
            normalize_epsilon=not args.raw_epsilon,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _run_config(args) -> dict:
    resolved = {}
    for key, value in sorted(vars(args).items()):
        if key == "func":
            continue
        resolved[key] = str(value) if isinstance(value, Path) else value
    return resolved


def cmd_optimize(args) -> int:
    inputs = _load_inputs(args)
    config = _solver_config(args)
    if config.basis_m > inputs.camera.n_samples:
        raise ConfigError(f"--basis-m {config.basis_m} exceeds {inputs.camera.n_samples} samples")
    solution = multi_start(inputs.camera, inputs.cmfs, config, args.multi_start, args.seed)
    baseline = _evaluate(inputs, None, args)
    filtered = _evaluate(inputs, solution.filter, args)
    label = f"LUTH_{config.basis_m}cos"
    rows = [_row("Linear", baseline), _row(label, filtered)]
    if args.with_luth:
        luth = luth_unconstrained(inputs.camera, inputs.cmfs, max_iters=args.max_iters)
        rows.insert(1, _row("LUTH", _evaluate(inputs, luth.filter, args)))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    filtered = dict(filtered, run_config=_run_config(args))
    save_solution(solution, filtered, out / "filter.csv")
    _write_table(out / "evaluation.csv", rows)
    _summary(baseline, filtered, solution.converged)
    return EXIT_OK if solution.converged else EXIT_NONCONVERGED


def cmd_luth(args) -> int:
    inputs = _load_inputs(args)
    solution = luth_unconstrained(
        inputs.camera,
        inputs.cmfs,
        max_iters=args.max_iters,
        epsilon=args.epsilon,
        normalize_epsilon=not args.raw_epsilon,
    )
    baseline = _evaluate(inputs, None, args)
    filtered = _evaluate(inputs, solution.filter, args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_solution(solution, dict(filtered, run_config=_run_config(args)), out / "luth_filter.csv")
    _write_table(out / "evaluation.csv", [_row("Linear", baseline), _row("LUTH", filtered)])
    _summary(baseline, filtered, solution.converged)
    return EXIT_OK if solution.converged else EXIT_NONCONVERGED


def cmd_evaluate(args) -> int:
    inputs = _load_inputs(args)
    filt = None
    if args.filter is not None:
        filt = load_filter(args.filter, inputs.camera.grid)
    report = _evaluate(inputs, filt, args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = dict(report, run_config=_run_config(args))
    (out / "evaluation.json").write_text(
        json.dumps(payload, indent=2, allow_nan=False) + "\n", encoding="utf-8"
    )
    label = "filtered" if filt is not None else "Linear"
    _write_table(out / "evaluation.csv", [_row(label, report)])
    _print_table([_row(label, report)])
    return EXIT_OK


def cmd_report(args) -> int:
    """Table of the baseline, LUTH, basis-size and lower-bound variants."""
    inputs = _load_inputs(args)
    rows = [_row("Linear", _evaluate(inputs, None, args))]
    converged = True
    luth = luth_unconstrained(inputs.camera, inputs.cmfs, max_iters=args.max_iters)
    converged &= luth.converged
    rows.append(_row("LUTH", _evaluate(inputs, luth.filter, args)))
    for m in PRESET_SIZES:
        sol = multi_start(inputs.camera, inputs.cmfs, _solver_config(args, basis_m=m),
                          args.multi_start, args.seed)
        converged &= sol.converged
        rows.append(_row(f"LUTH_{m}cos", _evaluate(inputs, sol.filter, args)))
    for f_min in (0.2, 0.3, 0.4):
        sol = multi_start(inputs.camera, inputs.cmfs, _solver_config(args, f_min=f_min),
                          args.multi_start, args.seed)
        converged &= sol.converged
        rows.append(_row(f"f>={int(round(100 * f_min))}%", _evaluate(inputs, sol.filter, args)))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_table(out / "table.csv", rows)
    _print_table(rows)
    return EXIT_OK if converged else EXIT_NONCONVERGED


def _summary(before: dict, after: dict, converged: bool) -> None:
    parts = [f"NRMSE {before['nrmse']:.3f} -> {after['nrmse']:.3f}"]
    if "delta_e_mean" in before:
        parts.append(f"mean dE {before['delta_e_mean']:.2f} -> {after['delta_e_mean']:.2f}")
    if not converged:
        parts.append("NOT CONVERGED")
    print("; ".join(parts))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lutherfilter", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--camera", type=Path, required=True, help="camera sensitivity CSV")
    common.add_argument("--cmf", type=Path, default=data_path("cmf"),
                        help="colour matching function CSV (default: bundled CIE 1931 2 deg)")
    common.add_argument("--illuminants", type=Path, help="illuminant CSV, one column per light")
    common.add_argument("--reflectances", type=Path, help="reflectance CSV, one column per surface")
    common.add_argument("--out", type=Path, default=Path("out"))
    common.add_argument("--pooled-p95", action="store_true",
                        help="95th percentile of all errors pooled, not averaged per light")
    common.add_argument("--preserve-white", action="store_true",
                        help="constrain per-light corrections to map white exactly")
    common.add_argument("--normalize-camera", action="store_true",
                        help="scale camera sensitivities to a peak of 1")

    solve = argparse.ArgumentParser(add_help=False)
    solve.add_argument("--basis-m", type=int, default=8)
    solve.add_argument("--fmin", type=float, default=0.2)
    solve.add_argument("--fmax", type=float, default=1.0)
    solve.add_argument("--epsilon", type=float, default=1e-8)
    solve.add_argument("--raw-epsilon", action="store_true",
                       help="compare the raw sensitivity change against epsilon")
    solve.add_argument("--max-iters", type=int, default=500)
    solve.add_argument("--multi-start", type=int, default=1)
    solve.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("optimize", parents=[common, solve], help="solve for a smooth bounded filter")
    p.add_argument("--with-luth", action="store_true", help="add the unconstrained LUTH row")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("luth", parents=[common, solve], help="unconstrained per-wavelength filter")
    p.set_defaults(func=cmd_luth)

    p = sub.add_parser("evaluate", parents=[common], help="score a camera, optionally filtered")
    p.add_argument("--filter", type=Path, help="filter CSV (wavelength_nm,transmittance)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", parents=[common, solve], help="full comparison table")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if getattr(args, "multi_start", 1) < 1:
        parser.error("--multi-start must be at least 1")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, DataFormatError, GridMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
