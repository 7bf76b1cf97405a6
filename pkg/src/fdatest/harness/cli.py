"""Command line entry point.

Exit codes: 0 on success, 2 for bad input or configuration, 3 when the data
make a statistic or its null distribution degenerate.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from ..errors import DegenerateError, FdaTestError, InputFormatError
from ..meantests import select_L
from ..nulldist import calibrate
from ..procsim import ShiftSpec, make_shift, sample_contaminated
from ..rng import DATA, derive_seed
from ..specops import pi1_hat, pi2_hat, sigma_hat, spectrum
from .config import ExperimentConfig, Scenario
from .experiments import (reference_model, run_asymptotic_power, run_null_size, run_power_curves,
                          run_robustness, run_single)
from .io import format_curves, parse_curves_csv

EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE = 0, 2, 3


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="experiment config (JSON)")
    common.add_argument("--seed", type=int, help="override master_seed (and the calibration seed)")
    common.add_argument("--replicates", type=int, help="override replicates")
    common.add_argument("--alpha", type=float, help="override alpha")
    common.add_argument("--mc-draws", type=int, help="override calib.mc_draws")
    common.add_argument("--calibration", choices=["sample", "reference"], help="override calibration mode")
    common.add_argument("--out", type=Path, help="output file (default: stdout)")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--w", type=Path, help="CSV of difference curves")
    data.add_argument("--x", type=Path, help="CSV of first-sample curves (paired mode)")
    data.add_argument("--y", type=Path, help="CSV of second-sample curves (paired mode)")

    p = argparse.ArgumentParser(prog="fdatest", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("test", parents=[common, data], help="run the tests on one dataset (JSON)")
    sim = sub.add_parser("simulate", parents=[common], help="write simulated curves (CSV)")
    sim.add_argument("--n", type=int, help="number of curves (default: config n)")
    sim.add_argument("--shift", help="location shift as family:c, e.g. eta2:0.8")
    sim.add_argument("--epsilon", type=float, help="contamination level")
    sub.add_parser("power", parents=[common], help="empirical size or power curves (CSV)")
    sub.add_parser("asymp-power", parents=[common], help="asymptotic power curves (CSV)")
    sub.add_parser("robustness", parents=[common], help="sizes and powers under contamination (CSV)")
    sub.add_parser("calibrate", parents=[common, data],
                   help="null eigenvalues and critical values (JSON)")
    return p


def _config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    changes = {}
    if args.seed is not None:
        if args.seed < 0:
            raise InputFormatError("--seed must be non-negative")
        changes["master_seed"] = args.seed
        changes["calib"] = dataclasses.replace(cfg.calib, seed=args.seed)
    if args.replicates is not None:
        changes["replicates"] = args.replicates
    if args.alpha is not None:
        changes["alpha"] = args.alpha
    if args.mc_draws is not None:
        changes["calib"] = dataclasses.replace(changes.get("calib", cfg.calib), mc_draws=args.mc_draws)
    if args.calibration is not None:
        changes["calibration"] = args.calibration
    try:
        return cfg.replace(**changes) if changes else cfg
    except ValueError as exc:
        raise InputFormatError(str(exc)) from exc


def _data(args):
    if args.w is not None:
        if args.x is not None or args.y is not None:
            raise InputFormatError("give either --w or --x/--y, not both")
        return parse_curves_csv(args.w)
    if args.x is not None and args.y is not None:
        return parse_curves_csv(args.x, args.y)
    if args.x is not None or args.y is not None:
        raise InputFormatError("paired mode needs both --x and --y")
    return None


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        out.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")


def _cmd_test(args, cfg):
    sample = _data(args)
    if sample is None:
        raise InputFormatError("test needs --w or --x/--y")
    res = run_single(cfg.replace(scenario=Scenario.SINGLE_DATASET), sample)
    _emit(res.to_json(), args.out)


def _cmd_simulate(args, cfg):
    grid = cfg.grid.build()
    spec = cfg.process.build(grid, args.epsilon)
    shift = None
    if args.shift:
        family, _, c = args.shift.partition(":")
        try:
            shift = make_shift(ShiftSpec(family, float(c or 1.0)), grid)
        except ValueError as exc:
            raise InputFormatError(f"--shift: {exc}") from exc
    n = args.n or cfg.n
    if n < 1:
        raise InputFormatError("--n must be >= 1")
    sample = sample_contaminated(spec, n, derive_seed(cfg.master_seed, DATA, 0), shift=shift)
    _emit(format_curves(grid, sample.values), args.out)


def _cmd_power(args, cfg):
    runner = run_null_size if cfg.scenario is Scenario.NULL_SIZE else run_power_curves
    _emit(runner(cfg).to_csv(), args.out)


def _cmd_asymp(args, cfg):
    _emit(run_asymptotic_power(cfg).to_csv(), args.out)


def _cmd_robustness(args, cfg):
    _emit(run_robustness(cfg).to_csv(), args.out)


def _cmd_calibrate(args, cfg):
    sample = _data(args)
    if sample is None:
        model_sample = reference_model(cfg).sample
        source = {"source": "reference", "reference_n": cfg.reference_n}
    else:
        model_sample = sample
        source = {"source": "data", "n": sample.n}
    tol = cfg.calib.drop_tol
    spectra = {
        "TS": spectrum(pi1_hat(model_sample), tol),
        "TSR": spectrum(pi2_hat(model_sample), tol),
    }
    sigma = spectrum(sigma_hat(model_sample), tol)
    out = {**source, "alpha": cfg.alpha, "mc_draws": cfg.calib.mc_draws, "seed": cfg.calib.seed,
           "tests": {}}
    idx = {"TS": 0, "TSR": 1, "T1": 2, "T2": 3, "T3": 4}
    for test in cfg.tests:
        entry = {}
        if test in spectra:
            weights = spectra[test].eigenvalues
        elif test == "T1":
            weights = sigma.eigenvalues
        else:
            L = select_L(sigma, cfg.mean_config)
            entry["L"] = L
            weights = sigma.eigenvalues[:L] if test == "T2" else [1.0] * L
        if len(weights) == 0:
            raise DegenerateError("null distribution degenerate")
        cal = calibrate(weights, cfg.alpha, cfg.calib, idx[test])
        entry.update({"critical_value": cal.critical_value, "eigenvalues": [float(x) for x in weights]})
        out["tests"][test] = entry
    _emit(json.dumps(out, sort_keys=True, indent=2), args.out)


_COMMANDS = {
    "test": _cmd_test,
    "simulate": _cmd_simulate,
    "power": _cmd_power,
    "asymp-power": _cmd_asymp,
    "robustness": _cmd_robustness,
    "calibrate": _cmd_calibrate,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = _config(args)
        _COMMANDS[args.command](args, cfg)
    except DegenerateError as exc:
        print(f"fdatest: degenerate: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (FdaTestError, ValueError, OSError) as exc:
        print(f"fdatest: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
