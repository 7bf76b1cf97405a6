"""Monte Carlo drivers: null sizes, power curves, robustness tables and
asymptotic power.

Replicate ``r`` draws its curves from ``derive_seed(master_seed, DATA, r)``
and its calibration normals from ``derive_seed(master_seed, CALIBRATION, r)``.
Every cell of a run (shift magnitude, contamination level) reuses those
streams, so differences between cells are not blurred by independent noise.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ..fspace import Curve, PairedDiffSample, norm
from ..meantests import mean_test, select_L, t2, t3
from ..nulldist import CalibrationConfig, calibrate
from ..procsim import ContaminationSpec, draw_mixture, make_shift, sample_contaminated, shift_values
from ..rng import CALIBRATION, DATA, REFERENCE, derive_seed
from ..shrinkpower import NullModel, TestKind, asymp_power
from ..signstats import sign_test, signed_rank_test, t_s
from ..specops import FactoredOperator, pi1_hat, pi2_factors, sigma_hat, spectrum
from .config import CalibrationMode, ExperimentConfig, Scenario
from .io import write_table

_TEST_INDEX = {t: i for i, t in enumerate(TestKind)}


@dataclass
class ExperimentResult:
    """Cells of one experiment plus the config that produced them.

    ``wall_time`` is informational and is not written to output files, so
    that reruns produce identical bytes.
    """

    scenario: str
    columns: list
    rows: list
    config: dict
    wall_time: float = 0.0
    reports: list = field(default_factory=list)

    def cell(self, **match) -> dict:
        hits = [r for r in self.rows if all(_same(r.get(k), v) for k, v in match.items())]
        if len(hits) != 1:
            raise KeyError(f"{len(hits)} cells match {match}")
        return hits[0]

    def to_csv(self, path=None) -> str:
        return write_table(path, self.rows, self.columns, self.config)

    def to_json(self) -> str:
        body = {"scenario": self.scenario, "config": self.config}
        if self.reports:
            body["reports"] = self.reports
        else:
            body["rows"] = self.rows
        return json.dumps(body, sort_keys=True, indent=2)


def _same(a, b) -> bool:
    if isinstance(a, float) or isinstance(b, float):
        return a is not None and b is not None and math.isclose(float(a), float(b), abs_tol=1e-12)
    return a == b


def mc_se(p: float, replicates: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / replicates)


# -- one-dataset battery ----------------------------------------------------


def _mc_pvalue(sorted_draws: np.ndarray, observed: float) -> float:
    n = sorted_draws.size
    at_least = n - np.searchsorted(sorted_draws, observed, side="left")
    return float((1 + at_least) / (1 + n))


class Battery:
    """Evaluates a set of tests on one sample and returns ``(reject, p)``.

    In sample mode each test is calibrated from the sample's own spectrum,
    exactly as the single-test functions do. In reference mode the null
    laws come from a ``NullModel`` fitted once to a large clean sample; the
    number of components for T2 and T3 is still chosen per sample.
    """

    def __init__(self, tests, alpha: float, mean_config, calib: CalibrationConfig,
                 model: NullModel | None = None):
        self.tests = tuple(TestKind(t) for t in tests)
        self.alpha = alpha
        self.mean_config = mean_config
        self.calib = calib
        self.model = model
        self._sorted: dict = {}

    def run(self, sample: PairedDiffSample, calib_seed: int, tests=None) -> dict:
        tests = self.tests if tests is None else tuple(TestKind(t) for t in tests)
        calib = replace(self.calib, seed=calib_seed)
        n = sample.n
        out = {}
        sigma = None
        for test in tests:
            L = None
            if test is TestKind.TS:
                stat = n * t_s(sample).stat_norm ** 2
                weights = None if self.model else spectrum(pi1_hat(sample), calib.drop_tol).eigenvalues
            elif test is TestKind.TSR:
                rows, theta = pi2_factors(sample)
                stat = n * norm(Curve(sample.grid, theta)) ** 2
                if not self.model:
                    op = FactoredOperator(sample.grid, rows - theta, 4.0 / (n - 1))
                    weights = spectrum(op, calib.drop_tol).eigenvalues
            else:
                if sigma is None:
                    sigma = spectrum(sigma_hat(sample), calib.drop_tol)
                if test is TestKind.T1:
                    stat = n * norm(sample.mean()) ** 2
                    weights = sigma.eigenvalues
                else:
                    L = select_L(sigma, self.mean_config)
                    if test is TestKind.T2:
                        stat = n * t2(sample, sigma, L)
                        weights = sigma.eigenvalues[:L]
                    else:
                        stat = n * t3(sample, sigma, L)
                        weights = np.ones(L)
            if self.model is None:
                cal = calibrate(weights, self.alpha, calib, _TEST_INDEX[test])
                out[test.value] = (stat > cal.critical_value, cal.pvalue(stat))
            else:
                draws = self._reference_draws(test, L)
                crit = self.model.critical_value(test, self.alpha, L)
                out[test.value] = (stat > crit, _mc_pvalue(draws, stat))
        return out

    def _reference_draws(self, test: TestKind, L):
        key = (test, L)
        if key not in self._sorted:
            self._sorted[key] = np.sort(self.model.null_draws(test, L))
        return self._sorted[key]


def reference_model(config: ExperimentConfig) -> NullModel:
    """Null model from ``reference_n`` curves of the clean process."""
    grid = config.grid.build()
    spec = config.process.build(grid, 0.0)
    data = sample_contaminated(spec, config.reference_n, derive_seed(config.master_seed, REFERENCE, 0))
    calib = replace(config.calib, seed=derive_seed(config.master_seed, REFERENCE, 1))
    return NullModel(data, calib)


def _battery(config: ExperimentConfig, tests) -> Battery:
    model = reference_model(config) if config.calibration is CalibrationMode.REFERENCE else None
    if model is not None:
        # Fill the cached spectra before the model is shipped to workers.
        for t in tests:
            _ = model.pi1 if t == "TS" else model.pi2 if t == "TSR" else model.sigma
    return Battery(tests, config.alpha, config.mean_config, config.calib, model)


# -- replicate loop ---------------------------------------------------------

# A cell is (epsilon, shift curve or None, tests). Cells sharing an epsilon
# share the replicate's draw.
_CTX: dict = {}


def _init_worker(ctx):
    _CTX.clear()
    _CTX.update(ctx)


def _replicate(r: int) -> list:
    cfg: ExperimentConfig = _CTX["config"]
    battery: Battery = _CTX["battery"]
    specs: dict = _CTX["specs"]
    data_seed = derive_seed(cfg.master_seed, DATA, r)
    calib_seed = derive_seed(cfg.master_seed, CALIBRATION, r)
    draws = {eps: draw_mixture(spec, cfg.n, data_seed) for eps, spec in specs.items()}
    results = []
    for eps, shift, tests in _CTX["cells"]:
        values, flag = draws[eps]
        if shift is not None:
            values = shift_values(values, flag, shift, specs[eps])
        sample = PairedDiffSample(specs[eps].grid, values)
        results.append(battery.run(sample, calib_seed, tests))
    return results


def worker_count() -> int:
    env = os.environ.get("FDATEST_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _run_replicates(config: ExperimentConfig, battery: Battery, specs: dict, cells: list) -> list:
    ctx = {"config": config, "battery": battery, "specs": specs, "cells": cells}
    R = config.replicates
    workers = min(worker_count(), R)
    if workers <= 1:
        _init_worker(ctx)
        return [_replicate(r) for r in range(R)]
    chunk = max(1, R // (4 * workers))
    with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(ctx,)) as pool:
        # map preserves replicate order, so aggregation is order-fixed.
        return list(pool.map(_replicate, range(R), chunksize=chunk))


def _aggregate(per_rep: list, cell_index: int, test: str) -> tuple[float, float, float]:
    rej = [rep[cell_index][test][0] for rep in per_rep]
    pv = [rep[cell_index][test][1] for rep in per_rep]
    R = len(per_rep)
    rate = float(np.mean(rej))
    return rate, mc_se(rate, R), float(np.mean(pv))


def _specs(config: ExperimentConfig, epsilons) -> dict:
    grid = config.grid.build()
    return {float(e): config.process.build(grid, e) for e in epsilons}


# -- scenarios --------------------------------------------------------------


def run_null_size(config: ExperimentConfig) -> ExperimentResult:
    """Empirical sizes of every requested test at the configured epsilon."""
    t0 = time.perf_counter()
    eps = config.process.epsilon
    specs = _specs(config, [eps])
    battery = _battery(config, config.tests)
    cells = [(eps, None, config.tests)]
    per_rep = _run_replicates(config, battery, specs, cells)
    rows = []
    for test in config.tests:
        rate, se, mp = _aggregate(per_rep, 0, test)
        rows.append({"epsilon": eps, "test": test, "size": rate, "se": se, "mean_p": mp,
                     "replicates": config.replicates})
    cols = ["epsilon", "test", "size", "se", "mean_p", "replicates"]
    return ExperimentResult("null_size", cols, rows, config.to_dict(), time.perf_counter() - t0)


def run_power_curves(config: ExperimentConfig) -> ExperimentResult:
    """Rejection rates over every (shift family, c, test)."""
    t0 = time.perf_counter()
    eps = config.process.epsilon
    specs = _specs(config, [eps])
    grid = specs[eps].grid
    battery = _battery(config, config.tests)
    labels, cells = [], []
    for sg in config.shifts:
        for spec in sg.specs():
            labels.append(spec)
            shift = make_shift(spec, grid) if spec.c > 0 else None
            cells.append((eps, shift, config.tests))
    per_rep = _run_replicates(config, battery, specs, cells)
    rows = []
    for i, spec in enumerate(labels):
        for test in config.tests:
            rate, se, mp = _aggregate(per_rep, i, test)
            rows.append({"family": spec.family.value, "c": spec.c, "epsilon": eps, "test": test,
                         "power": rate, "se": se, "mean_p": mp, "replicates": config.replicates})
    cols = ["family", "c", "epsilon", "test", "power", "se", "mean_p", "replicates"]
    return ExperimentResult("power_curve", cols, rows, config.to_dict(), time.perf_counter() - t0)


def run_robustness(config: ExperimentConfig) -> ExperimentResult:
    """Sizes of all tests and powers of ``power_tests`` for each epsilon.

    The power column uses the first magnitude of ``robustness_shift``.
    """
    t0 = time.perf_counter()
    epsilons = config.epsilons
    specs = _specs(config, epsilons)
    grid = next(iter(specs.values())).grid
    alt = config.robustness_shift.specs()[0]
    shift = make_shift(alt, grid)
    battery = _battery(config, tuple(dict.fromkeys(config.tests + config.power_tests)))
    cells, labels = [], []
    for e in epsilons:
        cells.append((e, None, config.tests))
        labels.append((e, "size", config.tests))
        if config.power_tests:
            cells.append((e, shift, config.power_tests))
            labels.append((e, "power", config.power_tests))
    per_rep = _run_replicates(config, battery, specs, cells)
    rows = []
    for i, (e, what, tests) in enumerate(labels):
        for test in tests:
            rate, se, mp = _aggregate(per_rep, i, test)
            c = 0.0 if what == "size" else alt.c
            rows.append({"epsilon": e, "quantity": what, "family": alt.family.value, "c": c,
                         "test": test, "rate": rate, "se": se, "mean_p": mp,
                         "replicates": config.replicates})
    cols = ["epsilon", "quantity", "family", "c", "test", "rate", "se", "mean_p", "replicates"]
    return ExperimentResult("robustness", cols, rows, config.to_dict(), time.perf_counter() - t0)


def run_asymptotic_power(config: ExperimentConfig, model: NullModel | None = None) -> ExperimentResult:
    """Asymptotic power against ``eta / sqrt(n)`` from one large null sample.

    The null sample has ``reference_n`` curves from the configured process
    (including its contamination, if any).
    """
    t0 = time.perf_counter()
    grid = config.grid.build()
    if model is None:
        spec: ContaminationSpec = config.process.build(grid)
        data = sample_contaminated(spec, config.reference_n,
                                   derive_seed(config.master_seed, REFERENCE, 0))
        model = NullModel(data, replace(config.calib, seed=derive_seed(config.master_seed, REFERENCE, 1)))
    rows = []
    for sg in config.shifts:
        for shift_spec in sg.specs():
            eta = make_shift(shift_spec, grid)
            for test in config.tests:
                pt = asymp_power(test, model, eta, config.alpha, config.mean_config,
                                 shift=shift_spec, key=(_TEST_INDEX[TestKind(test)],))
                rows.append({"family": shift_spec.family.value, "c": shift_spec.c, "test": test,
                             "power": pt.power, "se": mc_se(pt.power, pt.replicates),
                             "critical_value": pt.critical_value,
                             "residual_drift": pt.residual_drift, "L": pt.extra.get("L", "")})
    cols = ["family", "c", "test", "power", "se", "critical_value", "residual_drift", "L"]
    return ExperimentResult("asymptotic_power", cols, rows, config.to_dict(), time.perf_counter() - t0)


def run_single(config: ExperimentConfig, sample: PairedDiffSample) -> ExperimentResult:
    """Every requested test on one dataset, calibrated from that dataset."""
    t0 = time.perf_counter()
    calib = config.calib
    reports = []
    for test in config.tests:
        kind = TestKind(test)
        if kind is TestKind.TS:
            rep = sign_test(sample, config.alpha, calib)
        elif kind is TestKind.TSR:
            rep = signed_rank_test(sample, config.alpha, calib)
        else:
            rep = mean_test(kind.value, sample, config.mean_config, calib)
        reports.append(rep.to_dict())
    rows = [{k: r[k] for k in ("test", "statistic", "critical_value", "p_value", "reject")}
            for r in reports]
    cols = ["test", "statistic", "critical_value", "p_value", "reject"]
    res = ExperimentResult("single_dataset", cols, rows, config.to_dict(), time.perf_counter() - t0,
                           reports=reports)
    res.config["n_curves"] = sample.n
    res.config["grid_size"] = sample.grid.size
    return res


def run(config: ExperimentConfig, sample: PairedDiffSample | None = None) -> ExperimentResult:
    if config.scenario is Scenario.SINGLE_DATASET:
        if sample is None:
            raise ValueError("the single_dataset scenario needs data")
        return run_single(config, sample)
    return {
        Scenario.NULL_SIZE: run_null_size,
        Scenario.POWER_CURVE: run_power_curves,
        Scenario.ROBUSTNESS: run_robustness,
        Scenario.ASYMPTOTIC_POWER: run_asymptotic_power,
    }[config.scenario](config)
