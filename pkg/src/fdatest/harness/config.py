"""Experiment configuration and its JSON form.

Unknown keys are rejected at every level so that a typo never silently
falls back to a default.
"""

from __future__ import annotations

import dataclasses
import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import InputFormatError
from ..fspace import Grid, make_grid
from ..meantests import MeanTestConfig
from ..nulldist import CalibrationConfig
from ..procsim import ContaminationSpec, ProcessSpec, ShiftFamily, ShiftSpec
from ..shrinkpower import TestKind


class Scenario(str, enum.Enum):
    NULL_SIZE = "null_size"
    POWER_CURVE = "power_curve"
    ASYMPTOTIC_POWER = "asymptotic_power"
    ROBUSTNESS = "robustness"
    SINGLE_DATASET = "single_dataset"


class CalibrationMode(str, enum.Enum):
    # Critical values from each replicate's own spectra.
    SAMPLE = "sample"
    # Critical values from one large sample of the clean null process.
    REFERENCE = "reference"


def _strict(cls, data: dict, where: str):
    if not isinstance(data, dict):
        raise InputFormatError(f"{where}: expected an object, got {type(data).__name__}")
    names = {f.name for f in dataclasses.fields(cls)}
    extra = set(data) - names
    if extra:
        raise InputFormatError(f"{where}: unknown keys {sorted(extra)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise InputFormatError(f"{where}: {exc}") from exc


@dataclass(frozen=True)
class GridConfig:
    a: float = 0.0
    b: float = 1.0
    m: int = 250

    def build(self) -> Grid:
        return make_grid(self.a, self.b, self.m)


@dataclass(frozen=True)
class ProcessConfig:
    kind: str = "sbm"
    nu: int | None = None
    kl_terms: int | None = None
    epsilon: float = 0.0
    contaminant_scale: float = 4.0
    fixed_count: bool = False
    # Whether contaminating curves also carry the location shift.
    shift_outliers: bool = False

    def __post_init__(self):
        if self.kind not in ("sbm", "t"):
            raise ValueError(f"unknown process kind {self.kind!r}")
        if self.kind == "t" and (self.nu is None or self.nu < 1):
            raise ValueError("a t process needs nu >= 1")
        if not 0 <= self.epsilon <= 1:
            raise ValueError("epsilon must lie in [0, 1]")

    def clean(self, grid: Grid) -> ProcessSpec:
        return ProcessSpec(grid, self.kind, self.nu, self.kl_terms)

    def build(self, grid: Grid, epsilon: float | None = None) -> ContaminationSpec:
        eps = self.epsilon if epsilon is None else epsilon
        return ContaminationSpec(self.clean(grid), eps, self.contaminant_scale, self.fixed_count,
                                 self.shift_outliers)


@dataclass(frozen=True)
class ShiftGrid:
    family: str = "eta2"
    c: tuple = (0.0,)

    def __post_init__(self):
        ShiftFamily(self.family)
        if self.family == "custom":
            raise ValueError("custom shifts cannot be given in a config file")
        c = tuple(float(x) for x in (self.c if isinstance(self.c, (list, tuple)) else [self.c]))
        if not c or any(x < 0 for x in c):
            raise ValueError("shift magnitudes must be a nonempty list of values >= 0")
        object.__setattr__(self, "c", c)

    def specs(self) -> list[ShiftSpec]:
        return [ShiftSpec(self.family, c) for c in self.c]


ALL_TESTS = tuple(t.value for t in TestKind)


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: Scenario = Scenario.NULL_SIZE
    process: ProcessConfig = field(default_factory=ProcessConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    n: int = 20
    replicates: int = 1000
    shifts: tuple = (ShiftGrid("eta2", (0.0,)),)
    epsilons: tuple = (0.0, 0.05, 0.15, 0.25)
    robustness_shift: ShiftGrid = field(default_factory=lambda: ShiftGrid("eta2", (0.8,)))
    alpha: float = 0.05
    calib: CalibrationConfig = field(default_factory=CalibrationConfig)
    calibration: CalibrationMode = CalibrationMode.SAMPLE
    reference_n: int = 5000
    tests: tuple = ALL_TESTS
    power_tests: tuple = ("TS", "TSR", "T3")
    mean_config: MeanTestConfig = field(default_factory=MeanTestConfig)
    master_seed: int = 0
    weights: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        object.__setattr__(self, "calibration", CalibrationMode(self.calibration))
        for name in ("tests", "power_tests"):
            vals = tuple(TestKind(t).value for t in getattr(self, name))
            object.__setattr__(self, name, vals)
        if not self.tests:
            raise ValueError("tests must be nonempty")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.reference_n < 2:
            raise ValueError("reference_n must be >= 2")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.master_seed < 0:
            raise ValueError("master_seed must be non-negative")
        if not self.shifts:
            raise ValueError("shifts must be nonempty")
        if self.mean_config.alpha != self.alpha:
            object.__setattr__(self, "mean_config",
                               dataclasses.replace(self.mean_config, alpha=self.alpha))
        object.__setattr__(self, "epsilons", tuple(float(e) for e in self.epsilons))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))

    # -- JSON -------------------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise InputFormatError("config must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        extra = set(data) - known
        if extra:
            raise InputFormatError(f"config: unknown keys {sorted(extra)}")
        kw = dict(data)
        if "process" in kw:
            kw["process"] = _strict(ProcessConfig, kw["process"], "process")
        if "grid" in kw:
            kw["grid"] = _strict(GridConfig, kw["grid"], "grid")
        if "shifts" in kw:
            if not isinstance(kw["shifts"], list):
                raise InputFormatError("shifts: expected a list")
            kw["shifts"] = tuple(_strict(ShiftGrid, s, "shifts[]") for s in kw["shifts"])
        if "robustness_shift" in kw:
            kw["robustness_shift"] = _strict(ShiftGrid, kw["robustness_shift"], "robustness_shift")
        if "calib" in kw:
            kw["calib"] = _strict(CalibrationConfig, kw["calib"], "calib")
        if "mean_config" in kw:
            mc = dict(kw["mean_config"]) if isinstance(kw["mean_config"], dict) else kw["mean_config"]
            if isinstance(mc, dict):
                mc.setdefault("alpha", kw.get("alpha", 0.05))
            kw["mean_config"] = _strict(MeanTestConfig, mc, "mean_config")
        for name in ("tests", "power_tests", "epsilons", "weights"):
            if name in kw:
                if not isinstance(kw[name], list):
                    raise InputFormatError(f"{name}: expected a list")
                kw[name] = tuple(kw[name])
        try:
            return cls(**kw)
        except (TypeError, ValueError) as exc:
            raise InputFormatError(f"config: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InputFormatError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        def conv(x):
            if isinstance(x, enum.Enum):
                return x.value
            if dataclasses.is_dataclass(x):
                return {f.name: conv(getattr(x, f.name)) for f in dataclasses.fields(x)}
            if isinstance(x, (list, tuple)):
                return [conv(v) for v in x]
            return x

        return conv(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)
