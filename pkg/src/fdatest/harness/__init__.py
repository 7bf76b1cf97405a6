"""Configuration, curve I/O, experiment drivers and the command line."""

from .config import CalibrationMode, ExperimentConfig, GridConfig, ProcessConfig, Scenario, ShiftGrid
from .experiments import (Battery, ExperimentResult, reference_model, run, run_asymptotic_power,
                          run_null_size, run_power_curves, run_robustness, run_single)
from .io import (format_curves, parse_curves_csv, read_curves, read_table_config, write_curves,
                 write_table)
