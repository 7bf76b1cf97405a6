"""Paired-sample location tests for curves observed on a common grid."""

from .errors import DegenerateError, FdaTestError, GridMismatchError, InputFormatError
from .fspace import Curve, Grid, PairedDiffSample, inner, make_grid, norm
from .meantests import MeanTestConfig, mean_test
from .nulldist import CalibrationConfig, WeightedChiSq
from .signstats import TestReport, sign_test, signed_rank_test, t_s, t_sr

__all__ = [
    "CalibrationConfig", "Curve", "DegenerateError", "FdaTestError", "Grid", "GridMismatchError",
    "InputFormatError", "MeanTestConfig", "PairedDiffSample", "TestReport", "WeightedChiSq",
    "inner", "make_grid", "mean_test", "norm", "sign_test", "signed_rank_test", "t_s", "t_sr",
]
