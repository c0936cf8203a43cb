"""Sweeps, rate fits, output files, shipped demos and the CLI."""

from .config import CaseSpec, load_case, loads_case, parse_case
from .output import emit_csv, emit_svg, emit_transform_csv
from .sweep import CaseRun, RateFit, SweepRow, SweepTable, fit_rate, run_case, run_sweep

__all__ = [
    "CaseSpec", "load_case", "loads_case", "parse_case",
    "emit_csv", "emit_svg", "emit_transform_csv",
    "CaseRun", "RateFit", "SweepRow", "SweepTable", "fit_rate", "run_case", "run_sweep",
]
