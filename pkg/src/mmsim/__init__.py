"""Cycle-level simulator of a semi-systolic FP16 matrix-multiplication engine."""

from .config import DEFAULT_GEOMETRY, Geometry, InvalidGeometry, required_ports, validate
from .cost import AreaModel, area_mm2, sweep
from .fp16 import F16, f16_classify, f16_fma, f16_from_decimal
from .golden import DimensionError, GemmProblem, MatF16, gemm_ordered, gemm_padded
from .perf import OPERATING_POINTS, PerfReport, SwBaseline, analyze, energy_per_mac
from .tiler import Stationarity, plan, run_gemm
from .trace import CycleTrace, Verbosity
from .workloads import autoencoder_step, bench

__all__ = [
    "DEFAULT_GEOMETRY", "Geometry", "InvalidGeometry", "required_ports", "validate",
    "AreaModel", "area_mm2", "sweep",
    "F16", "f16_classify", "f16_fma", "f16_from_decimal",
    "DimensionError", "GemmProblem", "MatF16", "gemm_ordered", "gemm_padded",
    "OPERATING_POINTS", "PerfReport", "SwBaseline", "analyze", "energy_per_mac",
    "Stationarity", "plan", "run_gemm",
    "CycleTrace", "Verbosity",
    "autoencoder_step", "bench",
]
