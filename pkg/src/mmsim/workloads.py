"""Autoencoder training step as a list of GEMMs, and the batching benchmark.

For a dense layer with ``n_in`` inputs and ``n_out`` outputs at batch size B:

* forward  ``Y^T  = W   . X^T``   -> (M, N, K) = (n_out, n_in, B)
* input grad ``dX^T = W^T . dY^T`` -> (n_in, n_out, B)
* weight grad ``dW  = dY^T . X``   -> (n_out, B, n_in)

Transposed operands are materialized before simulation and cost nothing.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_GEOMETRY, Geometry
from .golden import GemmProblem, MatF16, gemm_padded
from .perf import OPERATING_POINTS, PerfReport, SwBaseline, analyze
from .tiler import run_gemm


@dataclass(frozen=True)
class DenseLayer:
    n_in: int
    n_out: int

    def __post_init__(self) -> None:
        if self.n_in < 1 or self.n_out < 1:
            raise ValueError(f"layer dimensions must be positive: {self}")


def _stack(widths: list[int]) -> tuple[DenseLayer, ...]:
    return tuple(DenseLayer(a, b) for a, b in zip(widths, widths[1:]))


# Public MLPerf Tiny anomaly-detection autoencoder: 640 inputs, four 128-wide
# hidden layers per side around an 8-wide bottleneck. About 602 kB at B=16.
MLPERF_TINY_AUTOENCODER = _stack([640, 128, 128, 128, 128, 8, 128, 128, 128, 128, 640])
AUTOENCODER_LAYERS = MLPERF_TINY_AUTOENCODER

# Same depth with 40-wide hidden layers (174 kB at B=16). Not a documented
# model; handy for exploring how the hidden width moves the batching gain.
NARROW_AUTOENCODER = _stack([640, 40, 40, 40, 40, 8, 40, 40, 40, 40, 640])


@dataclass(frozen=True)
class GemmShape:
    phase: str  # "fwd", "dx" or "dw"
    layer: int
    M: int
    N: int
    K: int

    @property
    def macs(self) -> int:
        return self.M * self.N * self.K


@dataclass
class TrainingStep:
    batch: int
    layers: tuple[DenseLayer, ...]
    gemms: list[GemmShape]

    @property
    def weight_elems(self) -> int:
        return sum(l.n_in * l.n_out for l in self.layers)

    @property
    def activation_elems(self) -> int:
        return self.batch * (self.layers[0].n_in + sum(l.n_out for l in self.layers))

    @property
    def footprint_bytes(self) -> int:
        return 2 * (self.weight_elems + self.activation_elems)


def autoencoder_step(B: int, layers=AUTOENCODER_LAYERS) -> TrainingStep:
    if isinstance(B, bool) or not isinstance(B, (int, np.integer)) or B < 1:
        raise ValueError(f"batch size must be >= 1, got {B!r}")
    layers = tuple(layers)
    if not layers:
        raise ValueError("at least one layer is required")
    gemms = [GemmShape("fwd", i, l.n_out, l.n_in, B) for i, l in enumerate(layers)]
    for i in reversed(range(len(layers))):
        l = layers[i]
        gemms.append(GemmShape("dx", i, l.n_in, l.n_out, B))
        gemms.append(GemmShape("dw", i, l.n_out, B, l.n_in))
    return TrainingStep(B, layers, gemms)


@dataclass
class BenchResult:
    step: TrainingStep
    reports: list[PerfReport]
    seed: int
    baseline: SwBaseline
    bit_exact: bool

    @property
    def cycles(self) -> int:
        return sum(r.cycles for r in self.reports)

    @property
    def macs(self) -> int:
        return sum(r.useful_macs for r in self.reports)

    @property
    def sw_cycles(self) -> float:
        return sum(r.sw_cycles for r in self.reports)

    @property
    def speedup(self) -> float:
        return self.sw_cycles / self.cycles

    @property
    def macs_per_cycle(self) -> float:
        return self.macs / self.cycles

    def phase_speedup(self, phase: str) -> float:
        rs = [r for r, s in zip(self.reports, self.step.gemms) if s.phase == phase]
        return sum(r.sw_cycles for r in rs) / sum(r.cycles for r in rs)

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["phase", "layer", "M", "N", "K", "cycles", "macs_per_cycle", "speedup"])
        for s, r in zip(self.step.gemms, self.reports):
            writer.writerow([s.phase, s.layer, s.M, s.N, s.K, r.cycles, f"{r.macs_per_cycle:.6f}", f"{r.speedup:.6f}"])
        return out.getvalue()

    def aggregate(self) -> dict:
        return {
            "batch": self.step.batch,
            "seed": self.seed,
            "gemms": len(self.reports),
            "cycles": self.cycles,
            "useful_macs": self.macs,
            "macs_per_cycle": self.macs_per_cycle,
            "sw_cycles": self.sw_cycles,
            "speedup": self.speedup,
            "speedup_fwd": self.phase_speedup("fwd"),
            "speedup_dx": self.phase_speedup("dx"),
            "speedup_dw": self.phase_speedup("dw"),
            "footprint_bytes": self.step.footprint_bytes,
            "bit_exact": self.bit_exact,
        }

    def aggregate_json(self) -> str:
        return json.dumps(self.aggregate(), indent=2)


def bench(
    B: int,
    layers=AUTOENCODER_LAYERS,
    g: Geometry = DEFAULT_GEOMETRY,
    baseline: SwBaseline = SwBaseline(),
    seed: int = 0,
    freq_hz: float = OPERATING_POINTS["performance"].freq_hz,
    power_mw: float = OPERATING_POINTS["performance"].power_mw,
) -> BenchResult:
    """Simulate every GEMM of one training step on random data."""
    step = autoencoder_step(B, layers)
    rng = np.random.default_rng(seed)
    reports = []
    exact = True
    for s in step.gemms:
        x = MatF16.from_float(rng.uniform(-1, 1, (s.M, s.N)))
        w = MatF16.from_float(rng.uniform(-1, 1, (s.N, s.K)))
        p = GemmProblem(x, w)
        res = run_gemm(p, g)
        exact &= res.Z == gemm_padded(p, g)
        reports.append(analyze(res.trace, g, freq_hz, power_mw, baseline))
    return BenchResult(step, reports, seed, baseline, exact)
