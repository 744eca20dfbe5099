"""Headline metrics from a simulation trace.

Power is a per-operating-point constant taken from the silicon's two reported
corners; there is no activity-based power model. The software baseline is a
closed-form throughput model of the 8-core cluster running the same GEMM.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import ClassVar

from .config import Geometry
from .streamer import st_traffic_totals
from .trace import CycleTrace


class ConfigError(ValueError):
    pass


class UndefinedMetric(ValueError):
    pass


@dataclass(frozen=True)
class OperatingPoint:
    freq_hz: float
    power_mw: float
    vdd: float


OPERATING_POINTS = {
    "efficiency": OperatingPoint(476e6, 43.5, 0.65),
    "performance": OperatingPoint(666e6, 90.7, 0.80),
}

# share of cluster power at the efficiency point; static, reported as-is
POWER_BREAKDOWN = {"accelerator": 0.69, "tcdm_hci": 0.171, "other": 0.139}


@dataclass(frozen=True)
class SwBaseline:
    """Aggregate MAC throughput of the software GEMM on the cluster cores.

    The default per-core rate comes from the reported peak figures:
    31.6 MAC/cycle on the accelerator at a 22x speedup over 8 cores gives
    31.6 / 22 / 8 = 0.18 MAC/cycle per core.
    """

    cores: int = 8
    macs_per_cycle_per_core: float = 0.18

    @property
    def macs_per_cycle(self) -> float:
        return self.cores * self.macs_per_cycle_per_core

    def cycles(self, macs: int) -> float:
        if self.macs_per_cycle <= 0:
            raise ConfigError("software baseline throughput must be positive")
        return macs / self.macs_per_cycle


@dataclass
class PerfReport:
    cycles: int
    useful_macs: int
    macs_per_cycle: float
    utilization: float
    freq_hz: float
    gflops: float
    sw_cycles: float
    speedup: float
    power_mw: float
    energy_j: float
    traffic: dict = field(default_factory=dict)
    power_breakdown: dict = field(default_factory=lambda: dict(POWER_BREAKDOWN))

    def gflops_at(self, freq_hz: float) -> float:
        return 2 * self.macs_per_cycle * freq_hz / 1e9

    @property
    def gflops_per_watt(self) -> float:
        if self.power_mw <= 0:
            raise UndefinedMetric("power is zero")
        return self.gflops / (self.power_mw / 1000)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)

    CSV_FIELDS: ClassVar[tuple[str, ...]] = ("cycles", "useful_macs", "macs_per_cycle", "utilization", "freq_hz", "gflops",
                                             "sw_cycles", "speedup", "power_mw", "energy_j")

    def csv_row(self) -> list:
        return [getattr(self, f) for f in self.CSV_FIELDS]


def analyze(
    trace: CycleTrace,
    g: Geometry,
    freq_hz: float = OPERATING_POINTS["performance"].freq_hz,
    power_mw: float = OPERATING_POINTS["performance"].power_mw,
    baseline: SwBaseline = SwBaseline(),
) -> PerfReport:
    if not freq_hz or freq_hz <= 0:
        raise ConfigError(f"frequency must be positive, got {freq_hz!r}")
    if power_mw < 0:
        raise ConfigError(f"power must be non-negative, got {power_mw!r}")
    cycles = trace.cycles
    macs = trace.useful_macs
    mpc = macs / cycles if cycles else 0.0
    sw_cycles = baseline.cycles(macs)
    return PerfReport(
        cycles=cycles,
        useful_macs=macs,
        macs_per_cycle=mpc,
        utilization=mpc / g.fma_count,
        freq_hz=freq_hz,
        gflops=2 * mpc * freq_hz / 1e9,
        sw_cycles=sw_cycles,
        speedup=sw_cycles / cycles if cycles else 0.0,
        power_mw=power_mw,
        energy_j=power_mw / 1000 * cycles / freq_hz,
        traffic=st_traffic_totals(trace),
    )


def energy_per_mac(report: PerfReport) -> float:
    """Joules per useful MAC."""
    if report.useful_macs <= 0:
        raise UndefinedMetric("energy per MAC is undefined for a run with no MACs")
    return report.energy_j / report.useful_macs
