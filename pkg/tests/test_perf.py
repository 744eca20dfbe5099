import json
from dataclasses import fields, replace

import numpy as np
import pytest

from helpers import random_problem
from mmsim.config import DEFAULT_GEOMETRY
from mmsim.perf import (
    OPERATING_POINTS,
    POWER_BREAKDOWN,
    ConfigError,
    PerfReport,
    SwBaseline,
    UndefinedMetric,
    analyze,
    energy_per_mac,
)
from mmsim.tiler import run_gemm
from mmsim.trace import CycleTrace, Verbosity

PERF = OPERATING_POINTS["performance"]
EFF = OPERATING_POINTS["efficiency"]


@pytest.fixture(scope="module")
def large_trace():
    p = random_problem(np.random.default_rng(0), 256, 256, 256)
    return run_gemm(p, DEFAULT_GEOMETRY).trace


def test_baseline_constant():
    b = SwBaseline()
    assert b.macs_per_cycle == pytest.approx(1.44)
    assert b.cycles(144) == pytest.approx(100)
    # derived from peak throughput and peak speedup
    assert 31.6 / 22 / 8 == pytest.approx(b.macs_per_cycle_per_core, abs=0.005)


def test_large_gemm_headlines(large_trace):
    g = DEFAULT_GEOMETRY
    r = analyze(large_trace, g, PERF.freq_hz, PERF.power_mw)
    assert r.macs_per_cycle >= 31.0
    assert r.gflops >= 41
    assert 20 <= r.speedup <= 22.5
    assert r.utilization == pytest.approx(r.macs_per_cycle / g.fma_count)
    assert r.gflops == pytest.approx(2 * r.macs_per_cycle * PERF.freq_hz / 1e9)
    assert r.gflops_at(EFF.freq_hz) == pytest.approx(2 * r.macs_per_cycle * 0.476)
    assert r.energy_j == pytest.approx(PERF.power_mw / 1000 * r.cycles / PERF.freq_hz)
    assert r.sw_cycles == pytest.approx(r.useful_macs / 1.44)
    assert r.macs_per_cycle <= g.fma_count


def test_efficiency_point(large_trace):
    r = analyze(large_trace, DEFAULT_GEOMETRY, EFF.freq_hz, EFF.power_mw)
    assert r.gflops_per_watt >= 670
    assert energy_per_mac(r) == pytest.approx(2.9e-12, rel=0.05)


def test_small_gemm_costs_more_energy(large_trace, g):
    small = run_gemm(random_problem(np.random.default_rng(1), 8, 16, 16), g).trace
    e_small = energy_per_mac(analyze(small, g, EFF.freq_hz, EFF.power_mw))
    e_large = energy_per_mac(analyze(large_trace, g, EFF.freq_hz, EFF.power_mw))
    assert e_small > e_large


def test_half_utilization_doubles_energy_per_mac(large_trace, g):
    full = analyze(large_trace, g, EFF.freq_hz, EFF.power_mw)
    half_trace = replace(large_trace, useful_macs=large_trace.useful_macs // 2)
    half = analyze(half_trace, g, EFF.freq_hz, EFF.power_mw)
    assert energy_per_mac(half) == pytest.approx(2 * energy_per_mac(full))


def test_speedup_scales_with_baseline(large_trace, g):
    a = analyze(large_trace, g, baseline=SwBaseline(8, 0.18))
    b = analyze(large_trace, g, baseline=SwBaseline(8, 0.09))
    assert b.speedup == pytest.approx(2 * a.speedup)


def test_empty_trace(g):
    r = analyze(CycleTrace(g, (0, 0, 0), Verbosity.OFF), g)
    assert (r.cycles, r.useful_macs, r.macs_per_cycle, r.utilization, r.speedup) == (0, 0, 0, 0, 0)
    with pytest.raises(UndefinedMetric):
        energy_per_mac(r)


def test_zero_frequency(large_trace, g):
    with pytest.raises(ConfigError):
        analyze(large_trace, g, freq_hz=0)


def test_json_keys_are_fields(large_trace, g):
    r = analyze(large_trace, g)
    data = json.loads(r.to_json())
    assert list(data) == [f.name for f in fields(PerfReport)]
    assert data["power_breakdown"] == POWER_BREAKDOWN
    assert set(data["traffic"]) == {"w_lines", "x_lines", "z_lines", "idle_cycles"}
    assert r.csv_row()[0] == r.cycles and len(r.csv_row()) == len(PerfReport.CSV_FIELDS)
