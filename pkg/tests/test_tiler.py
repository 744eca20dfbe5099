import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import random_problem
from mmsim.config import DEFAULT_GEOMETRY, Geometry
from mmsim.golden import DimensionError, gemm_padded
from mmsim.perf import analyze
from mmsim.tiler import Stationarity, plan, run_gemm


def test_plan_exact_fit(g):
    tp = plan(8, 16, 16, g)
    assert len(tp.tiles) == 1
    t = tp.tiles[0]
    assert (t.pad_rows, t.pad_cols, t.pad_n) == (0, 0, 0)


def test_plan_partial_rows(g):
    tp = plan(9, 16, 16, g)
    assert len(tp.tiles) == 2
    assert tp.tiles[1].m_rows == 1 and tp.tiles[1].pad_rows == 7


def test_plan_pads_reduction(g):
    tp = plan(8, 5, 16, g)
    assert len(tp.tiles) == 1
    assert tp.tiles[0].pad_n == 3 and tp.n_padded == 8
    p = random_problem(np.random.default_rng(0), 8, 5, 16)
    assert run_gemm(p, g).Z == gemm_padded(p, g)


@pytest.mark.parametrize("dims", [(0, 1, 1), (1, 0, 1), (1, 1, 0), (-3, 4, 4)])
def test_plan_rejects_empty(g, dims):
    with pytest.raises(DimensionError):
        plan(*dims, g)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 70), st.integers(1, 70), st.integers(1, 70), st.sampled_from(list(Stationarity)))
def test_tiles_partition_output(m, n, k, order):
    g = DEFAULT_GEOMETRY
    tp = plan(m, n, k, g, order)
    cover = np.zeros((m, k), dtype=int)
    for t in tp.tiles:
        assert t.m_rows + t.pad_rows == g.L and t.k_cols + t.pad_cols == g.line_elems
        assert (n + t.pad_n) % g.H == 0 and t.pad_n < g.H
        cover[t.m0 : t.m0 + t.m_rows, t.k0 : t.k0 + t.k_cols] += 1
    assert (cover == 1).all()
    assert len(tp.tiles) == -(-m // g.L) * -(-k // g.line_elems)


def test_stationarity_changes_only_order(g):
    a = plan(20, 8, 40, g, Stationarity.X_STATIONARY)
    b = plan(20, 8, 40, g, "w_stationary")
    assert [(t.m0, t.k0) for t in a.tiles][:3] == [(0, 0), (0, 16), (0, 32)]
    assert [(t.m0, t.k0) for t in b.tiles][:3] == [(0, 0), (8, 0), (16, 0)]
    assert sorted((t.m0, t.k0) for t in a.tiles) == sorted((t.m0, t.k0) for t in b.tiles)
    p = random_problem(np.random.default_rng(1), 20, 8, 40)
    za, zb = run_gemm(p, g, "x_stationary").Z, run_gemm(p, g, "w_stationary").Z
    assert za == zb == gemm_padded(p, g)


def test_single_tile_cycles(g):
    res = run_gemm(random_problem(np.random.default_rng(2), 8, 16, 16), g)
    fill_drain = g.L + 1 + g.H * g.depth + g.L
    assert 64 < res.trace.cycles <= 64 + fill_drain


def test_k1_utilization(g):
    res = run_gemm(random_problem(np.random.default_rng(3), 8, 16, 1), g)
    assert analyze(res.trace, g).utilization <= 0.08


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 60), st.integers(1, 60), st.integers(1, 60))
def test_cycle_overhead_bounded(m, n, k):
    g = DEFAULT_GEOMETRY
    res = run_gemm(random_problem(np.random.default_rng(4), m, n, k), g)
    tiles = len(res.plan.tiles)
    fill_drain = g.L + g.H * g.depth + g.L
    assert res.trace.compute_cycles <= res.trace.cycles <= res.trace.compute_cycles + 2 * fill_drain * tiles


def test_tile_times_are_ordered(g):
    res = run_gemm(random_problem(np.random.default_rng(5), 24, 20, 40), g)
    first, last = res.trace.tile_first_issue, res.trace.tile_last_store
    assert first == sorted(first) and last == sorted(last)
    assert all(f < l for f, l in zip(first, last))


def test_utilization_monotone_small_grid(g):
    prev = 0.0
    for s in (8, 16, 32, 64):
        res = run_gemm(random_problem(np.random.default_rng(s), s, s, s), g)
        u = analyze(res.trace, g).utilization
        assert u >= prev
        prev = u


def test_cycle_limit(g):
    with pytest.raises(RuntimeError):
        run_gemm(random_problem(np.random.default_rng(6), 8, 16, 16), g, max_cycles=10)


@settings(max_examples=40, deadline=None)
@given(
    st.integers(1, 4), st.integers(1, 6), st.integers(1, 4),
    st.integers(1, 30), st.integers(1, 30), st.integers(1, 30), st.integers(0, 2**32 - 1),
)
def test_bit_exact_other_geometries(H, L, P, m, n, k, seed):
    g = Geometry(H, L, P)
    p = random_problem(np.random.default_rng(seed), m, n, k, specials=0.15)
    assert run_gemm(p, g).Z == gemm_padded(p, g)
