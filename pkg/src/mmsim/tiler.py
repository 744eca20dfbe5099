"""Decomposition of arbitrary GEMMs into array-sized tiles, and the run driver.

A tile covers up to L output rows and one line (H*(P+1)) of output columns and
runs the whole reduction. Leftover rows/columns are zero-padded and masked at
store time; the reduction is padded up to a multiple of H with zero operands.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .config import Geometry, validate
from .datapath import Datapath
from .fp16 import f64_to_bits
from .golden import DimensionError, GemmProblem, MatF16, padded_reduction
from .streamer import Slot, Streamer
from .trace import CycleTrace, Verbosity


class Stationarity(enum.Enum):
    X_STATIONARY = "x_stationary"
    W_STATIONARY = "w_stationary"


@dataclass(frozen=True)
class Tile:
    index: int
    m0: int
    m_rows: int
    k0: int
    k_cols: int
    n_total: int
    pad_rows: int
    pad_cols: int
    pad_n: int


@dataclass
class TilePlan:
    M: int
    N: int
    K: int
    geometry: Geometry
    stationarity: Stationarity
    tiles: list[Tile] = field(default_factory=list)

    @property
    def n_padded(self) -> int:
        return padded_reduction(self.N, self.geometry)

    @property
    def loops(self) -> int:
        """Ring loops per tile: each loop advances the reduction by H."""
        return self.n_padded // self.geometry.H

    @property
    def chunks(self) -> int:
        """X-buffer line sets per tile (one line covers P+1 loops)."""
        return -(-self.loops // self.geometry.depth)

    @property
    def compute_cycles(self) -> int:
        return len(self.tiles) * self.loops * self.geometry.line_elems


def plan(M: int, N: int, K: int, g: Geometry, stationarity=Stationarity.X_STATIONARY) -> TilePlan:
    for name, v in (("M", M), ("N", N), ("K", K)):
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
            raise DimensionError(f"{name} must be a positive integer, got {v!r}")
    validate(g)
    stationarity = Stationarity(stationarity)
    L, S = g.L, g.line_elems
    pad_n = padded_reduction(N, g) - N
    m_starts = range(0, M, L)
    k_starts = range(0, K, S)
    if stationarity is Stationarity.X_STATIONARY:
        order = [(m0, k0) for m0 in m_starts for k0 in k_starts]
    else:
        order = [(m0, k0) for k0 in k_starts for m0 in m_starts]
    tiles = []
    for idx, (m0, k0) in enumerate(order):
        m_rows = min(L, M - m0)
        k_cols = min(S, K - k0)
        tiles.append(Tile(idx, m0, m_rows, k0, k_cols, N, L - m_rows, S - k_cols, pad_n))
    return TilePlan(M, N, K, g, stationarity, tiles)


@dataclass
class RunResult:
    Z: MatF16
    trace: CycleTrace
    plan: TilePlan


def run_gemm(
    p: GemmProblem,
    g: Geometry,
    stationarity=Stationarity.X_STATIONARY,
    verbosity=Verbosity.SUMMARY,
    fast: bool = True,
    max_cycles: int | None = None,
    observer=None,
) -> RunResult:
    """Simulate one GEMM cycle by cycle and assemble Z from the Z-store traffic.

    With ``fast`` (the default, ignored for per-cycle traces) stretches where
    the port only serves W loads are advanced in bulk by
    :meth:`Datapath.fast_forward`; results and counters are identical.
    ``observer(datapath, step_result)`` is called after every cycle and turns
    the fast path off.
    """
    M, N, K = p.dims
    tp = plan(M, N, K, g, stationarity)
    verbosity = Verbosity(verbosity)
    trace = CycleTrace(g, (M, N, K), verbosity)
    trace.tiles = len(tp.tiles)
    trace.compute_cycles = tp.compute_cycles
    trace.tile_first_issue = [-1] * len(tp.tiles)
    trace.tile_last_store = [-1] * len(tp.tiles)
    fast = fast and not trace.per_cycle and observer is None

    x = p.X.to_float()
    w = p.W.to_float()
    z = np.zeros((M, K), dtype=np.float64)
    written = np.zeros((M, K), dtype=bool)

    dp = Datapath(g, record=trace.per_cycle)
    dp.load(tp)
    st = Streamer(trace)
    S, H = g.line_elems, g.H
    tiles = tp.tiles
    Q = tp.chunks
    limit = max_cycles if max_cycles is not None else 64 * (tp.compute_cycles + 64 * len(tiles) + 1024)

    def w_line(col: int, t: int, j: int) -> tuple[int, np.ndarray]:
        tile = tiles[t]
        n = j * H + col
        if tile.k_cols == S:
            return n, w[n, tile.k0 : tile.k0 + S]
        vals = np.zeros(S)
        vals[: tile.k_cols] = w[n, tile.k0 : tile.k0 + tile.k_cols]
        return n, vals

    def fetch_w(col: int, t: int, j: int, cycle: int) -> np.ndarray:
        n, vals = w_line(col, t, j)
        trace.w_lines += 1
        trace.elems_moved += tiles[t].k_cols
        return vals

    def first_issue(t: int, cycle: int) -> None:
        trace.tile_first_issue[t] = cycle

    while not dp.done:
        cycle = dp.cycle
        if cycle >= limit:
            raise RuntimeError(f"simulation did not finish within {limit} cycles")
        if fast:
            ran, loads = dp.fast_forward(fetch_w, first_issue, limit - cycle)
            if ran:
                trace.idle_cycles += ran - loads
                continue
        d = dp.demands()
        slot = st.plan_cycle(d)
        x_feed = w_feed = None
        if slot is Slot.W_LOAD:
            col, t, j = d.w_due
            n, vals = w_line(col, t, j)
            w_feed = (col, t, j, vals)
            st.commit(cycle, slot, n, f"tile={t};row={n};col={col}", tiles[t].k_cols)
        elif slot is Slot.X_LOAD:
            sid, r = d.x_next
            tile = tiles[sid // Q]
            n0 = (sid % Q) * S
            n1 = min(n0 + S, N)
            vals = np.zeros(S)
            vals[: n1 - n0] = x[tile.m0 + r, n0:n1]
            x_feed = (sid, r, vals)
            st.commit(cycle, slot, tile.m0 + r, f"tile={tile.index};row={tile.m0 + r};chunk={sid % Q}", n1 - n0)
        elif slot is Slot.IDLE:
            st.commit(cycle, slot, -1, "")
        res = dp.step(x_feed, w_feed, slot is Slot.Z_STORE)
        if res.stored is not None:
            t, r, vals = res.stored
            tile = tiles[t]
            m = tile.m0 + r
            cols = slice(tile.k0, tile.k0 + tile.k_cols)
            if written[m, cols].any():
                raise RuntimeError(f"output row {m} of tile {t} stored twice")
            z[m, cols] = vals[: tile.k_cols]
            written[m, cols] = True
            st.commit(cycle, Slot.Z_STORE, m, f"tile={t};row={m}", tile.k_cols)
            trace.tile_last_store[t] = cycle
        if res.first_issue is not None:
            trace.tile_first_issue[res.first_issue] = cycle
        if not res.advanced:
            trace.stall_cycles += 1
            trace.stalls[res.stall] += 1
        if res.events:
            for unit, event, detail in res.events:
                trace.record(cycle, unit, event, detail)
        if observer is not None:
            observer(dp, res)

    if not written.all():
        raise RuntimeError("simulation finished with unwritten outputs")
    trace.cycles = dp.cycle
    trace.useful_macs = dp.useful_macs
    return RunResult(MatF16(M, K, f64_to_bits(z)), trace, tp)
