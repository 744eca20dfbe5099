"""Cycle-level model of the L x H semi-systolic FMA array and its buffers.

Timing model
------------
The array is globally enabled: in a cycle either every FMA pipeline advances
or none does (a stall). ``tau`` counts advancing cycles. The column-0 issue
stream is a flat sequence of items ``i = (tile, loop, slot)`` with
``line_elems`` slots per loop and ``loops`` loops per tile. Column ``c`` issues
item ``i`` at ``tau = i + c*(P+1)`` and hands the result to column ``c+1``
exactly ``P+1`` advancing cycles later. Because ``line_elems == H*(P+1)``, the
last column's result for slot ``s`` of loop ``j`` arrives back at column 0
exactly when column 0 issues slot ``s`` of loop ``j+1``; that is the ring.

Every column starts a new loop once every ``line_elems`` cycles; at that point
it latches a new x operand (one per row) and begins reading a freshly loaded
W shift register. The whole loop's L x line_elems products are evaluated when
the loop starts; values do not depend on timing, only the completion cycle
does, and completions are accounted cycle by cycle.

Buffers
-------
* W: one shift register per column, one line each. A line must be written in
  the cycle the previous line's last element is consumed (just in time).
* X: two line sets (double-buffered). A set holds one line per row covering
  ``line_elems`` consecutive reduction indices, i.e. P+1 loops. A set slot is
  released once the last column has latched its final operand.
* Z: one set of L lines. The final loop of a tile may only start completing
  into it after the previous tile's lines have all been stored.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from .config import Geometry, validate
from .fp16 import fma_f64

if TYPE_CHECKING:
    from .tiler import TilePlan


class Demands(NamedTuple):
    advance: bool
    stall: str | None
    w_due: tuple[int, int, int] | None  # (col, tile, loop)
    x_next: tuple[int, int] | None  # (line set, row)
    x_pending: int
    z_pending: int


class StepResult(NamedTuple):
    advanced: bool
    stall: str | None
    completed_z: tuple[int, np.ndarray] | None  # (tile, L x line_elems values)
    stored: tuple[int, int, np.ndarray] | None  # (tile, row, line values)
    first_issue: int | None  # tile whose first item column 0 issued this cycle
    events: list


@dataclass(frozen=True)
class FmaSlot:
    tile: int
    loop: int
    k_slot: int
    valid: bool


class Datapath:
    """Mutable simulation state of one accelerator instance (single driver)."""

    def __init__(self, g: Geometry, record: bool = False) -> None:
        self.g = validate(g)
        self.record = record
        self.H, self.L, self.D = g.H, g.L, g.depth
        self.S = g.line_elems
        self.cycle = 0
        self.tau = 0
        self.useful_macs = 0
        self.total = 0
        self.loops = 0
        self.chunks = 0
        self.w_line: list[tuple[int, int] | None] = [None] * self.H
        self.w_vals = [np.zeros(self.S) for _ in range(self.H)]
        self.col_out = [np.zeros((self.L, self.S)) for _ in range(self.H)]
        self.x_sets: dict[int, np.ndarray] = {}
        self.x_next_set = 0
        self.x_next_row = 0
        self.x_released = 0
        self.n_sets = 0
        self.z_tile: int | None = None
        self.z_vals = np.zeros((self.L, self.S))
        self.z_pending: list[int] = []
        self.x_latch_cycle = [None] * self.H
        self._demands: Demands | None = None
        self._w_fill: tuple[int, int, int] | None = None
        self._plan = None

    # -- setup -----------------------------------------------------------

    def load(self, tp: TilePlan) -> None:
        if tp.geometry != self.g:
            raise ValueError("plan geometry does not match the datapath")
        self._plan = tp
        self.N = tp.N
        self.loops = tp.loops
        self.chunks = tp.chunks
        self.tile_items = self.loops * self.S
        self.total = len(tp.tiles) * self.tile_items
        self.n_sets = len(tp.tiles) * self.chunks
        self.rows = [t.m_rows for t in tp.tiles]
        self.kcols = [t.k_cols for t in tp.tiles]
        self.end_tau = self.total + self.H * self.D - 1

    @property
    def done(self) -> bool:
        return (
            self._plan is not None
            and self.tau >= self.end_tau
            and self.z_tile is None
            and not self.z_pending
        )

    # -- helpers -----------------------------------------------------------

    def _loop_valid_macs(self, item: int, col: int) -> int:
        t = item // self.tile_items
        j = (item // self.S) % self.loops
        if j * self.H + col >= self.N:
            return 0
        return self.rows[t] * self.kcols[t]

    def slot_valid(self, item: int, col: int) -> bool:
        t = item // self.tile_items
        j = (item // self.S) % self.loops
        return j * self.H + col < self.N and item % self.S < self.kcols[t]

    def fma_stage(self, row: int, col: int) -> list[FmaSlot | None]:
        """Contents of one FMA pipeline, oldest first (P+1 slots)."""
        out: list[FmaSlot | None] = []
        for age in range(self.D - 1, -1, -1):
            item = self.tau - 1 - age - col * self.D
            if 0 <= item < self.total:
                t = item // self.tile_items
                valid = self.slot_valid(item, col) and row < self.rows[t]
                out.append(FmaSlot(t, (item // self.S) % self.loops, item % self.S, valid))
            else:
                out.append(None)
        return out

    def busy_macs(self) -> int:
        """Valid FMA completions during the last advancing cycle, in [0, H*L]."""
        if self._plan is None or self.tau == 0:
            return 0
        tau = self.tau - 1
        busy = 0
        for c in range(self.H):
            item = tau - (c + 1) * self.D + 1
            if 0 <= item < self.total and self.slot_valid(item, c):
                busy += self.rows[item // self.tile_items]
        return busy

    # -- per-cycle interface ----------------------------------------------------

    def demands(self) -> Demands:
        """What the array needs from the port this cycle (cached until step)."""
        if self._demands is not None:
            return self._demands
        S, D, H = self.S, self.D, self.H
        tau = self.tau
        stall = None
        r = tau % S
        if r % D == 0:
            c = r // D
            i = tau - c * D
            if 0 <= i < self.total:
                t, j = divmod(i // S, self.loops)
                if self.w_line[c] != (t, j):
                    stall = "w_missing"
                elif t * self.chunks + j // D >= self.x_next_set:
                    stall = "x_missing"
        i2 = tau - H * D + 1
        if (
            stall is None
            and self.z_tile is not None
            and 0 <= i2 < self.total
            and i2 % self.tile_items == self.tile_items - S
        ):
            stall = "z_full"
        advance = stall is None
        tau_next = tau + 1 if advance else tau

        w_due = None
        r2 = tau_next % S
        if r2 % D == 0:
            c = r2 // D
            i = tau_next - c * D
            if 0 <= i < self.total:
                t, j = divmod(i // S, self.loops)
                if self.w_line[c] != (t, j):
                    if j * H + c >= self.N:
                        # padded reduction step: zero line, no memory access
                        self._w_fill = (c, t, j)
                    else:
                        w_due = (c, t, j)

        x_next = None
        x_pending = 0
        if self.x_next_set < self.n_sets and self.x_next_set < self.x_released + 2:
            x_next = (self.x_next_set, self.x_next_row)
            x_pending = self.rows[self.x_next_set // self.chunks] - self.x_next_row
            nxt = self.x_next_set + 1
            if nxt < self.n_sets and nxt < self.x_released + 2:
                x_pending += self.rows[nxt // self.chunks]

        self._demands = Demands(advance, stall, w_due, x_next, x_pending, len(self.z_pending))
        return self._demands

    def step(self, x_feed=None, w_feed=None, drain_grant: bool = False) -> StepResult:
        """Advance one clock cycle.

        ``x_feed`` is ``(set, row, values)``, ``w_feed`` is ``(col, tile, loop,
        values)``; both are written at the end of the cycle. ``drain_grant``
        stores one pending Z line this cycle.
        """
        d = self.demands()
        self._demands = None
        S, D, H = self.S, self.D, self.H
        events = [] if self.record else None
        completed = None
        first_issue = None
        tau = self.tau

        if d.advance:
            r = tau % S
            if r % D == 0:
                c = r // D
                i = tau - c * D
                if 0 <= i < self.total:
                    self._start_loop(c, i, events)
                    if c == 0 and i % self.tile_items == 0:
                        first_issue = i // self.tile_items
            # completion side of the last column
            i2 = tau - H * D + 1
            if 0 <= i2 < self.total:
                rel = i2 % self.tile_items
                if rel == self.tile_items - S:
                    self.z_tile = i2 // self.tile_items
                    self.z_vals = self.col_out[H - 1].copy()
                if rel == self.tile_items - 1:
                    t = i2 // self.tile_items
                    self.z_pending = list(range(self.rows[t]))
                    completed = (t, self.z_vals)
                    if events is not None:
                        events.append(("zbuf", "lines_complete", f"tile={t};rows={self.rows[t]}"))
            self.tau = tau + 1
        elif events is not None:
            events.append(("array", "stall", d.stall))

        if self._w_fill is not None:
            c, t, j = self._w_fill
            self.w_line[c] = (t, j)
            self.w_vals[c] = np.zeros(S)
            self._w_fill = None
        if w_feed is not None:
            c, t, j, vals = w_feed
            if d.w_due != (c, t, j):
                raise ValueError(f"W line {(c, t, j)} fed but {d.w_due} was due")
            self.w_line[c] = (t, j)
            self.w_vals[c] = np.asarray(vals, dtype=np.float64)
        if x_feed is not None:
            sid, row, vals = x_feed
            if d.x_next != (sid, row):
                raise ValueError(f"X line {(sid, row)} fed but {d.x_next} was next")
            buf = self.x_sets.get(sid)
            if buf is None:
                buf = self.x_sets[sid] = np.zeros((self.L, S))
            buf[row] = vals
            self.x_next_row += 1
            if self.x_next_row == self.rows[sid // self.chunks]:
                self.x_next_set += 1
                self.x_next_row = 0
        stored = None
        if drain_grant:
            if not self.z_pending:
                raise ValueError("drain granted with no pending Z line")
            row = self.z_pending.pop(0)
            stored = (self.z_tile, row, self.z_vals[row].copy())
            if not self.z_pending:
                self.z_tile = None
        self.cycle += 1
        return StepResult(d.advance, d.stall, completed, stored, first_issue, events or [])

    def fast_forward(self, fetch_w, on_first_issue, budget: int) -> tuple[int, int]:
        """Advance through cycles whose only port traffic is just-in-time W loads.

        Stops before any cycle that could stall, needs an X load or Z store, or
        touches the Z buffer; those go through :meth:`demands`/:meth:`step`.
        The state afterwards is identical to stepping the same cycles one by
        one with the streamer's priorities. ``fetch_w(col, tile, loop, cycle)``
        returns the line values; ``on_first_issue(tile, cycle)`` is called when
        column 0 starts a tile. Returns ``(cycles, w_loads)``.
        """
        if self._demands is not None:
            raise RuntimeError("fast_forward called mid-cycle")
        S, D, H = self.S, self.D, self.H
        total, ti, loops, chunks, n_sets = self.total, self.tile_items, self.loops, self.chunks, self.n_sets
        end_tau = self.end_tau
        w_line, w_vals = self.w_line, self.w_vals
        tau, cycle = self.tau, self.cycle
        n = w_loads = 0
        while n < budget and not self.z_pending and tau < end_tau:
            if self.x_next_set < n_sets and self.x_next_set < self.x_released + 2:
                break
            i2 = tau - H * D + 1
            if 0 <= i2 < total:
                rel = i2 % ti
                if rel == ti - S or rel == ti - 1:
                    break
            r = tau % S
            if r % D == 0:
                c = r // D
                i = tau - c * D
                if 0 <= i < total:
                    t, j = divmod(i // S, loops)
                    if w_line[c] != (t, j) or t * chunks + j // D >= self.x_next_set:
                        break
                    self.cycle = cycle
                    self._start_loop(c, i, None)
                    if c == 0 and i % ti == 0:
                        on_first_issue(t, cycle)
            r2 = (tau + 1) % S
            if r2 % D == 0:
                c = r2 // D
                i = tau + 1 - c * D
                if 0 <= i < total:
                    t, j = divmod(i // S, loops)
                    if w_line[c] != (t, j):
                        w_line[c] = (t, j)
                        if j * H + c >= self.N:
                            w_vals[c] = np.zeros(S)
                        else:
                            w_vals[c] = fetch_w(c, t, j, cycle)
                            w_loads += 1
            tau += 1
            cycle += 1
            n += 1
        self.tau, self.cycle = tau, cycle
        return n, w_loads

    def _start_loop(self, c: int, item: int, events) -> None:
        S, D, H = self.S, self.D, self.H
        t, j = divmod(item // S, self.loops)
        sid = t * self.chunks + j // D
        x = self.x_sets[sid][:, (j % D) * H + c]
        if c == 0:
            acc = self.col_out[H - 1] if j > 0 else 0.0
        else:
            acc = self.col_out[c - 1]
        self.col_out[c] = fma_f64(x[:, None], self.w_vals[c][None, :], acc)
        self.useful_macs += self._loop_valid_macs(item, c)
        if c == H - 1 and (j % D == D - 1 or j == self.loops - 1):
            del self.x_sets[sid]
            self.x_released += 1
        if events is not None:
            prev = self.x_latch_cycle[c]
            self.x_latch_cycle[c] = self.cycle
            events.append((f"col{c}", "x_change", f"tile={t};loop={j};hold={'' if prev is None else self.cycle - prev}"))
