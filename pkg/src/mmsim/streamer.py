"""Shallow-branch memory port and the streamer's load/store interleaving.

The port moves one line (plus the spare word) per cycle, either a load or a
store. W lines have absolute priority because each W shift register must be
refilled in the cycle its previous line runs out; Z stores and X loads share
the remaining slots, Z first.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .config import Geometry, required_ports
from .trace import CycleTrace


class Slot(enum.Enum):
    W_LOAD = "W_load"
    X_LOAD = "X_load"
    Z_STORE = "Z_store"
    IDLE = "idle"


@dataclass(frozen=True)
class PortModel:
    width_bits: int
    latency: int = 1

    @classmethod
    def for_geometry(cls, g: Geometry) -> PortModel:
        return cls(required_ports(g) * g.port_bits)

    def line_capacity(self, elem_bits: int = 16) -> int:
        return self.width_bits // elem_bits


def st_plan_cycle(w_due: bool, x_pending: int, z_pending: int) -> Slot:
    if w_due:
        return Slot.W_LOAD
    if z_pending > 0:
        return Slot.Z_STORE
    if x_pending > 0:
        return Slot.X_LOAD
    return Slot.IDLE


class Streamer:
    """Per-run port arbiter; records every transaction into the trace."""

    def __init__(self, trace: CycleTrace) -> None:
        self.trace = trace

    def plan_cycle(self, demands) -> Slot:
        return st_plan_cycle(demands.w_due is not None, demands.x_pending, demands.z_pending)

    def commit(self, cycle: int, slot: Slot, row: int, detail: str, elems: int = 0) -> None:
        tr = self.trace
        tr.elems_moved += elems
        if slot is Slot.W_LOAD:
            tr.w_lines += 1
        elif slot is Slot.X_LOAD:
            tr.x_lines += 1
        elif slot is Slot.Z_STORE:
            tr.z_lines += 1
        else:
            tr.idle_cycles += 1
            return
        if tr.per_cycle:
            tr.record(cycle, "port", slot.value, detail)


def st_traffic_totals(trace: CycleTrace) -> dict[str, int]:
    return {
        "w_lines": trace.w_lines,
        "x_lines": trace.x_lines,
        "z_lines": trace.z_lines,
        "idle_cycles": trace.idle_cycles,
    }


def traffic_bytes(trace: CycleTrace) -> int:
    """Bytes of matrix data moved; padded lanes are zero-filled, not transferred."""
    return 2 * trace.elems_moved
