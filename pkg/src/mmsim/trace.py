"""Cycle trace container shared by the simulator, the streamer model and perf."""

from __future__ import annotations

import csv
import enum
import io
from collections import Counter
from dataclasses import dataclass, field

from .config import Geometry


class Verbosity(enum.Enum):
    OFF = "off"
    SUMMARY = "summary"
    PER_CYCLE = "per_cycle"


@dataclass
class CycleTrace:
    """Aggregate counters of one run, plus per-cycle events when requested.

    Events are ``(cycle, unit, event, detail)`` tuples. Units are ``port``,
    ``array``, ``col<c>`` and ``zbuf``.
    """

    geometry: Geometry
    dims: tuple[int, int, int] = (0, 0, 0)
    verbosity: Verbosity = Verbosity.SUMMARY
    cycles: int = 0
    useful_macs: int = 0
    compute_cycles: int = 0
    stall_cycles: int = 0
    stalls: Counter = field(default_factory=Counter)
    w_lines: int = 0
    x_lines: int = 0
    z_lines: int = 0
    idle_cycles: int = 0
    elems_moved: int = 0
    tiles: int = 0
    tile_first_issue: list[int] = field(default_factory=list)
    tile_last_store: list[int] = field(default_factory=list)
    events: list[tuple[int, str, str, str]] = field(default_factory=list)

    @property
    def per_cycle(self) -> bool:
        return self.verbosity is Verbosity.PER_CYCLE

    def record(self, cycle: int, unit: str, event: str, detail: str = "") -> None:
        self.events.append((cycle, unit, event, detail))

    def events_of(self, unit: str | None = None, event: str | None = None) -> list[tuple[int, str, str, str]]:
        return [e for e in self.events if (unit is None or e[1] == unit) and (event is None or e[2] == event)]

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["cycle", "unit", "event", "detail"])
        writer.writerows(self.events)
        return out.getvalue()

    def port_csv(self) -> str:
        """Port transactions only, as ``cycle,kind,index`` (index = matrix row)."""
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["cycle", "kind", "index"])
        for cycle, unit, event, detail in self.events:
            if unit == "port":
                row = dict(kv.split("=") for kv in detail.split(";") if kv)
                writer.writerow([cycle, event, row.get("row", "")])
        return out.getvalue()
