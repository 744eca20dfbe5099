"""Area model and design-space sweeps over the array shape."""

from __future__ import annotations

import csv
import io
from dataclasses import astuple, dataclass, fields

from .config import Geometry, required_ports, validate


@dataclass(frozen=True)
class AreaModel:
    """Linear area in mm^2: a fixed part plus a per-FMA slice.

    The defaults pass through the three reported points: 0.07 mm^2 for 32
    FMAs, about the cluster's 0.5 mm^2 for 256, and about twice that for 512.
    P is folded into the per-FMA cost.
    """

    fixed_mm2: float = 0.0086
    per_fma_mm2: float = 0.00192


def area_mm2(g: Geometry, m: AreaModel = AreaModel()) -> float:
    validate(g)
    return m.fixed_mm2 + m.per_fma_mm2 * g.fma_count


@dataclass(frozen=True)
class SweepRow:
    H: int
    L: int
    fma_count: int
    area_mm2: float
    ports: int
    peak_macs_per_cycle: int


def sweep(h_range, l_range, P: int = 3, model: AreaModel = AreaModel()) -> list[SweepRow]:
    hs, ls = list(h_range), list(l_range)
    if not hs or not ls:
        raise ValueError("sweep ranges must be non-empty")
    rows = []
    for h in hs:
        for l in ls:
            g = validate(Geometry(h, l, P))
            rows.append(SweepRow(h, l, g.fma_count, area_mm2(g, model), required_ports(g), g.fma_count))
    return rows


def sweep_csv(rows: list[SweepRow], extra: dict[str, list] | None = None) -> str:
    """CSV with columns H,L,fma_count,area_mm2,ports,peak_macs_per_cycle (+ extras)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    extra = extra or {}
    writer.writerow([f.name for f in fields(SweepRow)] + list(extra))
    for i, row in enumerate(rows):
        writer.writerow(list(astuple(row)) + [col[i] for col in extra.values()])
    return out.getvalue()
