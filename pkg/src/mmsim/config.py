"""Accelerator geometry and the structural quantities derived from it."""

from __future__ import annotations

import math
from dataclasses import dataclass

ELEM_BITS = 16
PORT_BITS = 32


class InvalidGeometry(ValueError):
    def __init__(self, field: str, value) -> None:
        super().__init__(f"invalid geometry: {field}={value!r}")
        self.field = field
        self.value = value


@dataclass(frozen=True)
class Geometry:
    """Design-time parameters of the FMA array.

    H FMAs per row are chained; L rows run in lockstep; every FMA has P
    internal pipeline registers, so a result takes P+1 cycles.
    """

    H: int = 4
    L: int = 8
    P: int = 3
    elem_bits: int = ELEM_BITS
    port_bits: int = PORT_BITS

    @property
    def depth(self) -> int:
        """Cycles from FMA issue to result (P+1)."""
        return self.P + 1

    @property
    def line_elems(self) -> int:
        return line_elems(self)

    @property
    def fma_count(self) -> int:
        return self.H * self.L

    @property
    def ports(self) -> int:
        return required_ports(self)

    @property
    def peak_macs_per_cycle(self) -> int:
        return self.H * self.L


DEFAULT_GEOMETRY = Geometry(4, 8, 3)


def line_elems(g: Geometry) -> int:
    return g.H * (g.P + 1)


def required_ports(g: Geometry) -> int:
    """32-bit ports for one line, plus one spare for non-word-aligned access."""
    return math.ceil(line_elems(g) * g.elem_bits / g.port_bits) + 1


def validate(g: Geometry) -> Geometry:
    for name, low in (("H", 1), ("L", 1), ("P", 0)):
        value = getattr(g, name)
        if isinstance(value, bool) or not isinstance(value, int) or value < low:
            raise InvalidGeometry(name, value)
    if g.elem_bits != ELEM_BITS:
        raise InvalidGeometry("elem_bits", g.elem_bits)
    if not isinstance(g.port_bits, int) or g.port_bits < 1:
        raise InvalidGeometry("port_bits", g.port_bits)
    return g


def geometry_from_mapping(values: dict) -> Geometry:
    """Build and validate a geometry from config keys ``H``, ``L``, ``P``."""
    kwargs = {k: values[k] for k in ("H", "L", "P") if k in values}
    for k, v in kwargs.items():
        if isinstance(v, bool) or not isinstance(v, int):
            raise InvalidGeometry(k, v)
    return validate(Geometry(**kwargs))
