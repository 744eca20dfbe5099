"""Untimed GEMM reference with the accelerator's accumulation order.

Every output element is a left-to-right fold over the reduction index,
``acc = fma(x[m, n], w[n, k], acc)`` starting from +0, with a binary16 rounding
at each step. That is the order the FMA ring produces, so these functions are
the bit-exact oracle for the cycle simulator.
"""

from __future__ import annotations

import csv
import io
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import Geometry
from .fp16 import F16, bits_to_f64, f16_from_decimal, f64_to_bits, fma_f64

RMAT_MAGIC = b"RMAT"


class DimensionError(ValueError):
    pass


@dataclass(eq=False)
class MatF16:
    """Dense row-major binary16 matrix stored as uint16 bit patterns."""

    rows: int
    cols: int
    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.asarray(self.data)
        if data.size != self.rows * self.cols:
            raise DimensionError(f"data has {data.size} elements, expected {self.rows}x{self.cols}")
        self.data = np.ascontiguousarray(data, dtype=np.uint16).reshape(self.rows, self.cols)

    @classmethod
    def from_float(cls, values) -> MatF16:
        arr = np.atleast_2d(np.asarray(values, dtype=np.float64))
        return cls(arr.shape[0], arr.shape[1], f64_to_bits(arr))

    @classmethod
    def from_bits(cls, bits) -> MatF16:
        arr = np.atleast_2d(np.asarray(bits, dtype=np.uint16))
        return cls(arr.shape[0], arr.shape[1], arr)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> MatF16:
        return cls(rows, cols, np.zeros((rows, cols), dtype=np.uint16))

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def to_float(self) -> np.ndarray:
        return bits_to_f64(self.data)

    def __getitem__(self, idx) -> F16:
        r, c = idx
        return F16(int(self.data[r, c]))

    def __eq__(self, other) -> bool:
        """Bit-pattern equality (NaN == NaN, +0 != -0)."""
        if not isinstance(other, MatF16):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.data, other.data))

    def transpose(self) -> MatF16:
        return MatF16(self.cols, self.rows, self.data.T.copy())

    # -- file formats -------------------------------------------------------

    def to_rmat(self) -> bytes:
        return RMAT_MAGIC + struct.pack("<II", self.rows, self.cols) + self.data.astype("<u2").tobytes()

    @classmethod
    def from_rmat(cls, blob: bytes) -> MatF16:
        if blob[:4] != RMAT_MAGIC or len(blob) < 12:
            raise ValueError("not an RMAT container")
        rows, cols = struct.unpack("<II", blob[4:12])
        payload = blob[12:]
        if len(payload) != 2 * rows * cols:
            raise ValueError(f"RMAT payload is {len(payload)} bytes, expected {2 * rows * cols}")
        return cls(rows, cols, np.frombuffer(payload, dtype="<u2").astype(np.uint16))

    @classmethod
    def from_csv(cls, text: str) -> MatF16:
        rows = [r for r in csv.reader(io.StringIO(text)) if r and any(f.strip() for f in r)]
        if not rows or len({len(r) for r in rows}) != 1:
            raise ValueError("CSV matrix must be non-empty and rectangular")
        bits = [[f16_from_decimal(f).bits for f in r] for r in rows]
        return cls.from_bits(bits)

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        for row in self.to_float():
            writer.writerow([repr(float(v)) for v in row])
        return out.getvalue()


def load_matrix(path: str | Path) -> MatF16:
    path = Path(path)
    blob = path.read_bytes()
    if blob[:4] == RMAT_MAGIC:
        return MatF16.from_rmat(blob)
    return MatF16.from_csv(blob.decode())


def save_matrix(mat: MatF16, path: str | Path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        path.write_text(mat.to_csv())
    else:
        path.write_bytes(mat.to_rmat())


@dataclass
class GemmProblem:
    X: MatF16
    W: MatF16

    def __post_init__(self) -> None:
        if self.X.cols != self.W.rows:
            raise DimensionError(f"X is {self.X.rows}x{self.X.cols} but W is {self.W.rows}x{self.W.cols}")

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.X.rows, self.X.cols, self.W.cols


def _fold(x: np.ndarray, w: np.ndarray, extra_zero_steps: int = 0) -> np.ndarray:
    m, n = x.shape
    k = w.shape[1]
    acc = np.zeros((m, k), dtype=np.float64)
    for t in range(n):
        acc = fma_f64(x[:, t : t + 1], w[t : t + 1, :], acc)
    for _ in range(extra_zero_steps):
        acc = fma_f64(0.0, 0.0, acc)
    return f64_to_bits(acc)


def gemm_ordered(p: GemmProblem) -> MatF16:
    m, _, k = p.dims
    return MatF16(m, k, _fold(p.X.to_float(), p.W.to_float()))


def padded_reduction(n: int, g: Geometry) -> int:
    """Reduction length rounded up to whole ring loops (a multiple of H)."""
    return -(-n // g.H) * g.H


def gemm_padded(p: GemmProblem, g: Geometry) -> MatF16:
    """gemm_ordered followed by the zero-operand FMA steps the tiler pads with."""
    m, n, k = p.dims
    pad_n = padded_reduction(n, g) - n
    return MatF16(m, k, _fold(p.X.to_float(), p.W.to_float(), pad_n))
