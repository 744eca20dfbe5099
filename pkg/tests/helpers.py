"""Shared builders for simulator tests."""

from __future__ import annotations

import numpy as np

from mmsim.golden import GemmProblem, MatF16

# boundaries: zeros, smallest/largest subnormals, smallest normal, 1 and its
# neighbours, max finite, infinities, NaNs
CORNERS = [
    0x0000, 0x8000, 0x0001, 0x8001, 0x0002, 0x03FF, 0x83FF, 0x0400, 0x8400,
    0x0401, 0x3BFF, 0x3C00, 0xBC00, 0x3C01, 0xBC01, 0x3800, 0x4000, 0xC000,
    0x7BFE, 0x7BFF, 0xFBFF, 0x7C00, 0xFC00, 0x7E00, 0x7C01, 0xFE00, 0x1400,
    0x0C00, 0x2400, 0x5800, 0x6000,
]


def structured_triples(rng, n):
    """Operands with nearby exponents so a*b and c interact (cancellation, ties)."""
    a = rng.integers(0, 0x7C00, n) | (rng.integers(0, 2, n) << 15)
    b = rng.integers(0x3000, 0x4800, n) | (rng.integers(0, 2, n) << 15)
    prod_exp = ((a >> 10) & 0x1F) + ((b >> 10) & 0x1F) - 15
    c_exp = np.clip(prod_exp + rng.integers(-3, 4, n), 0, 30)
    c = (c_exp << 10) | rng.integers(0, 1024, n) | (rng.integers(0, 2, n) << 15)
    return np.stack([a, b, c], axis=1).astype(np.uint16)


# values covering normals, subnormals, signed zeros and infinities
SPECIAL_BITS = np.array([0x0000, 0x8000, 0x0001, 0x83FF, 0x0400, 0x7BFF, 0xFBFF, 0x7C00, 0xFC00], dtype=np.uint16)


def random_problem(rng, m, n, k, specials=0.0):
    def mat(r, c):
        bits = MatF16.from_float(rng.uniform(-2, 2, (r, c))).data
        if specials:
            mask = rng.random((r, c)) < specials
            bits[mask] = rng.choice(SPECIAL_BITS, mask.sum())
        return MatF16.from_bits(bits)

    return GemmProblem(mat(m, n), mat(n, k))


class Recorder:
    """run_gemm observer collecting per-cycle datapath facts."""

    def __init__(self, stage_probe=None):
        self.busy = []  # busy_macs per cycle, 0 on stalls
        self.advanced = []
        self.issues = []  # (cycle, col, FmaSlot) for every newly issued pipeline slot
        self.stage_probe = stage_probe
        self.cycle = 0

    def __call__(self, dp, res):
        self.advanced.append(res.advanced)
        self.busy.append(dp.busy_macs() if res.advanced else 0)
        if res.advanced and self.stage_probe is not None:
            for col in range(dp.H):
                newest = dp.fma_stage(0, col)[-1]
                if newest is not None:
                    self.issues.append((self.cycle, col, newest))
        self.cycle += 1
