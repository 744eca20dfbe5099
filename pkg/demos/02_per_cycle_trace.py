"""
Reading a per-cycle trace
=========================

The per-cycle trace shows the memory schedule: one W line every P+1 cycles,
with X loads and Z stores slotted in between.
"""

import csv
import io
from collections import Counter

import numpy as np

from mmsim import DEFAULT_GEOMETRY, GemmProblem, MatF16, run_gemm

g = DEFAULT_GEOMETRY
rng = np.random.default_rng(1)
p = GemmProblem(MatF16.from_float(rng.uniform(-1, 1, (16, 32))), MatF16.from_float(rng.uniform(-1, 1, (32, 16))))
trace = run_gemm(p, g, verbosity="per_cycle").trace

ports = list(csv.DictReader(io.StringIO(trace.port_csv())))
print("transactions:", Counter(r["kind"] for r in ports))

# draw the first 80 cycles of the port: W, X, Z or '.' for idle
busy = {int(r["cycle"]): r["kind"][0] for r in ports}
print("".join(busy.get(c, ".") for c in range(80)))

w = [int(r["cycle"]) for r in ports if r["kind"] == "W_load"]
# the one long gap is the initial X preload
print("W gaps:", Counter(b - a for a, b in zip(w, w[1:])))
