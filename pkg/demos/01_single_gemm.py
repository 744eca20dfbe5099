"""
Simulating one GEMM
===================

Run a small matrix product through the cycle model, check it against the
untimed reference, and look at where the cycles went.
"""

import numpy as np

from mmsim import DEFAULT_GEOMETRY, GemmProblem, MatF16, analyze, gemm_padded, run_gemm

g = DEFAULT_GEOMETRY
print(f"array: {g.L} rows x {g.H} columns, P={g.P}, line of {g.line_elems} elements, {g.ports} ports")

rng = np.random.default_rng(0)
X = MatF16.from_float(rng.uniform(-1, 1, (24, 40)))
W = MatF16.from_float(rng.uniform(-1, 1, (40, 48)))
problem = GemmProblem(X, W)

result = run_gemm(problem, g)
assert result.Z == gemm_padded(problem, g)  # bit-for-bit, including rounding order

report = analyze(result.trace, g)
print(f"{report.cycles} cycles, {report.useful_macs} MACs, utilization {report.utilization:.3f}")
print("stalls:", dict(result.trace.stalls))
print("port traffic:", report.traffic)

# %%
# Utilization grows with problem size as fill and drain get amortized.
for s in (8, 16, 32, 64, 128):
    p = GemmProblem(MatF16.from_float(rng.uniform(-1, 1, (s, s))), MatF16.from_float(rng.uniform(-1, 1, (s, s))))
    r = analyze(run_gemm(p, g).trace, g)
    print(f"{s:4d}^3  {r.macs_per_cycle:6.2f} MAC/cycle  {r.gflops:6.2f} GFLOPS @ 666 MHz")
