"""
Sweeping the array shape
========================

Area and port count over H and L, with measured utilization on a probe GEMM.
"""

import numpy as np

from mmsim import GemmProblem, Geometry, MatF16, analyze, run_gemm, sweep

rng = np.random.default_rng(2)
probe = GemmProblem(MatF16.from_float(rng.uniform(-1, 1, (64, 64))), MatF16.from_float(rng.uniform(-1, 1, (64, 64))))

print(" H   L  FMAs   mm^2  ports  util")
for row in sweep([2, 4, 8, 16], [4, 8, 16, 32]):
    g = Geometry(row.H, row.L, 3)
    util = analyze(run_gemm(probe, g).trace, g).utilization
    print(f"{row.H:2d} {row.L:3d} {row.fma_count:5d} {row.area_mm2:6.3f} {row.ports:5d} {util:6.3f}")
