"""
Batching an autoencoder training step
=====================================

Every dense layer contributes a forward GEMM and two backward GEMMs. With a
batch of one, forward and input-gradient GEMMs have K=1 and fill one of the
sixteen output slots of a row; the weight-gradient GEMMs do better.
"""

from mmsim.workloads import MLPERF_TINY_AUTOENCODER, NARROW_AUTOENCODER, bench

for name, layers in (("reference", MLPERF_TINY_AUTOENCODER), ("narrow", NARROW_AUTOENCODER)):
    for B in (1, 16):
        r = bench(B, layers)
        agg = r.aggregate()
        print(
            f"{name:9s} B={B:2d}: speedup {agg['speedup']:5.2f}x "
            f"(fwd {agg['speedup_fwd']:5.2f}, dX {agg['speedup_dx']:5.2f}, dW {agg['speedup_dw']:5.2f}), "
            f"{agg['macs_per_cycle']:5.2f} MAC/cycle, footprint {agg['footprint_bytes'] / 1000:.0f} kB"
        )
