"""End-to-end calibration of the double-drive entangling block.

The pipeline mirrors what one would run on hardware:

1. pick drive amplitudes from the single-drive quarter-turn calibration,
2. sweep both carrier detunings over a 2-D grid and locate the point where
   the two addressed-population ridges cross (both qubits driven at the
   other's shifted frequency),
3. sweep the block duration and find the root of c1 + c2 = pi/2, the
   shortest block from which iSWAP and SWAP compose exactly.

This takes a few minutes; stage results are printed as they arrive.
"""

import math

from ccrkit.device import reference_device
from ccrkit.experiments import calibrate_ccr, compose_iswap, compose_swap

TWO_PI = 2 * math.pi
p = reference_device()


def stage(name, payload):
    if name == "amplitudes":
        print(f"[amplitudes]     ({payload[0] / TWO_PI / 1e6:.1f}, {payload[1] / TWO_PI / 1e6:.1f}) MHz")
    elif name == "operating-point":
        d0, d1 = payload
        print(f"[operating point] detunings ({d0 / TWO_PI / 1e6:+.2f}, {d1 / TWO_PI / 1e6:+.2f}) MHz")
    elif name == "duration-sweep":
        first, last = payload[0], payload[-1]
        print(
            f"[duration sweep]  c1+c2 from {first[1].c1 + first[1].c2:.3f} rad at {first[0]} samples"
            f" to {last[1].c1 + last[1].c2:.3f} rad at {last[0]} samples"
        )


point = calibrate_ccr(p, use_cancellation=False, stage_callback=stage)
print(f"\ncalibrated block: {point.duration} samples = {point.duration * p.dt * 1e9:.1f} ns")

iswap = compose_iswap(p, point)
swap = compose_swap(p, point)
print(f"iSWAP: {iswap.n_blocks} blocks, {iswap.duration_seconds(p) * 1e9:.1f} ns")
print(f"SWAP:  {swap.n_blocks} blocks, {swap.duration_seconds(p) * 1e9:.1f} ns")
