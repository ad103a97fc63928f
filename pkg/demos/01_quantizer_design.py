"""Designing the fronthaul quantizer.

A uniform midrise quantizer with L levels is tuned to a Gaussian source by
picking the step that minimizes mean squared error.  This script prints the
optimal step, the distortion and the SQNR for a few resolutions, then shows
what a 4-level quantizer does to a handful of samples.
"""

import numpy as np

from qaprecoding.quantizer import gaussian_distortion, make_quantizer, optimize_step_size, quantize

print(" L   step     distortion  SQNR [dB]")
for L in (2, 4, 8, 16):
    step, dist = optimize_step_size(L)
    print(f"{L:2d}  {step:.5f}  {dist:.6f}   {-10 * np.log10(dist):6.2f}")

# a slightly wrong step costs distortion on both sides
step4, best = optimize_step_size(4)
for scale in (0.8, 1.0, 1.2):
    print(f"L=4 step x{scale}: distortion {gaussian_distortion(4, scale * step4):.6f}")

spec = make_quantizer(4, step4)
x = np.array([-2.3, -0.7, -0.1, 0.2, 0.9, 3.0])
print("labels   ", spec.labels)
print("input    ", x)
print("quantized", quantize(spec, x))
