"""
Compression by truncation
=========================

Dropping the fine details and reconstructing gives a curve close to the
original, since the dropped details are small.
"""

import numpy as np

from normalmt import Ellipse, TransformConfig, decompose, initial_sample_uniform, reconstruct

ellipse = Ellipse(2.0, 1.0)
v0, s0 = initial_sample_uniform(ellipse, 12)
dec = decompose(ellipse, v0, s0, TransformConfig(3, tangential_scheme="dd:4", levels=6))
fine = reconstruct(dec)
print("round-trip error: %.1e" % np.abs(fine - dec.finest_points()).max())

for keep in range(0, 7):
    approx = reconstruct(dec.truncated(keep))
    print("keep %d levels: max error %.2e" % (keep, np.abs(approx - fine).max()))
