"""
Positive details on a convex curve
==================================

For a convex curve each refined point lies outside the predicted polygon,
so with outward normals every detail is positive.
"""

from normalmt import Ellipse, TransformConfig, decompose
from normalmt.curve import initial_sample_parameter

ellipse = Ellipse(2.0, 1.0)
v0, s0 = initial_sample_parameter(ellipse, 12)

for p in (2, 3, 4):
    dec = decompose(ellipse, v0, s0, TransformConfig(p, levels=8))
    mins = [d.min() for d in dec.details]
    print("p=%d  smallest detail per level:" % p, " ".join("%.1e" % m for m in mins))
