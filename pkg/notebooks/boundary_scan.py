# coding: utf-8

# # Approaching the natural boundary
#
# For the lacunary counterexample the continuation stops at Re s = -m.  The
# middle piece of its decomposition is a lacunary power series in
# exp(-(s + m)); approaching the line it grows without bound, but only
# logarithmically in the distance for dyadic gaps.

import math

from merocont import CounterexampleSeries, boundary_scan, decompose_counterexample

series = CounterexampleSeries(1)

# ## The decomposition right of the boundary

d = decompose_counterexample(series, 2.0, 80)
print("t1", d.t1, "t2", d.t2, "t3", d.t3, "total", d.total)

# ## Real approach

offsets = [10.0**-k for k in range(1, 11)]
for rec in boundary_scan(series, offsets, [0.0]):
    print(f"{rec.offset:8.0e}  |t2| = {rec.t2_abs:8.4f}  log2(1/offset) = {math.log2(1 / rec.offset):6.2f}")

# ## Along the line at fixed distance
#
# Heights 2 pi k / 8 sit over dyadic roots of unity, where the gaps align.

heights = [2 * math.pi * k / 8 for k in range(8)]
for rec in boundary_scan(series, [0.001], heights):
    print(f"{rec.height:6.3f}  {rec.t2_abs:8.4f}")
