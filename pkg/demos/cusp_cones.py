"""Tangent cones of the cusp {(s^3, s^2) : s >= 0} at the origin.

Walks through the first-order cone, the (empty) second-order proper set along
h = (0, 1), and the slices that are non-empty even though the proper set is not.

    python3 demos/cusp_cones.py
"""
import numpy as np

from hocones.cones import (DirectionCollection, SliceKind, SliceSpec, Status, member_proper,
                           member_slice, sample_cone)
from hocones.sets import cusp

Q = cusp()
x = np.zeros(2)


def table(rows):
    for d, v in rows:
        angle = np.degrees(np.arctan2(d[1], d[0])) % 360
        print(f"  {angle:6.1f} deg  ({d[0]:+.3f}, {d[1]:+.3f})  {v.status}")


print("first-order cone, 12 directions")
table(sample_cone(Q, DirectionCollection(x), SliceSpec(SliceKind.FIRST_ORDER), 12))

h = DirectionCollection(x, [np.array([0.0, 1.0])])
print("\nsecond-order proper vectors along h = (0, 1)")
accepted = 0
for w in [(0, 0), (1, 0), (-1, 0), (0, 1), (5, 5), (0.3, -2)]:
    v = member_proper(Q, h, w)
    accepted += v.status is Status.ACCEPTED
    print(f"  w = {w}: {v.status}")
print(f"  {accepted} accepted; the arc x2 = t^2 never reaches x1 = t^3 at order t^2")

print("\nasymptotic slice (tau/t -> infinity) along h = (0, 1)")
table(sample_cone(Q, h, SliceSpec(SliceKind.INFINITY), 12))

# the evidence behind one verdict: scaled distance by level
v = member_slice(Q, h, [1, 0], SliceSpec(SliceKind.INFINITY))
ev = v.evidence
print(f"\nevidence for w = (1, 0): {v.status} at level {v.decisive_level}")
print("  level        t           tau/t      scaled distance")
for row in ev[::4]:
    print(f"  {int(row[0]):5d}  {row[1]:.3e}  {row[3]:.3e}  {row[5]:.3e}")
