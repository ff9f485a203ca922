"""A point that passes every first-order test but is not a local minimizer.

f(x) = -x1 + x2^3 on the cusp.  The gradient (-1, 0) is non-negative on the
first-order cone {(0, c) : c >= 0}, and no proper second-order direction
exists, so the classical second-order test has nothing to check.  The
asymptotic slice does contain (1, 0), where f'(0) w = -1 < 0.

    python3 demos/counterexample.py
"""
import numpy as np

from hocones.expr import evaluate, parse
from hocones.optcheck import check_first_order, disqualify
from hocones.sets import cusp

Q = cusp()
f = parse("-x1 + x2^3", 2)
x = np.zeros(2)

fo = check_first_order(f, Q, x)
print(f"first-order test: {fo.verdict}")

res = disqualify(f, Q, x, max_order=2)
print(res.to_text())

# sanity check with the curve itself: f(s^3, s^2) = -s^3 + s^6 < 0 for small s > 0
s = np.array([0.5, 0.1, 0.01])
pts = Q.curve(s)
print("f along the cusp:", evaluate(f, [pts[:, 0], pts[:, 1]]))
