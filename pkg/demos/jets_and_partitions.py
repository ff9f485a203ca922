"""Two routes to the t^k coefficient of f(x + t h_1 + ... + t^(k-1) h_(k-1) + t^k w).

The jet route propagates truncated power series through the expression tree;
the partition route sums derivative tensors over multi-indices with
sum(i * alpha_i) = k.  They should agree to rounding.

    python3 demos/jets_and_partitions.py
"""
import numpy as np

from hocones.expr import parse
from hocones.jets import Arc, eval_on_arc
from hocones.taylor import enumerate_multiindices, sum_order_k

print("multi-indices for k = 4:", enumerate_multiindices(4))
print("counts for k = 1..12:", [len(enumerate_multiindices(k)) for k in range(1, 13)])

f = parse("x1^3 * x2 - sin(x1 * x2) + exp(x2 - x3^2)", 3)
rng = np.random.default_rng(7)
x = rng.normal(size=3)
print("\n  k        jet route            partition route      |diff|")
for k in range(2, 7):
    H, w = rng.normal(size=(k - 1, 3)), rng.normal(size=3)
    jet = eval_on_arc(f, Arc(x, H, (w, k, 1.0)), k).coeffs[k]
    part = sum_order_k(f, x, H, w)
    print(f"  {k}  {jet: .15e}  {part: .15e}  {abs(jet - part):.1e}")
