"""
Clifford gaussians on a one-dimensional torus
=============================================

A periodic supercell of length L measures distances through the chord of
the circle it wraps onto, and the basis functions replace x - A with
(L / 2 pi) sin(2 pi (x - A) / L).  This walk-through looks at both pieces
and at how quickly they approach ordinary gaussians as L grows.

Run with ``python demos/clifford_gaussians.py``.
"""
import numpy as np

from cliffordqc.basis import CliffordPrimitive, FreePrimitive, eval_primitive
from cliffordqc.clifford_integrals import clifford_overlap, clifford_product
from cliffordqc.topology import SupercellTopology, torus_distance

L = 10.0
torus = SupercellTopology(1, (L,))

# The embedded distance is periodic and tops out at L / pi, half a period away.
for dx in (0.0, 1.0, L / 2, L, L + 1.0):
    print(f"dx = {dx:5.2f}  chord = {torus_distance(torus, [0, 0, 0], [dx, 0, 0]):.6f}")

# A p-type Clifford gaussian is periodic and changes sign across its centre.
p = CliffordPrimitive(0.8, (2.0, 0.0, 0.0), (1, 0, 0), torus)
x = np.array([0.5, 2.5, 4.0])
r = np.column_stack([x, np.zeros(3), np.zeros(3)])
print("g(x)     ", eval_primitive(p, r))
print("g(x + L) ", eval_primitive(p, r + [L, 0, 0]))

# The product of two Clifford gaussians is again a single Clifford gaussian.
a = CliffordPrimitive(1.0, (1.0, 0.0, 0.0), (0, 0, 0), torus)
b = CliffordPrimitive(0.6, (3.5, 0.0, 0.0), (1, 0, 0), torus)
prod = clifford_product(a, b)
grid = np.column_stack([np.linspace(0, L, 7), np.full(7, 0.3), np.zeros(7)])
print("product rule residual", np.max(np.abs(prod.evaluate(grid) - eval_primitive(a, grid) * eval_primitive(b, grid))))
print(f"effective exponent gamma = {prod.axes[0].gamma:.6f}, centre = {prod.axes[0].center:.6f}")

# Large boxes: the overlap approaches the free-space value with an L^-2 error.
fa = FreePrimitive(1.0, (0.0, 0, 0))
ref = (np.pi / 2.0) ** 1.5
for big in (25.0, 50.0, 100.0, 200.0):
    t = SupercellTopology(1, (big,))
    s = clifford_overlap(CliffordPrimitive(1.0, (0, 0, 0), (0, 0, 0), t), CliffordPrimitive(1.0, (0, 0, 0), (0, 0, 0), t))
    print(f"L = {big:6.1f}  S/S_free - 1 = {s / ref - 1: .3e}   x L^2 = {(s / ref - 1) * big**2: .4f}")
