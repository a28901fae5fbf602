"""Osculating conics, sextactic points, and the quadric along a section.

A planar convex curve has a unique conic with fourth-order contact at
each point; the points where the contact jumps to order six are the
sextactic points, equivalently the critical points of the affine
curvature.  Along a planar section of a hypersurface there is a unique
quadric matching the tangency data and the normal field to second
order.  This script shows the detectors and the contact exponents.
"""

import math

import numpy as np

import billiardlab as bl
from billiardlab.jets import dyadic_grid

print("=== 1. The osculating conic of a circle is the circle ===")
disk = bl.Ball(1.0)
germ = bl.germ_at(disk, 0.7)
conic = bl.osculating_conic(germ)
target = bl.ConicQuadric([[1, 0, 0], [0, 1, -1], [0, -1, 0]])  # x^2+y^2-2y=0
print("matrix distance to the circle's own conic:", conic.distance_to(target))

print()
print("=== 2. The quintic gap and its chart scaling ===")
c = 1e-2
perturbed = bl.PlanarGerm([0, 0, 0.5, 0, 0, c])
flag, gap = bl.is_sextactic(perturbed, tol=1e-9)
print(f"y = x^2/2 + {c} x^5: sextactic={flag}, gap={gap:.4e}")
zoomed = perturbed.rescaled(2.0)
print("gap after zooming the chart by 2 (law: gap -> 8 gap):",
      f"{bl.is_sextactic(zoomed)[1]:.4e}")
k, dk = bl.affine_curvature(perturbed, 0.0)
print(f"affine curvature derivative at 0: {dk:.3f}  (equals 40c = {40*c})")

print()
print("=== 3. Sextactic points of a bumped circle ===")
eps = 2e-3
bumped = bl.RadialBody2D(
    [1.0, 0, 0, 0, 0, 0],
    [0.0, eps * 10 / 16, 0.0, -eps * 5 / 16, 0.0, eps / 16])  # r = 1 + eps sin^5
thetas = np.linspace(0.0, 2 * math.pi, 72, endpoint=False)
dks, _ = bl.sextactic_scan(bumped, thetas)
crossings = int(np.sum(np.sign(dks) != np.sign(np.roll(dks, 1))))
print(f"sign changes of d(affine curvature)/ds around the boundary: {crossings}")
print("(each sign change brackets one sextactic point)")

print()
print("=== 4. The osculating quadric along a planar section ===")
terms = {(2, 0): 1.0, (1, 1): 0.4, (0, 2): 0.7, (2, 1): 0.3,
         (3, 1): 0.05, (5, 0): 1e-2}
germ3 = bl.GraphGerm(2, terms)
Q = bl.osculating_quadric_along_curve(germ3)
M = Q.matrix / (-2.0 * Q.matrix[2, 3])
print("denominator coefficient d_2 = -(x1^2 x2 coefficient):", -2 * M[1, 2])
fit = bl.normal_field_gap(germ3, Q, dyadic_grid(4, 12))
print(f"normal field gap decays like x^{fit.exponent:.3f} (cubic contact)")
print(f"in-plane angle gap: {fit.angle_coefficient:.4e} x^{fit.angle_exponent:.3f}"
      f"  (4c = {4e-2 * 1:.1e} expected at c = 1e-2)")
M2 = M.copy()
M2[1, 2] -= 0.5e-2
M2[2, 1] -= 0.5e-2
fit2 = bl.normal_field_gap(germ3, bl.ConicQuadric(M2), dyadic_grid(4, 12))
print(f"with a wrong denominator the exponent drops to {fit2.exponent:.3f}")

print()
print("=== 5. Planar sections of quadrics are conics ===")
rng = np.random.default_rng(5)
for body, name in ((bl.Ellipsoid(np.diag([0.25, 1.0, 0.5])), "ellipsoid"),
                   (bl.Superellipse(4.0, dim=3), "superellipsoid")):
    u = rng.normal(size=3)
    u /= np.linalg.norm(u)
    fr = bl.bodies.tangent_frame(u)
    frame = bl.PlanarSectionFrame(np.zeros(3), fr[0], fr[1])
    res = bl.planar_section_conic_residual(body, frame, 64)
    print(f"{name:>14}: best-conic residual {res:.3e}")
