"""Minimal-action closed orbits, capacity estimates, volume products.

The action of a closed billiard polygon measures its segments with the
support function of the reflecting body; the least action over all
closed orbits is the capacity of the product body.  The script finds
closed orbits as stationary polygons, tabulates the capacity, checks
its scaling behavior, and computes volume products.
"""

import math

import numpy as np

import billiardlab as bl

disk = bl.Ball(1.0)

print("=== 1. Closed orbits of the disk pair ===")
report = bl.capacity_estimate(disk, disk, 5, multistarts=12)
print(f"{'bounces':>8} {'action':>12} {'stationarity':>14}")
for m, action, stat in report.table:
    print(f"{m:8d} {action:12.8f} {stat:14.2e}")
print(f"capacity = min over m = {report.value:.8f}  (the bouncing diameter)")

print()
print("=== 2. The minimal orbit satisfies the reflection law ===")
orbit = report.best_orbit
m = len(orbit.points)
for i in range(m):
    v_in = orbit.points[i] - orbit.points[i - 1]
    v_in = v_in / np.linalg.norm(v_in)
    v_out = orbit.points[(i + 1) % m] - orbit.points[i]
    v_out = v_out / np.linalg.norm(v_out)
    n = disk.exterior_normal(orbit.points[i])
    defect = np.linalg.norm(bl.euclidean_reflect(n, v_in) - v_out)
    print(f"vertex {i}: reflection-law defect {defect:.2e}")

print()
print("=== 3. Capacity scales linearly in the body ===")
for lam in (0.5, 1.0, 2.0):
    val = bl.capacity_estimate(bl.Ball(lam), disk, 2, multistarts=8).value
    print(f"capacity({lam} * disk, disk) = {val:.8f}")

print()
print("=== 4. Symplectic rescaling invariance for an ellipse pair ===")
b = np.array([1.4, 0.7])
T = bl.Ellipsoid(np.diag(1.0 / b ** 2))
K = bl.Ellipsoid(np.diag([0.25, 1.0]))
c1 = bl.capacity_estimate(K, T, 3, multistarts=12).value
c2 = bl.capacity_estimate(bl.LinearImageBody(K, np.diag(b)), disk, 3,
                          multistarts=12).value
print(f"capacity(K, ellipse) = {c1:.8f}")
print(f"capacity(rescaled K, ball) = {c2:.8f}   gap = {abs(c1-c2):.2e}")

print()
print("=== 5. Volume products ===")
square = bl.Polygon2D([[1, 1], [-1, 1], [-1, -1], [1, -1]])
print(f"disk:   vol x vol(polar) = {bl.mahler_product(disk):.6f}"
      f"  (pi^2 = {math.pi**2:.6f})")
print(f"square: vol x vol(polar) = {bl.mahler_product(square):.6f}"
      f"  (the conjectured planar minimum 4^2/2! = 8)")
blob = bl.RadialBody2D([1.0, 0.0, 0.08, 0.0, 0.02])
print(f"generic symmetric body: {bl.mahler_product(blob):.6f}"
      f"  (between 8 and pi^2)")
print(f"Viterbo-type ratio for the disk pair: "
      f"{bl.viterbo_ratio(disk, disk, m_max=3, multistarts=8):.6f}"
      f"  (= 8/pi^2 = {8/math.pi**2:.6f})")
