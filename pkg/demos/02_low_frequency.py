"""Low-frequency limit.

As k -> 0 the scattered field of a sound-soft crack is governed by a
harmonic profile v with v = 0 on the cracks and v ~ (1/2pi) ln|x| at
infinity.  The expansion error shrinks only like 1/|ln k|, so halving it
takes squaring k.  This script prints e(k) and samples v.
"""

import numpy as np

from crackscat.configurations import three_cracks
from crackscat.forward import min_distance_to_cracks
from crackscat.lowfreq import asymptotic_check, eval_v, eval_v_boundary, solve_profile

cracks = three_cracks()
points = np.array([[0.0, 1.0], [2.5, 0.5], [-2.5, 1.5], [0.0, -2.5], [3.0, 3.0]])

print("   k        e(k)      e(k) * |ln k|")
for k, e in asymptotic_check(cracks, [1e-2, 1e-4, 1e-8, 1e-16], points, 64):
    print(f"  {k:.0e}   {e:.5f}   {e * abs(np.log(k)):.4f}")

prof = solve_profile(cracks, 64)
s = np.linspace(-0.99, 0.99, 101)
print(f"\nmax |v| on the cracks: {max(np.abs(eval_v_boundary(prof, j, s)).max() for j in range(3)):.1e}")

xs, ys = np.meshgrid(np.linspace(-3, 3, 7), np.linspace(-2.5, 4.5, 8))
pts = np.stack([xs, ys], -1).reshape(-1, 2)
pts = pts[min_distance_to_cracks(cracks, pts) > 0.1]
print(f"v on a coarse grid away from the cracks: min {eval_v(prof, pts).min():.3f}, "
      f"max {eval_v(prof, pts).max():.3f}")
r = 1e4
ring = r * np.stack([np.cos(np.linspace(0, 6, 6)), np.sin(np.linspace(0, 6, 6))], -1)
print(f"v - ln(r)/2pi at r = 1e4: {eval_v(prof, ring) - np.log(r) / (2 * np.pi)}")
