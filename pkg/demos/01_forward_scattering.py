"""Forward scattering by open arcs.

Solve the single-layer equation for Example (a), look at the far-field
pattern, and check two physical facts: reciprocity and the vanishing of the
total field on the cracks.  Also shows how fast the Nystrom discretization
converges as the node count doubles.

    python demos/01_forward_scattering.py
"""

import numpy as np

from crackscat.configurations import three_cracks, wavy_crack
from crackscat.forward import ForwardSystem, boundary_residual, far_field, observation_directions, synthesize

cracks = three_cracks()
k, d = 3.0, np.array([1.0, 0.0])

data = synthesize(cracks, k, d, n=64)
print("far field of Example (a), k = 3, d = (1, 0)")
for ang, val in zip(np.linspace(0, 360, 32, endpoint=False)[::4], data.values[::4]):
    print(f"  xhat angle {ang:6.1f} deg   |u_inf| = {abs(val):.4f}")

# reciprocity: u_inf(xhat, d) = u_inf(-d, -xhat)
system = ForwardSystem(cracks, 64, k)
xh = observation_directions()
forward = far_field(system.solve(d), xh).values
swapped = np.array([far_field(system.solve(-x), -d[None, :]).values[0] for x in xh])
print(f"\nreciprocity defect: {np.abs(forward - swapped).max():.2e}")

# the total field vanishes on every crack
sol = system.solve(d)
s = np.linspace(-0.99, 0.99, 201)
res = max(np.abs(boundary_residual(sol, j, s)).max() for j in range(len(cracks)))
print(f"max |u| on the cracks:  {res:.2e}")

# self-convergence on the wavy crack, which is the harder geometry
print("\nself-convergence on Example (b):")
ref = synthesize(wavy_crack(), k, d, 256).values
for n in (16, 32, 64, 128):
    u = synthesize(wavy_crack(), k, d, n).values
    print(f"  n = {n:3d}  relative change vs n = 256: {np.linalg.norm(u - ref) / np.linalg.norm(ref):.2e}")
