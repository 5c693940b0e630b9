"""The domain derivative of the far field.

Compares the analytic Jacobian with central differences, shows that
reparametrizing a crack (a tangential field that fixes the tips) does not
change the far field to first order, and prints the Taylor remainder of the
matrix derivative.
"""

import numpy as np

from crackscat.configurations import three_cracks
from crackscat.forward import ForwardSystem, assemble_matrix
from crackscat.frechet import (Displacement, dS_assemble, fd_jacobian, frechet_farfield, jacobian, normal_field,
                               perturb, reparametrization_field, vertical_mode)

cracks = three_cracks()
k, d, p = 3.0, np.array([1.0, 0.0]), 3
sol = ForwardSystem(cracks, 64, k).solve(d)

an = jacobian(sol, p).matrix
fd = fd_jacobian(cracks, 64, k, d, p, eps=1e-5).matrix
print(f"Jacobian shape {an.shape}, analytic vs finite difference: "
      f"{np.linalg.norm(an - fd) / np.linalg.norm(fd):.1e}")

tang = [reparametrization_field(c) for c in cracks]
base = [normal_field(c) for c in cracks]
normal = [Displacement(lambda s, b=b: (1 - s**2)[..., None] * b(s),
                       lambda s, b=b: -2 * s[..., None] * b(s) + (1 - s**2)[..., None] * b.dh(s)) for b in base]
ratio = np.linalg.norm(frechet_farfield(sol, tang)) / np.linalg.norm(frechet_farfield(sol, normal))
print(f"|u'[tangential]| / |u'[normal]| = {ratio:.1e}")

system = ForwardSystem(cracks, 32, k)
h = [vertical_mode(2)] * 3
ds = dS_assemble(system, h)
print("\n  eps      ||S(eps) - S - eps S'||")
for eps in (1e-2, 1e-3, 1e-4):
    rem = np.linalg.norm(assemble_matrix(perturb(cracks, h, eps).grids(32), k) - system.matrix - eps * ds)
    print(f"  {eps:.0e}   {rem:.3e}")
print("(a factor 100 per decade means second-order remainder)")
