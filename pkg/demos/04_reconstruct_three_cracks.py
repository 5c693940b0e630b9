"""Reconstructing three cracks from one incident wave (Example (a)).

Runs the single-frequency Gauss-Newton method from flat segments, first on
exact data and then on data with 10% relative noise, and prints the
Chebyshev coefficients of the first crack for each noise seed.
"""

import numpy as np

from crackscat.configurations import three_cracks, three_cracks_initial
from crackscat.forward import add_noise, synthesize
from crackscat.inversion import NewtonConfig, run_single_freq

config = NewtonConfig(p0=0, m_p=4, eps_target=None)
clean = synthesize(three_cracks(), 3.0, np.array([1.0, 0.0]), 64)


def show(label, state):
    c = state.cracks[0]
    coeffs = " ".join(f"{v:+.3f}" for v in (c.d0, c.d1, *c.c))
    print(f"{label:>10}  J_r = {state.J_r:.4f}   Gamma_1: {coeffs}")


show("exact", run_single_freq(three_cracks_initial(), clean, config))
for seed in range(3):
    show(f"seed {seed}", run_single_freq(three_cracks_initial(), add_noise(clean, 0.1, seed), config))
print("\nWith 10% noise J_r cannot drop much below 0.08: the noise itself has that size.")
