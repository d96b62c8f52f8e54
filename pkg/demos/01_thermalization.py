"""A detector coupled to a thermal bath forgets its initial state.

A long tanh window switches the coupling on smoothly; while it is on, the
excitation probability relaxes to the Gibbs value 1/(1 + e^{beta Omega})
whatever the coupling strength, and the memory factor records how much of
the initial state survives.
"""

import math

import numpy as np

from udw.coefficients import coefficient_grid
from udw.correlators import BathParams, DetectorParams
from udw.evolution import evolve
from udw.switching import SwitchingProfile

bath = BathParams(beta=1.0)
print("Relaxation to the thermal occupation 1/(1+e) =", f"{1 / (1 + math.e):.6f}\n")
print(f"{'gbar':>6} {'t':>6} {'p(t) from p=0':>14} {'p(t) from p=1':>14} {'memory':>10}")
for gbar, t1, n in [(0.1, 500.0, 10001), (1.0, 50.0, 2001), (10.0, 50.0, 4001)]:
    profile = SwitchingProfile.tanh_window(0.0, 2 * t1, 2.0)
    grid = coefficient_grid(profile, bath, DetectorParams(1.0, gbar, 0.1), 0.0, t1, n)
    ground, excited = evolve(grid, 0.0), evolve(grid, 1.0)
    for i in np.linspace(0, n - 1, 5).astype(int)[1:]:
        print(f"{gbar:6.1f} {grid.t_grid[i]:6.1f} {ground.p[i]:14.8f} {excited.p[i]:14.8f} {ground.memory[i]:10.3e}")
print("\nThe final state is independent of gbar; only the relaxation time scales as 1/gbar.")
