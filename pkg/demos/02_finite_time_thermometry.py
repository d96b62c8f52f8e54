"""Finite-time thermometry: a short measurement reads a slightly hotter bath.

The ratio of excitation to de-excitation probability approaches the Boltzmann
factor e^{-beta Omega} only for long interactions.  At finite effective time
tau_eff the leading correction is beta^2 kappa(beta Omega)/(2 tau_eff^2), which
is read as the effective temperature T (1 + 1/(12 tau_eff^2 T^2)).
"""

import math

from udw.correlators import BathParams, DetectorParams
from udw.observables import effective_temperature, thermometry, xi_large_time
from udw.switching import SwitchingProfile, effective_time

bath, det = BathParams(beta=1.0), DetectorParams(omega=1.0, gbar=1e-3, tau_s=0.1)
unit = effective_time(SwitchingProfile.gaussian(1.0))
print(f"Boltzmann factor e^-1 = {math.exp(-1):.6f}\n")
print(f"{'tau_eff/beta':>12} {'xi (evolved)':>13} {'xi (expansion)':>15} {'T*':>9}")
for ratio in (3.0, 6.0, 12.0):
    profile = SwitchingProfile.gaussian(ratio / unit)
    rep = thermometry(profile, bath, det)
    print(f"{ratio:12.0f} {rep.xi_exact:13.8f} {rep.xi_expansion:15.8f} {rep.t_star:9.6f}")
print("\nFor gbar = 1e-3 the evolved ratio carries an O(gbar) offset on top of the")
print("1/tau_eff^2 term, so the two columns converge to each other only until that offset dominates.")

# high-temperature regime: T* agrees with the temperature inferred from xi
small = DetectorParams(omega=0.05, gbar=1e-3, tau_s=0.1)
xi = xi_large_time(None, bath, small, tau_eff=20.0)
print(f"\nbeta Omega = 0.05, tau_eff = 20 beta: T* = {effective_temperature(bath, 20.0):.8f}, "
      f"Omega/ln(1/xi) = {small.omega / math.log(1 / xi):.8f}")
