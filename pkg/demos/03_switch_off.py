"""Switching off slowly still leaves a trace.

A detector in equilibrium is decoupled with chi = (1 - tanh(lam tau))/2.  Even
in the adiabatic limit lam -> 0 the level populations move by a finite amount
gbar (1/2 - p_i) [I_beta + I_p - zeta_r], set by the recovery time tau_s.
"""

from udw.correlators import BathParams, DetectorParams
from udw.observables import switch_off_shift

det = DetectorParams(omega=1.0, gbar=0.01, tau_s=0.1)
print(f"{'beta Omega':>10} {'lam':>8} {'bracket':>12} {'adiabatic':>12} {'p_i':>9} {'p_f':>9}")
for beta in (0.5, 1.0, 2.0):
    for lam in (1e-1, 1e-2, 1e-3):
        rep = switch_off_shift(lam, BathParams(beta), det)
        print(f"{beta:10.1f} {lam:8.0e} {rep.bracket:12.7f} {rep.asymptotic_rhs:12.7f} "
              f"{rep.p_initial:9.6f} {rep.p_final:9.6f}")
print("\nThe bracket is negative here: the switch-off moves the population away from 1/2,")
print("i.e. it cools the detector slightly below the bath temperature.")
