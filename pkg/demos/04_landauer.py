"""How fast can a thermal detector be reset for free?

Driving the detector from the ground state towards the bath occupation costs no
work as long as the target occupation stays below p_crit; a finite-time
measurement heats the detector, which fixes the shortest free erasure time.
"""

from udw.landauer import critical_beta_star, landauer_report, p_critical, tau_eff_critical

print(f"{'beta Omega':>10} {'beta_bar*':>11} {'p_crit':>12} {'p_crit exact':>13} {'tau_crit/beta':>14}")
for x in (1.0, 2.0, 5.0, 10.0, 20.0, 1e5):
    print(f"{x:10.0f} {critical_beta_star(x, 1.0):11.6f} {p_critical(x, 1.0):12.6e} "
          f"{p_critical(x, 1.0, exact=True):13.6e} {tau_eff_critical(1.0, x):14.7f}")
print("\nbeta_bar* changes sign at beta Omega = 2 ln 2 and approaches beta - 1/Omega at low temperature;")
print("tau_crit/beta tends to 1/sqrt(2(e-1)) = 0.5394.")
rep = landauer_report(1.0, 1.0, p_initial=0.0)
print("\nGround state -> thermal at beta Omega = 1:", {k: round(v, 6) for k, v in rep.to_dict().items()})
