"""An ultrarelativistic proton as a detector in the microwave background.

Treating the Delta resonance (145 MeV above the ground state, in the rest
frame) as a detector level, the excitation probability switches on once
gamma k_B T ~ Omega/4, i.e. near 1e20 eV for a 3 K bath.
"""

from udw.gzk import GzkScenario, critical_energy, excitation_probability, horizon_length

m_p, omega, temp = 938.3e6, 145e6, 3.0
e_crit = critical_energy(m_p, omega, temp)
print(f"critical energy: {e_crit:.4e} eV\n")
print(f"{'E (eV)':>10} {'p over 1 Mpc':>14} {'L(p = 1/2) (Mpc)':>18}")
for factor in (0.25, 0.5, 1.0, 2.0):
    energy = factor * e_crit
    scenario = GzkScenario(m_p, energy, temp, l_m=1.0)
    p = excitation_probability(scenario)
    length = horizon_length(GzkScenario(m_p, energy, temp), 0.5)
    print(f"{energy:10.3e} {p:14.4e} {length:18.4e}")
print("\nWith unit level weight the leading-order probability is large; the horizon length")
print("scales with the assumed coupling gbar_n, which this model leaves free.")
