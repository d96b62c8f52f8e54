"""Heating by switching: a window that makes the vacuum look thermal.

A switching function chi whose window operator turns the vacuum spectrum into
the thermal spectrum at inverse temperature beta_bar is built from the
curvature of the target spectrum; the defect measures curvature that had to be
clamped or was unresolved.
"""

import numpy as np

from udw.correlators import BathParams, spectral_f
from udw.switching import apply_window_to_spectrum, heating_profile

result = heating_profile(1.0, np.linspace(-60.0, 60.0, 6001))
print("window:", result.to_dict(), "\n")
print(f"{'Omega':>6} {'D_chi F_vac':>12} {'F_thermal':>12} {'rel. diff':>10}")
for omega in np.linspace(0.5, 3.0, 6):
    smeared = apply_window_to_spectrum(result.profile, omega, BathParams())
    target = float(spectral_f(omega, BathParams(1.0)))
    print(f"{omega:6.2f} {smeared:12.6e} {target:12.6e} {smeared / target - 1:10.2e}")
