import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from udw.correlators import BathParams, spectral_f
from udw.errors import (InfiniteMeasurement, InterpolationRange, NegativeSpectralCurvature, ParameterWarning,
                        UnsupportedProfile, VacuumUnregulated, ZeroDerivative, DomainError)
from udw.switching import (ProfileKind, SwitchingProfile, apply_window_to_spectrum, chi, chi_past, chi_prime,
                           d_chi_closed, d_chi_numeric, effective_time, heating_profile, kinks,
                           measurement_time, optimal_profile, read_profile_csv, spectral_curvature, support,
                           window_diagnostics, write_profile_csv)

SMOOTH = [SwitchingProfile.gaussian(1.3, 0.4), SwitchingProfile.lorentz(0.7, -1.0),
          SwitchingProfile.tanh_window(-2.0, 3.0, 4.0), SwitchingProfile.tanh_switch_off(0.8, 0.5)]


# -- chi and chi' -------------------------------------------------------------

def test_profile_values():
    assert chi(SwitchingProfile.gaussian(1.0), 0.0) == 1.0
    assert chi(SwitchingProfile.gaussian(1.0), 1.0) == pytest.approx(math.exp(-1), rel=1e-15)
    assert chi(SwitchingProfile.lorentz(1.0), 1.0) == 0.5
    assert chi(SwitchingProfile.exponential(2.0), -2.0) == pytest.approx(math.exp(-1))
    assert chi(SwitchingProfile.tanh_switch_off(1.0), 0.0) == 0.5
    assert chi(SwitchingProfile.constant_on(), 123.0) == 1.0


def test_tanh_window_abrupt_limit():
    p = SwitchingProfile.tanh_window(0.0, 1.0, 200.0)
    tau = np.concatenate([np.linspace(-1, -0.1, 50), np.linspace(0.1, 0.9, 50), np.linspace(1.1, 2, 50)])
    box = ((tau > 0) & (tau < 1)).astype(float)
    assert np.max(np.abs(chi(p, tau) - box)) < 1e-8


@pytest.mark.parametrize("profile", SMOOTH + [SwitchingProfile.exponential(1.0)])
def test_chi_prime_is_exact_derivative(profile):
    tau = np.linspace(-4, 4, 37) + 0.0123
    h = 1e-5
    fd = (chi(profile, tau + h) - chi(profile, tau - h)) / (2 * h)
    np.testing.assert_allclose(chi_prime(profile, tau), fd, atol=1e-8)


def test_exponential_kink_derivative_is_past_limit():
    p = SwitchingProfile.exponential(2.0)
    assert kinks(p) == [0.0]
    assert chi_prime(p, 0.0) == pytest.approx(0.5)


@given(st.floats(-50, 50))
def test_profiles_bounded_by_peak(tau):
    for p in SMOOTH + [SwitchingProfile.exponential(0.5)]:
        assert 0.0 <= chi(p, tau) <= 1.0 + 1e-15


def test_past_limits():
    assert chi_past(SwitchingProfile.tanh_switch_off(1.0)) == 1.0
    assert chi_past(SwitchingProfile.gaussian(1.0)) == 0.0


def test_profile_validation():
    with pytest.raises(DomainError):
        SwitchingProfile.gaussian(0.0)
    with pytest.raises(DomainError):
        SwitchingProfile.tanh_window(1.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        SwitchingProfile.tanh_switch_off(-1.0)
    with pytest.warns(ParameterWarning):
        SwitchingProfile.tanh_window(0.0, 1.0, 2.0)
    with pytest.raises(DomainError):
        SwitchingProfile.tabulated([0, 1, 2], [0, 1, 0])


def test_tabulated_profile_and_range(tmp_path):
    tau = np.linspace(-3, 3, 61)
    p = SwitchingProfile.tabulated(tau, np.exp(-tau ** 2))
    assert chi(p, 0.05) == pytest.approx(math.exp(-0.0025), abs=1e-4)
    with pytest.raises(InterpolationRange):
        chi(p, 3.5)
    path = tmp_path / "profile.csv"
    write_profile_csv(p, path)
    assert path.read_bytes().startswith(b"tau,chi\r\n")
    q = read_profile_csv(path)
    assert q.table_tau == p.table_tau and q.table_chi == p.table_chi
    with pytest.raises(UnsupportedProfile):
        write_profile_csv(SwitchingProfile.gaussian(1.0), path)


def test_support_closed_forms():
    lo, hi = support(SwitchingProfile.gaussian(1.0), 1e-8)
    assert chi(SwitchingProfile.gaussian(1.0), hi) == pytest.approx(1e-8, rel=1e-9)
    lo, hi = support(SwitchingProfile.tanh_window(0.0, 10.0, 2.0), 1e-8)
    assert chi(SwitchingProfile.tanh_window(0.0, 10.0, 2.0), hi) == pytest.approx(1e-8, rel=1e-6)


# -- measurement and effective times -------------------------------------------

@pytest.mark.parametrize("profile, tau_m, tau_eff", [
    (SwitchingProfile.gaussian(1.0), math.sqrt(math.pi / 2), 1.0),
    (SwitchingProfile.lorentz(1.0), math.pi / 2, math.sqrt(2)),
    (SwitchingProfile.exponential(1.0), 1.0, 1.0),
])
def test_window_times(profile, tau_m, tau_eff):
    assert measurement_time(profile) == pytest.approx(tau_m, rel=1e-9)
    assert measurement_time(profile, closed_form=False) == pytest.approx(tau_m, rel=1e-9)
    assert effective_time(profile) == pytest.approx(tau_eff, rel=1e-9)


def test_window_ratios():
    assert window_diagnostics(SwitchingProfile.gaussian(3.0)).ratio == pytest.approx(1.2533141, abs=1e-7)
    assert window_diagnostics(SwitchingProfile.lorentz(3.0)).ratio == pytest.approx(1.1107207, abs=1e-7)
    d = window_diagnostics(optimal_profile(1.0))
    assert (d.tau_m, d.tau_eff, d.ratio) == pytest.approx((1.0, 1.0, 1.0), rel=1e-9)
    assert set(d.to_dict()) == {"tau_m", "tau_eff", "ratio"}


def test_tanh_window_soft_limit():
    lam, tau0 = 1.0, 50.0
    p = SwitchingProfile.tanh_window(0.0, tau0, lam)
    rel = effective_time(p) ** 2 / (1.5 * tau0 / lam) - 1
    # the leading correction is -1/(lam tau0) = -2% at lam tau0 = 50
    assert abs(rel) <= 0.02 + 1e-12
    assert rel == pytest.approx(-0.02, abs=1e-6)


@pytest.mark.parametrize("tau0, lam", [(10.0, 1.0), (50.0, 0.5), (100.0, 3.0)])
def test_tanh_window_effective_time_exact(tau0, lam):
    # int chi'^2 = 2 lam/3 and int chi^2 = tau0 - 1/lam up to exponentially small terms
    expected = math.sqrt(1.5 * (tau0 - 1.0 / lam) / lam)
    assert effective_time(SwitchingProfile.tanh_window(0.0, tau0, lam)) == pytest.approx(expected, rel=1e-6)


def test_tanh_window_sqrt_scaling():
    # least-squares exponent on a log-uniform sample of [10, 100]/lam
    tau0 = np.geomspace(10.0, 100.0, 10)
    teff = [effective_time(SwitchingProfile.tanh_window(0.0, t, 1.0)) for t in tau0]
    slope = np.polyfit(np.log(tau0), np.log(teff), 1)[0]
    assert slope == pytest.approx(0.5, abs=0.02)


def test_constant_on_guards():
    c = SwitchingProfile.constant_on()
    with pytest.raises(InfiniteMeasurement):
        measurement_time(c)
    with pytest.raises(ZeroDerivative):
        effective_time(c)
    with pytest.raises(InfiniteMeasurement):
        measurement_time(SwitchingProfile.tanh_switch_off(1.0))


# -- window operator ------------------------------------------------------------

def test_window_operator_values():
    g = SwitchingProfile.gaussian(1.0)
    assert d_chi_numeric(g, 0.0) == 1.0
    assert d_chi_numeric(g, 1.0) == pytest.approx(math.exp(-0.5), abs=1e-9)
    assert d_chi_closed(g, 1.0) == pytest.approx(0.606531, abs=1e-6)
    assert d_chi_numeric(SwitchingProfile.lorentz(1.0), 2.0) == pytest.approx(0.5, abs=1e-9)
    assert d_chi_closed(SwitchingProfile.tanh_window(0.0, 20.0, 1.0), 0.0) == pytest.approx(1.0, abs=1e-12)
    assert d_chi_closed(SwitchingProfile.constant_on(), 5.0) == 1.0


def test_window_operator_triangular_limit():
    # the soft edges give D(tau0/2) = 0.5/(1 - 1/z): 1.25e-3 above the triangle at z = 400
    p = SwitchingProfile.tanh_window(0.0, 1.0, 400.0)
    assert d_chi_closed(p, 0.5) == pytest.approx(0.5, abs=1e-3)


@pytest.mark.parametrize("z", [400.0, 4000.0, 1e5])
def test_window_operator_soft_triangle(z):
    p = SwitchingProfile.tanh_window(0.0, 1.0, z)
    assert d_chi_closed(p, 0.5) == pytest.approx(0.5 / (1 - 1 / z), rel=1e-12)
    s = np.array([0.25, 0.75])
    np.testing.assert_allclose(d_chi_closed(p, s), (1 - s) / (1 - 1 / z), rtol=1e-10)


def test_window_operator_unsupported():
    with pytest.raises(UnsupportedProfile):
        d_chi_closed(SwitchingProfile.exponential(1.0), 1.0)


@pytest.mark.parametrize("profile", [SwitchingProfile.gaussian(1.0), SwitchingProfile.lorentz(1.0),
                                     SwitchingProfile.tanh_window(0.0, 1.0, 20.0)])
def test_window_operator_closed_vs_numeric(profile):
    s = np.linspace(0, 6 * profile.tau0, 61)
    closed = d_chi_closed(profile, s)
    numeric = d_chi_numeric(profile, s)
    assert np.max(np.abs(closed - numeric)) < 1e-6
    np.testing.assert_allclose(d_chi_numeric(profile, -s), numeric, atol=1e-13)
    assert np.all(np.abs(numeric) <= 1 + 1e-12)


@pytest.mark.parametrize("profile", [SwitchingProfile.gaussian(1.0), SwitchingProfile.lorentz(2.0),
                                     SwitchingProfile.tanh_window(0.0, 10.0, 2.0)])
def test_window_operator_curvature_is_effective_time(profile):
    h = 1e-2 * effective_time(profile)
    curvature = 2 * (1 - d_chi_numeric(profile, h)) / h ** 2
    assert curvature == pytest.approx(1 / effective_time(profile) ** 2, rel=1e-3)


def test_windowed_spectrum():
    b = BathParams(1.0)
    assert apply_window_to_spectrum(SwitchingProfile.constant_on(), 1.0, b) == spectral_f(1.0, b)
    g = SwitchingProfile.gaussian(10.0)
    val = apply_window_to_spectrum(g, 1.0, b)
    assert val > spectral_f(1.0, b)
    # window broadening obeys the spectral identity exactly
    diff = apply_window_to_spectrum(g, -1.0, b) - val
    assert diff == pytest.approx(1 / (2 * math.pi), rel=1e-9)


def test_windowed_vacuum_flags_slow_window():
    with pytest.warns(VacuumUnregulated):
        apply_window_to_spectrum(SwitchingProfile.lorentz(1.0), 1.0, BathParams())


# -- heating profile --------------------------------------------------------------

def test_spectral_curvature_matches_finite_difference():
    w = np.array([0.01, 0.3, 1.0, 4.0])
    h = 1e-4
    fd = (spectral_f(w + h, BathParams(1.0)) - 2 * spectral_f(w, BathParams(1.0))
          + spectral_f(w - h, BathParams(1.0))) / h ** 2
    np.testing.assert_allclose(spectral_curvature(w, 1.0), fd, rtol=1e-5)
    assert spectral_curvature(-1.0, 2.0) == spectral_curvature(1.0, 2.0)


def test_heating_profile_reproduces_thermal_spectrum():
    res = heating_profile(1.0, np.linspace(-60, 60, 6001))
    assert not res.flagged
    tab = res.profile
    assert tab.kind is ProfileKind.TABULATED
    vals = np.asarray(tab.table_chi)
    assert np.max(np.abs(vals - vals[::-1])) < 1e-8
    assert np.max(vals) == pytest.approx(1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", VacuumUnregulated)
        for om in (0.5, 1.0, 2.0, 3.0):
            ratio = apply_window_to_spectrum(tab, om, BathParams()) / spectral_f(om, BathParams(1.0))
            assert ratio == pytest.approx(1.0, abs=0.05)


def test_heating_profile_unresolved_target_is_flagged():
    with pytest.warns(NegativeSpectralCurvature):
        res = heating_profile(1e4, np.linspace(-10, 10, 201))
    assert res.flagged and res.defect > 0.01
