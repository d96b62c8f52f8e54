import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from udw.correlators import BathParams, DetectorParams, thermal_occupation
from udw.errors import DomainError, ExpansionWarning
from udw.landauer import (classify_transition, critical_beta_star, effective_inverse_temperature,
                          landauer_f, landauer_f_of_p, landauer_report, occupation, p_critical,
                          tau_eff_critical, work_bound)
from udw.observables import xi_large_time

GRID = [0.5, 1.0, 2.0, 5.0, 10.0]


def _z_form(z, beta, omega):
    return (beta - z) * omega / (1 + math.exp(z * omega)) - math.log1p(math.exp(-z * omega))


# -- free-energy function ------------------------------------------------------------

def test_f_values():
    assert landauer_f(0.0, 1.0, 1.0) == pytest.approx(0.5 - math.log(2), abs=1e-15)
    assert landauer_f(0.0, 1.0, 1.0) == pytest.approx(-0.19315, abs=1e-5)
    assert landauer_f(math.inf, 1.0, 1.0) == 0.0
    assert landauer_f(-math.inf, 2.0, 1.5) == pytest.approx(3.0)


@given(st.floats(-20, 20), st.floats(0.1, 10), st.floats(0.1, 3))
def test_p_form_matches_z_form(z, beta, omega):
    assert landauer_f(z, beta, omega) == pytest.approx(_z_form(z, beta, omega), rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("beta_omega", [0.5, 1.0, 2.0, 10.0])
def test_unique_minimum_at_bath_temperature(beta_omega):
    z = np.linspace(-5 * beta_omega, 5 * beta_omega, 1000)
    f = landauer_f(z, beta_omega, 1.0)
    f_min = landauer_f(beta_omega, beta_omega, 1.0)
    assert np.all(f >= f_min - 1e-15)
    assert np.sum(np.isclose(f, f_min, rtol=0, atol=1e-12)) <= 2
    h = 0.1 * beta_omega
    assert landauer_f(beta_omega + h, beta_omega, 1.0) > f_min
    assert landauer_f(beta_omega - h, beta_omega, 1.0) > f_min


def test_f_domain():
    with pytest.raises(DomainError):
        landauer_f_of_p(1.5, 1.0, 1.0)
    with pytest.raises(DomainError):
        landauer_f(0.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        landauer_f(0.0, math.inf, 1.0)


# -- work bound ---------------------------------------------------------------------

@given(st.floats(0, 1), st.floats(0.1, 10))
def test_no_change_no_bound(p, beta):
    assert work_bound(beta, 1.0, p, p) == 0.0


@given(st.floats(0, 1), st.floats(0.1, 10))
def test_thermalization_needs_no_work(p0, beta):
    assert work_bound(beta, 1.0, p0, thermal_occupation(beta, 1.0)) <= 1e-15


@pytest.mark.parametrize("beta_omega", [0.5, 1.0, 2.0])
def test_decoupling_costs_work(beta_omega):
    p_bath = thermal_occupation(beta_omega, 1.0)
    for z in np.linspace(-3, 3 + 2 * beta_omega, 41):
        if abs(z - beta_omega) > 1e-6:
            assert work_bound(beta_omega, 1.0, p_bath, occupation(z, 1.0)) > 0


@pytest.mark.parametrize("beta_omega", GRID)
def test_critical_probability_is_the_zero_crossing(beta_omega):
    p_crit = p_critical(beta_omega, 1.0, exact=True)
    assert abs(work_bound(beta_omega, 1.0, 0.0, p_crit)) < 1e-12
    # from the ground state the bound changes sign once, at p_crit
    p = np.geomspace(1e-12, 1.0, 4001)
    bound = np.array([work_bound(beta_omega, 1.0, 0.0, q) for q in p])
    crossings = np.nonzero(np.diff(np.sign(bound)))[0]
    assert len(crossings) == 1
    assert p[crossings[0]] <= p_crit <= p[crossings[0] + 1]


# -- critical quantities ---------------------------------------------------------------

def test_critical_beta_star_sign():
    assert critical_beta_star(1.0, 1.0) < 0
    assert critical_beta_star(2.0, 1.0) > 0
    assert critical_beta_star(1.0, 1.0) == pytest.approx(-0.6121, abs=1e-4)
    assert critical_beta_star(2.0, 1.0) == pytest.approx(0.80363, abs=1e-5)
    assert abs(critical_beta_star(2 * math.log(2), 1.0)) < 1e-12


@pytest.mark.parametrize("beta_omega", GRID)
def test_critical_beta_star_below_beta(beta_omega):
    root = critical_beta_star(beta_omega, 1.0)
    assert root < beta_omega
    assert abs(landauer_f(root, beta_omega, 1.0)) < 1e-12


def test_critical_beta_star_low_temperature():
    assert abs(critical_beta_star(20.0, 1.0) - 19.0) < 1e-6 * 20.0


def test_p_critical():
    assert p_critical(10.0, 1.0) == pytest.approx(1 / (1 + math.exp(9)), rel=1e-14)
    assert p_critical(10.0, 1.0) == pytest.approx(1.2339458e-4, rel=1e-7)
    assert p_critical(10.0, 1.0, exact=True) == pytest.approx(p_critical(10.0, 1.0), rel=1e-3)
    assert p_critical(2 * math.log(2), 1.0, exact=True) == pytest.approx(0.5, abs=1e-12)


def test_tau_eff_critical():
    assert tau_eff_critical(1.0, 1.0) == pytest.approx(0.2184228, abs=1e-7)
    assert tau_eff_critical(3.0, 1 / 3) == pytest.approx(3 * 0.2184228, abs=1e-6)
    limit = 1 / math.sqrt(2 * (math.e - 1))
    assert limit == pytest.approx(0.5394334, abs=1e-7)
    assert tau_eff_critical(1e6, 1.0) / 1e6 == pytest.approx(limit, rel=1e-5)


def test_tau_eff_critical_matches_expansion():
    beta = 10.0
    tau = tau_eff_critical(beta, 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ExpansionWarning)
        xi = xi_large_time(None, BathParams(beta), DetectorParams(1.0, 1e-3, 0.1), tau_eff=tau)
    assert xi / (1 + xi) == pytest.approx(p_critical(beta, 1.0), rel=0.05)


def test_effective_inverse_temperature():
    assert effective_inverse_temperature(0.0, 1.0) == math.inf
    assert effective_inverse_temperature(1.0, 1.0) == -math.inf
    assert effective_inverse_temperature(thermal_occupation(2.0, 0.5), 0.5) == pytest.approx(2.0)


def test_report():
    rep = landauer_report(1.0, 1.0)
    assert rep.beta0 == math.inf and rep.beta_star == pytest.approx(1.0)
    assert rep.bound == pytest.approx(landauer_f(1.0, 1.0, 1.0))
    assert rep.bound < 0
    assert set(rep.to_dict()) == {"beta", "omega", "beta0", "beta_star", "bound", "beta_bar_star", "p_crit",
                                  "p_crit_exact", "tau_eff_crit"}


# -- four quadrants -------------------------------------------------------------------

@pytest.mark.parametrize("p0, p1, label", [(0.1, 0.3, "heating"), (0.3, 0.1, "erasure"),
                                           (0.9, 0.6, "entropy-only"), (0.6, 0.9, "heat-only")])
def test_quadrant_labels(p0, p1, label):
    assert classify_transition(1.0, 1.0, p0, p1).label == label


@given(st.floats(0.01, 0.99), st.floats(0, 1), st.floats(0.2, 5))
def test_moves_toward_thermal_are_free(p0, frac, beta):
    p_bath = thermal_occupation(beta, 1.0)
    p1 = p0 + frac * (p_bath - p0)
    assert classify_transition(beta, 1.0, p0, p1).free


@pytest.mark.parametrize("beta_omega", [1e3, 1e5, 1e7])
def test_critical_beta_star_deep_low_temperature(beta_omega):
    # the bracket reaches log-odds -beta*Omega, where e^{-y} overflows
    assert critical_beta_star(beta_omega, 1.0) == pytest.approx(beta_omega - 1.0, rel=1e-12)
