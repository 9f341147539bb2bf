import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from deltaion.model1d import (
    REDUCED,
    Atom1D,
    DataQualityError,
    DomainError,
    ejected_energy,
    ejected_energy_inf,
    ionization_prob,
    short_pulse_prob,
    spectrum_norm,
    spectrum_rect,
    survival_asymptotic_rate,
    survival_inf,
    theta_asymptotic,
    theta_rect,
)

from oracles import energy_unbinding, spectrum_unbinding, theta_rect_quad

# frozen from direct arbitrary-precision quadrature of the real-axis integral
THETA_REFERENCE = [
    (1.0, 2.0, 0.826674529628362 - 0.24164705260573233j),
    (-1.0, 10.0, -0.10568010592879909 + 0.33502523640963916j),
    (-2.0, 5.0, 0.14145107561845432 - 0.056650816308117906j),
    (0.5, 7.3, -0.9199403502626536 + 0.2829056144543389j),
    (-0.5, 1.0, 0.6434389758015107 - 0.6789265325933471j),
]


@pytest.mark.parametrize("r,t,ref", THETA_REFERENCE)
def test_theta_rect_frozen(r, t, ref):
    assert abs(theta_rect(r, t) - ref) < 1e-9


def test_theta_rect_live_oracle():
    assert abs(theta_rect(3.0, 0.7) - theta_rect_quad(3.0, 0.7)) < 1e-9


@pytest.mark.parametrize("r", [-3.0, -1.0, -0.2, 0.0, 0.4, 2.0])
def test_theta_starts_at_one(r):
    assert abs(theta_rect(r, 0.0) - 1) < 1e-12


def test_unperturbed_is_stationary():
    assert np.all(theta_rect(0.0, np.linspace(0, 100, 7)) == 1)


@settings(max_examples=25, deadline=None)
@given(st.floats(-4, 4), st.floats(0, 30))
def test_survival_bounded(r, t):
    assert abs(theta_rect(r, t)) <= 1 + 1e-9


@pytest.mark.parametrize("r", [-2.0, -1.0, 1.0, 3.0])
def test_asymptotic_form_at_large_time(r):
    e1, e2 = (abs(theta_rect(r, t) - theta_asymptotic(r, t)) for t in (400.0, 1600.0))
    # next order is t^-2.5 (t^-1.5 at r = -1)
    assert e1 < 1e-3
    assert math.log2(e1 / e2) / 2 == pytest.approx(1.5 if r == -1 else 2.5, abs=0.15)


def test_asymptotic_domain():
    with pytest.raises(DomainError):
        theta_asymptotic(1.0, 10.0)


def test_switching_to_asymptotics():
    t = 200.0
    assert abs(theta_rect(1.0, t, t_switch=100.0) - theta_asymptotic(1.0, t)) == 0
    assert abs(theta_rect(1.0, t, t_switch=100.0) - theta_rect(1.0, t)) < 1e-5


def test_survival_inf_values():
    assert survival_inf(0.0) == 1.0
    assert survival_inf(-1.0) == 0.0
    assert survival_inf(-5.0) == 0.0
    assert survival_inf(1.0) == pytest.approx(64 / 81)


@pytest.mark.parametrize("r", [0.5, 2.0, 7.0, -0.3, -0.75])
def test_survival_inf_pairing(r):
    partner = 1.0 / (-1.0 - 1.0 / r)  # 1/r + 1/r' = -1
    assert survival_inf(r) == pytest.approx(survival_inf(partner), abs=1e-12)


def test_survival_inf_is_long_time_mean():
    r = 1.0
    t = np.linspace(300, 310, 400)
    mean = np.mean(np.abs(theta_rect(r, t)) ** 2)
    assert mean == pytest.approx(survival_inf(r), abs=2e-3)


def test_asymptotic_rate_table():
    assert survival_asymptotic_rate(-1.0) == (pytest.approx(4 / math.pi), -1.0)
    assert survival_asymptotic_rate(-2.0) == (pytest.approx(16 / math.pi), -3.0)
    assert survival_asymptotic_rate(1.0)[1] == -1.5


@pytest.mark.parametrize("tau", [0.5, 1.0, 4.0])
def test_spectrum_matches_unbinding_formula(tau):
    k = np.array([0.1, 0.5, 1.0, 2.0, 9.0])
    assert np.allclose(np.abs(spectrum_rect(k, -1.0, tau)), np.abs(spectrum_unbinding(k, tau)), atol=1e-10)


@pytest.mark.parametrize("r", [-2.0, -0.5, 1.0])
def test_spectrum_vanishes_for_zero_duration(r):
    assert np.abs(spectrum_rect(np.linspace(-3, 3, 11), r, 1e-10)).max() < 1e-8


def test_spectrum_is_even():
    k = np.linspace(0.1, 4, 9)
    assert np.allclose(spectrum_rect(k, 0.7, 1.3), spectrum_rect(-k, 0.7, 1.3))


@pytest.mark.parametrize("r", [-2.0, -1.0, -0.5, 0.5, 1.0])
@pytest.mark.parametrize("tau", [0.1, 1.0, 10.0])
def test_unitarity(r, tau):
    assert abs((1 - abs(theta_rect(r, tau)) ** 2) - spectrum_norm(r, tau)) < 1e-4


def test_spectrum_norm_against_plain_quadrature():
    f = lambda k: abs(spectrum_rect(k, 0.5, 2.0)) ** 2  # noqa: E731
    val = 2 * integrate.quad(f, 0, 60, limit=800)[0]
    assert spectrum_norm(0.5, 2.0) == pytest.approx(val, abs=5e-5)


def test_physical_units_preserve_probability():
    atom = Atom1D(g=3.0, hbar=1.0, m=1.0)
    assert atom.p == 3.0 and not atom.is_reduced and REDUCED.is_reduced
    tau_phys = 0.2
    k = np.linspace(0, 200, 200001)
    P = 2 * integrate.simpson(np.abs(spectrum_rect(k, -1.0, tau_phys, atom)) ** 2, x=k)
    tau_red = float(atom.to_reduced_time(tau_phys))
    assert P == pytest.approx(1 - abs(theta_rect(-1.0, tau_red)) ** 2, abs=2e-4)


def test_ionization_prob_verified():
    chk = ionization_prob(1.0, 3.0, verify=True)
    assert chk.discrepancy < 1e-4
    assert ionization_prob(0.0, 5.0) == 0.0
    with pytest.raises(DataQualityError):
        ionization_prob(1.0, 3.0, verify=True, tol=1e-14)


def test_energy_limits():
    assert ejected_energy_inf(-1.0) == pytest.approx(1.0, abs=1e-12)
    assert ejected_energy(-1.0, 0.0) == 0.0
    assert ejected_energy(-1.0, 100.0) == pytest.approx(1.0, rel=1e-2)
    assert ejected_energy(2.0, 80.0) == pytest.approx(ejected_energy_inf(2.0), rel=2e-3)


@pytest.mark.parametrize("tau", [0.5, 1.0, 2.0, 10.0, 100.0])
def test_energy_against_kinetic_identity(tau):
    assert ejected_energy(-1.0, tau) == pytest.approx(energy_unbinding(tau), rel=5e-5)


def test_energy_overshoots_then_relaxes():
    # peaks near tau ~ 1, then decays to E0 as 1 + 2/(pi tau)
    assert ejected_energy(-1.0, 1.0) > ejected_energy(-1.0, 10.0) > 1.0
    assert ejected_energy(-1.0, 200.0) == pytest.approx(1 + 2 / (math.pi * 200), rel=1e-4)


def test_energy_ratio_large_amplitude():
    assert ejected_energy_inf(100.0) / ejected_energy_inf(-100.0) == pytest.approx(3.0, rel=0.05)


@pytest.mark.parametrize("r", np.linspace(1, 50, 15))
def test_energy_inf_monotone_positive(r):
    assert ejected_energy_inf(r + 0.5) > ejected_energy_inf(r)


@pytest.mark.parametrize("r", np.linspace(-50, -1.5, 15))
def test_energy_inf_monotone_negative(r):
    assert ejected_energy_inf(r - 0.5) > ejected_energy_inf(r)


def test_short_pulse_branches():
    small = short_pulse_prob(0.5, 1e-3)
    assert small.small_a == pytest.approx(small.exact, rel=0.05)
    big = short_pulse_prob(500.0, 0.01)
    assert big.large_a == pytest.approx(big.exact, rel=0.3)
    with pytest.raises(ValueError):
        short_pulse_prob(1.0, 0.1)


def _ionization(r, t):
    return 1 - abs(theta_rect(r, t)) ** 2


@pytest.mark.parametrize("t", [1.0, 5.0])
def test_stabilization_at_finite_duration(t):
    r = np.linspace(0.05, 10, 200)
    P = np.array([_ionization(x, t) for x in r])
    interior_max = (P[1:-1] > P[:-2]) & (P[1:-1] > P[2:])
    assert interior_max.any()
    rn = np.linspace(-10, -1.05, 60)
    assert np.all(np.diff([_ionization(x, t) for x in rn]) < 0)


def test_long_time_ionization_monotone_in_amplitude():
    # the infinite-duration limit has no interior maximum for r > 0
    r = np.linspace(0.01, 10, 500)
    assert np.all(np.diff([1 - survival_inf(x) for x in r]) > 0)
