import math

import numpy as np
import pytest
from scipy import integrate

from deltaion.model1d import DomainError
from deltaion.model3d import (
    Atom3D,
    _ki,
    asymptotic_coefficients,
    bound_momentum,
    bound_shell_density,
    completeness,
    evolve3d,
    kernel_K,
    radial_eigenfunctions,
    shell_density,
    theta3d_asymptotic,
    theta3d_rect,
)
from deltaion.volterra import PulseProgram

from oracles import bound_momentum_l0

ATOM = Atom3D(2.0)
BIG = Atom3D(8.0, 1.0, l_max=2)


def test_bound_momentum_frozen_and_bisection():
    assert bound_momentum(2.0, 1.0) == pytest.approx(0.7968121300200195, abs=1e-14)
    for Q, a in [(2.0, 1.0), (1.3, 0.5), (7.0, 2.0), (100.0, 1.0)]:
        assert abs(bound_momentum(Q, a) - bound_momentum_l0(Q, a)) < 1e-10


def test_bound_momentum_limits():
    assert bound_momentum(1.0, 1.0) is None
    assert bound_momentum(1.0 + 1e-6, 1.0) == pytest.approx(1e-6, rel=1e-5)
    assert bound_momentum(100.0, 1.0) == pytest.approx(50.0, rel=1e-12)
    assert bound_momentum(3.0, 1.0, l=1) is None
    assert bound_momentum(5.0, 1.0, l=2) is None
    with pytest.raises(ValueError):
        bound_momentum(-1.0, 1.0)


@pytest.mark.parametrize("l", [1, 2, 4])
def test_higher_l_bound_condition(l):
    Q = 2 * l + 4.0
    x = bound_momentum(Q, 1.0, l)
    assert Q * _ki(l, x) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("l", [0, 1, 2, 3])
def test_bound_condition_lhs_decreasing(l):
    x = np.geomspace(1e-3, 80, 400)
    ki = np.array([_ki(l, xi) for xi in x])
    assert np.all(np.diff(ki) < 0)
    assert ki[0] == pytest.approx(1 / (2 * l + 1), rel=1e-3)


def test_ki_branches_agree():
    for l in (0, 2, 5):
        lo = _ki(l, 30.0)
        hi = _ki(l, 30.0 + 1e-9)
        assert lo == pytest.approx(hi, rel=1e-8)


@pytest.mark.parametrize("l", [0, 1, 2])
def test_bound_state_normalised(l):
    u = radial_eigenfunctions(BIG, l).u
    inner = integrate.quad(lambda r: u(r) ** 2, 0, 1, limit=200)[0]
    outer = integrate.quad(lambda r: u(r) ** 2, 1, np.inf, limit=200)[0]
    assert inner + outer == pytest.approx(1.0, abs=1e-10)


def _jump(u, a=1.0, e=1e-6):
    return (u(a + e) - u(a)) / e - (u(a) - u(a - e)) / e


@pytest.mark.parametrize("l", [0, 1, 2])
@pytest.mark.parametrize("k", [None, 0.4, 1.3, 6.0])
def test_matching_at_the_shell(l, k):
    st = radial_eigenfunctions(BIG, l, k)
    ua = st.u(1.0)
    assert st.u(1.0 - 1e-12) == pytest.approx(ua, rel=1e-9, abs=1e-12)
    assert _jump(st.u) == pytest.approx(-BIG.g * ua, rel=1e-4, abs=1e-6)


@pytest.mark.parametrize("l", [0, 1, 2])
def test_shell_densities_consistent(l):
    assert radial_eigenfunctions(BIG, l).u(1.0) ** 2 == pytest.approx(bound_shell_density(8.0, 1.0, l), rel=1e-12)
    for k in (0.2, 1.3, 9.0):
        assert radial_eigenfunctions(BIG, l, k).u(1.0) ** 2 == pytest.approx(shell_density(k, 8.0, 1.0, l), rel=1e-12)


@pytest.mark.parametrize("l", [0, 2])
def test_continuum_asymptotic_amplitude(l):
    u = radial_eigenfunctions(BIG, l, 1.3).u
    r = np.linspace(400, 405, 4000)
    assert np.abs(u(r)).max() == pytest.approx(math.sqrt(2 / math.pi), rel=1e-4)


def test_free_shell_density():
    k = np.array([0.3, 1.0, 4.0])
    assert np.allclose(shell_density(k, 0.0, 1.0), 2 / np.pi * np.sin(k) ** 2)
    assert shell_density(0.0, 2.0, 1.0) == 0.0
    assert np.mean(shell_density(np.linspace(200, 210, 4001), 2.0, 1.0)) == pytest.approx(1 / np.pi, rel=1e-2)


@pytest.mark.parametrize("r", [-0.8, -0.5, 0.5, 1.0])
def test_completeness(r):
    assert completeness(ATOM, r) == pytest.approx(1.0, abs=1e-5)


def test_rect_amplitude_trivial_cases():
    assert theta3d_rect(ATOM, 0.0, 5.0) == 1
    assert abs(theta3d_rect(ATOM, 0.5, 0.0) - 1) < 1e-5
    with pytest.raises(DomainError):
        theta3d_rect(ATOM, -1.5, 1.0)


@pytest.mark.parametrize("r", [-0.8, -0.5, 0.5])
def test_rect_amplitude_approaches_asymptotics(r):
    t = 500.0
    a, b = theta3d_rect(ATOM, r, t), theta3d_asymptotic(ATOM, r, t)
    assert abs(a - b) < 0.05 * abs(b) + 1e-6
    with pytest.raises(DomainError):
        theta3d_asymptotic(ATOM, r, 10.0)


def test_asymptotic_power_by_threshold():
    assert asymptotic_coefficients(ATOM, -0.5)[1] == 0
    assert asymptotic_coefficients(ATOM, 0.5)[1] == 2


@pytest.mark.parametrize("r", [-0.5, 0.5, -0.8])
def test_dual_path_3d(r):
    rec = evolve3d(ATOM, PulseProgram.rect(r, 1.0))
    assert abs(rec.theta[-1] - theta3d_rect(ATOM, r, 1.0)) < 1e-3


def test_evolve3d_requested_times_and_linearity():
    prog = PulseProgram.rect(0.5, 1.0)
    rec = evolve3d(ATOM, prog, times=[0.25, 1.0], theta0=0.5j)
    full = evolve3d(ATOM, prog)
    assert rec.theta[-1] == pytest.approx(0.5j * full.theta[-1], abs=1e-12)
    zero = evolve3d(ATOM, prog, theta0=0)
    assert np.all(zero.theta == 0)


def test_evolve3d_higher_l_gated():
    with pytest.raises(NotImplementedError):
        evolve3d(BIG, PulseProgram.rect(0.5, 1.0), l=1)


def test_kernel_approaches_bound_term():
    phib = bound_shell_density(2.0, 1.0)
    lags = np.array([100.0, 400.0, 1600.0])
    dev = np.array([abs(kernel_K(ATOM, 0, x) - phib) for x in lags])
    scaled = dev * lags**1.5
    assert scaled.max() / scaled.min() < 3
    with pytest.raises(ValueError):
        kernel_K(ATOM, 0, 0.0)


def test_atom_properties():
    assert ATOM.g == 2.0 and ATOM.omega0 == pytest.approx(ATOM.p**2)
    with pytest.raises(DomainError):
        _ = Atom3D(0.5).p
    with pytest.raises(DomainError):
        ATOM.bound(1)
    assert ATOM.with_strength(8.0).bound(1) == pytest.approx(BIG.p_l[1])
