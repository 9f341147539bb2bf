import math

import numpy as np
import pytest

from deltaion.model1d import spectrum_rect, theta_rect
from deltaion.volterra import (
    PulseProgram,
    VolterraProblem,
    amplitudes_from_Y,
    invert_laplace_theta,
    laplace_pole,
    laplace_rect,
    solve,
)


def rect_solution(r, tau, t_end=None, step=5e-3, **kw):
    return solve(VolterraProblem(PulseProgram.rect(r, tau), t_end or tau, step=step, **kw))


def test_no_perturbation_keeps_theta_at_one():
    sol = rect_solution(0.0, 1.0)
    assert np.all(sol.theta() == 1)


def test_initial_value_of_Y():
    sol = rect_solution(0.7, 1.0)
    assert sol.Y[0] == pytest.approx(0.7)
    assert sol.theta()[0] == 1


@pytest.mark.parametrize("r", [-2.0, -1.0, 0.5, 1.0])
def test_rect_pulse_matches_closed_form(r):
    sol = rect_solution(r, 2.0, step=2.5e-3)
    t = sol.times[::80]
    err = np.abs(sol.theta()[::80] - theta_rect(r, t)).max()
    assert err < 1e-3


def test_convergence_order():
    errs = []
    for h in (0.01, 0.005, 0.0025):
        sol = rect_solution(1.0, 1.0, step=h)
        errs.append(abs(sol.theta()[-1] - theta_rect(1.0, 1.0)))
    # the sqrt(t) onset of Y limits piecewise-linear product integration to order 1.5
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert all(1.4 < q < 2.1 for q in orders)


def test_free_evolution_after_pulse():
    sol = rect_solution(1.0, 1.0, t_end=3.0)
    # no perturbation after tau: theta is frozen in the interaction picture
    tail = sol.theta(np.linspace(1.0, 3.0, 9))
    assert np.allclose(tail, tail[0], atol=1e-14)


def test_theta_interpolation_consistent_with_nodes():
    sol = rect_solution(-0.5, 1.0)
    assert np.allclose(sol.theta(sol.times), sol.theta(), atol=1e-12)


def test_norm_respects_tolerance():
    sol = rect_solution(3.0, 2.0, step=2.5e-3)
    assert np.abs(sol.theta()).max() <= 1 + 1e-3


def test_restart_reproduces_full_solve():
    prog = PulseProgram.rect(1.0, 2.0)
    full = solve(VolterraProblem(prog, 2.0, step=0.01))
    part = solve(VolterraProblem(prog, 1.0, step=0.01))
    resumed = solve(VolterraProblem(prog, 2.0, step=0.01), history=part)
    assert np.array_equal(resumed.theta(), full.theta())


def test_restart_rejects_foreign_lattice():
    part = rect_solution(1.0, 1.0, step=0.01)
    with pytest.raises(ValueError):
        solve(VolterraProblem(PulseProgram.rect(1.0, 2.0), 2.0, step=0.004), history=part)


def test_incommensurate_edges_rejected():
    prog = PulseProgram.rect(1.0, math.sqrt(2))
    with pytest.raises(ValueError):
        solve(VolterraProblem(prog, 3.0, step=0.01))


def test_lattice_aligns_with_edges():
    sol = rect_solution(1.0, 0.3, t_end=1.0, step=0.007)
    assert sol.step <= 0.007
    assert np.any(np.isclose(sol.times, 0.3, atol=1e-12))


def test_sampled_programs_reproduce_rect():
    ref = rect_solution(-1.0, 1.0, step=0.005).theta()[-1]
    hold = PulseProgram.sampled([0.0, 0.5, 1.0], [-1.0, -1.0, 0.0], rule="previous")
    lin = PulseProgram.sampled([0.0, 1.0], [-1.0, -1.0], rule="linear")
    for prog in (hold, lin):
        sol = solve(VolterraProblem(prog, 1.0, step=0.005))
        assert sol.theta()[-1] == pytest.approx(ref, abs=1e-12)


def test_sampled_program_validation():
    with pytest.raises(ValueError):
        PulseProgram.sampled([0.0, 0.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        PulseProgram.sampled([0.0, 1.0], [1.0, 1.0], rule="cubic")
    with pytest.raises(ValueError):
        PulseProgram.train(1.0, 1.0, 0.5, 3)


def test_memory_cutoff_beyond_run_is_inert():
    a = rect_solution(1.0, 1.0, step=0.01).theta()[-1]
    b = rect_solution(1.0, 1.0, step=0.01, memory_cutoff=10.0).theta()[-1]
    assert a == b


@pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
def test_continuum_amplitudes(k):
    sol = rect_solution(-1.0, 1.0, step=2.5e-3)
    rec = amplitudes_from_Y(sol, [k])
    assert abs(rec.Theta[0, -1] - spectrum_rect(k, -1.0, 1.0)) < 1e-3


def test_amplitudes_without_momenta():
    rec = amplitudes_from_Y(rect_solution(1.0, 0.5))
    assert rec.Theta.size == 0 and rec.path == "volterra"


def test_pole_locator():
    assert laplace_pole(1.0) == 3j
    assert laplace_pole(-2.0) is None
    assert laplace_pole(-1.0) is None
    s = laplace_pole(0.5)
    assert abs(1 / laplace_rect(s * (1 + 1e-9), 0.5)) < 1e-6


def test_laplace_cut_rejected():
    with pytest.raises(ValueError):
        laplace_rect(-2j, 1.0)


def test_laplace_large_s():
    s = 1e10 + 0j
    assert abs(laplace_rect(s, 2.0) * s / 2.0 - 1) < 1e-4


@pytest.mark.parametrize("r,t", [(1.0, 0.5), (1.0, 7.0), (-1.0, 3.0), (-2.5, 2.0), (-0.5, 10.0), (4.0, 1.0)])
def test_laplace_inversion_matches_closed_form(r, t):
    assert abs(invert_laplace_theta(r, t) - theta_rect(r, t)) < 1e-9


def test_laplace_inversion_range():
    with pytest.raises(ValueError):
        invert_laplace_theta(1.0, 80.0)
