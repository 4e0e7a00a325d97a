import math

import numpy as np
import pytest

from gpbound.delta_defect import solve_bright
from gpbound.model import Potential, Segment, StateVector
from gpbound.oracle import (
    gp_residual,
    integrate_gp,
    particle_number,
    second_derivative,
    shooting_eigenvalues,
    shooting_mismatch,
)
from gpbound.square_well import linear_levels

FREE = Potential(segments=(Segment(-10, 10, 0.0),))


def test_linear_exponential():
    tr = integrate_gp(FREE, -1.0, 0.0, StateVector(1.0, 1.0), 0.0, 3.0, 1e-3, record=False)
    assert tr.final.psi == pytest.approx(math.exp(3.0), rel=1e-12)


def test_soliton_trajectory():
    s0 = StateVector(1 / math.cosh(-5.0), -math.tanh(-5.0) / math.cosh(-5.0))
    tr = integrate_gp(FREE, -1.0, -2.0, s0, -5.0, 5.0, 1e-4)
    assert np.max(np.abs(tr.psi - 1 / np.cosh(tr.tau))) <= 1e-8


def test_rk4_fourth_order():
    s0 = StateVector(0.5, 0.1)
    ref = integrate_gp(FREE, -0.5, -1.0, s0, 0.0, 4.0, 1e-4, record=False).final.psi
    e = [abs(integrate_gp(FREE, -0.5, -1.0, s0, 0.0, 4.0, d, record=False).final.psi - ref) for d in (0.04, 0.02)]
    assert e[0] / e[1] == pytest.approx(16.0, rel=0.15)


def test_delta_jump_applied_between_slices():
    V = Potential.single_delta(-2.0)
    tr = integrate_gp(V, -1.0, 0.0, StateVector(math.exp(-3.0), math.exp(-3.0)), -3.0, 3.0, 1e-3)
    assert np.max(np.abs(tr.psi - np.exp(-np.abs(tr.tau)))) <= 1e-10


def test_second_derivative_and_residual():
    t = np.linspace(-2, 2, 41)
    assert second_derivative(np.sin, t) == pytest.approx(-np.sin(t), abs=1e-9)
    sol = solve_bright(0.0, -2.0, -1.0)
    assert gp_residual(sol.psi, FREE, -1.0, -2.0, t) <= 1e-8
    bumped = lambda x: sol.psi(x) + 1e-3 * np.exp(-x * x)
    assert gp_residual(bumped, FREE, -1.0, -2.0, t) >= 1e-4


def test_residual_skips_walls():
    V = Potential.single_delta(-2.0)
    wave = lambda x: np.exp(-np.abs(x))
    assert gp_residual(wave, V, -1.0, 0.0, np.linspace(-3, 3, 601)) <= 1e-8


def test_particle_numbers():
    assert particle_number(lambda x: 1 / np.cosh(x), (-30, 30)).N == pytest.approx(2.0, abs=1e-9)
    pn = particle_number(lambda x: np.exp(-np.abs(x)), (-5, 5))
    assert pn.N == pytest.approx(1.0, abs=1e-6)
    assert pn.tail_warning
    growing = particle_number(lambda x: np.exp(x), (0, 1))
    assert growing.tail_warning


def test_shooting_recovers_linear_well():
    V = Potential.square_well(6.0, 1.0)
    lin = linear_levels(6.0, 1.0)
    for parity in ("symmetric", "antisymmetric"):
        roots = shooting_eigenvalues(V, 0.0, 1.0, parity, (-5.99, -0.01), 120)
        assert [r.E for r in roots] == pytest.approx(lin[parity], abs=1e-9)
    whole = shooting_eigenvalues(V, 0.0, 1.0, None, (-5.99, -0.01), 120)
    assert len(whole) == 2


def test_shooting_mismatch_nan_outside_bound_window():
    assert math.isnan(shooting_mismatch(FREE, 0.5, 0.0))
