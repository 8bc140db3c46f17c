import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kzising.lattice import (bogoliubov_angle, build_grid, critical_modes, equilibrium_modes,
                             kz_scales, mode_energy)


@pytest.mark.parametrize("N, expected", [
    (4, [math.pi / 4, 3 * math.pi / 4]),
    (8, [math.pi / 8, 3 * math.pi / 8, 5 * math.pi / 8, 7 * math.pi / 8]),
])
def test_small_grids(N, expected):
    np.testing.assert_allclose(build_grid(N).momenta, expected, rtol=0, atol=1e-15)


def test_large_grid():
    grid = build_grid(2000)
    assert len(grid) == 1000
    assert grid.momenta[-1] == pytest.approx(math.pi - math.pi / 2000, abs=1e-14)


@pytest.mark.parametrize("N", [0, 2, 3, 7, 101, -4, 4.5])
def test_bad_sizes(N):
    with pytest.raises(ValueError):
        build_grid(N)


@given(st.integers(2, 3000))
def test_grid_invariants(half):
    grid = build_grid(2 * half)
    k = grid.momenta
    assert k.size == half
    assert np.all(np.diff(k) > 0)
    assert k[0] > 0 and k[-1] < math.pi
    np.testing.assert_allclose(k, (2 * np.arange(half) + 1) * math.pi / (2 * half), rtol=1e-15)


@given(st.floats(0.0, 50.0), st.integers(2, 200))
def test_equilibrium_normalized(g, half):
    eq = equilibrium_modes(build_grid(2 * half), g)
    np.testing.assert_allclose(eq.u ** 2 + eq.v ** 2, 1.0, atol=1e-12)
    assert np.all(eq.u >= 0) and np.all(eq.v >= 0)


@pytest.mark.parametrize("g", [0.5, 1.0, 2.0, 10.0])
def test_theta_trig_identity(g):
    k = build_grid(500).momenta
    r = np.sqrt(g * g - 2 * g * np.cos(k) + 1)
    s, c = np.sin(k) / r, (g - np.cos(k)) / r
    np.testing.assert_allclose(s ** 2 + c ** 2, 1.0, atol=1e-12)
    theta = bogoliubov_angle(k, g)
    np.testing.assert_allclose(np.sin(theta), s, atol=1e-12)
    np.testing.assert_allclose(np.cos(theta), c, atol=1e-12)


def test_paramagnetic_limit():
    eq = equilibrium_modes(build_grid(100), 1e6)
    np.testing.assert_allclose(eq.u, 1.0, atol=1e-6)
    np.testing.assert_allclose(eq.v, 0.0, atol=1e-6)


def test_critical_closed_form_matches_general():
    grid = build_grid(1000)
    eq = equilibrium_modes(grid, 1.0)
    u_c, v_c = critical_modes(grid.momenta)
    np.testing.assert_allclose(eq.u, u_c, atol=1e-12)
    np.testing.assert_allclose(eq.v, v_c, atol=1e-12)


def test_critical_modes_small_k_and_midpoint():
    u, v = critical_modes(1e-9)
    assert u == pytest.approx(1 / math.sqrt(2), abs=1e-9)
    assert v == pytest.approx(1 / math.sqrt(2), abs=1e-9)
    u, v = critical_modes(math.pi / 2)
    assert v == pytest.approx(math.cos(math.pi / 8 + math.pi / 4), abs=1e-15)
    assert u == pytest.approx(math.sin(math.pi / 8 + math.pi / 4), abs=1e-15)


def test_mode_energy_at_critical_point():
    k = build_grid(64).momenta
    np.testing.assert_allclose(mode_energy(k, 1.0), 4 * np.sin(k / 2), atol=1e-14)


@pytest.mark.parametrize("N, tau_Q, t_hat, ratio, ok", [
    (2000, 100, 10.0, 200.0, True),
    (1000, 400, 20.0, 50.0, True),
    (100, 10000, 100.0, 1.0, False),
])
def test_kz_scales(N, tau_Q, t_hat, ratio, ok):
    s = kz_scales(N, tau_Q)
    assert s.t_hat == pytest.approx(t_hat)
    assert s.xi_hat == pytest.approx(t_hat)
    assert s.tau_c == N
    assert s.ratio == pytest.approx(ratio)
    assert s.size_ok is ok


def test_kz_scales_rejects_nonpositive_tau():
    with pytest.raises(ValueError):
        kz_scales(100, 0.0)
