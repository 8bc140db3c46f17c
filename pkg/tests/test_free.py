import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kzising.driven import ModeAmplitudes
from kzising.free import CriticalPropagator, dispersion, evolve, mode_energy_expectation
from kzising.lattice import build_grid, critical_modes
from kzising.observables import loschmidt_echo, sz_values


def dense(prop, t):
    m_vv, m_vu, m_uu = prop.matrix(t)
    return np.moveaxis(np.array([[m_vv, m_vu], [m_vu, m_uu]]), (0, 1), (-2, -1))


def test_dispersion_examples():
    assert dispersion(math.pi) == pytest.approx(4.0)
    assert dispersion(0.0) == 0.0
    assert dispersion(1e-4) == pytest.approx(2e-4, rel=1e-8)


def test_identity_at_zero():
    prop = CriticalPropagator.for_grid(build_grid(16))
    np.testing.assert_array_equal(dense(prop, 0.0), np.broadcast_to(np.eye(2), (8, 2, 2)))


def test_half_period_gives_minus_identity():
    prop = CriticalPropagator.for_grid(build_grid(16))
    k = prop.grid.momenta
    for j in range(k.size):
        m = dense(prop, math.pi / prop.eps[j])[j]
        np.testing.assert_allclose(m, -np.eye(2), atol=1e-13)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 1e4))
def test_unitarity(t):
    m = dense(CriticalPropagator.for_grid(build_grid(64)), t)
    prod = np.conj(np.swapaxes(m, -1, -2)) @ m
    assert np.max(np.abs(prod - np.eye(2))) <= 1e-13


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 500.0), st.floats(0.0, 500.0))
def test_group_property(t1, t2):
    prop = CriticalPropagator.for_grid(build_grid(32))
    np.testing.assert_allclose(dense(prop, t1) @ dense(prop, t2), dense(prop, t1 + t2), atol=1e-11)


def test_eigenvectors_acquire_phases():
    grid = build_grid(12)
    u, v = critical_modes(grid.momenta)
    prop = CriticalPropagator.for_grid(grid)
    t = 3.7
    vt, ut = prop.apply(v, u, t)
    # the ground state of every mode picks up exp(+i eps t)
    phase = np.exp(1j * prop.eps * t)
    np.testing.assert_allclose(vt, v * phase, atol=1e-14)
    np.testing.assert_allclose(ut, u * phase, atol=1e-14)


def random_state(N, seed=0):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(2, N // 2)) + 1j * rng.normal(size=(2, N // 2))
    z /= np.linalg.norm(z, axis=0)
    return ModeAmplitudes(grid=build_grid(N), v=z[0], u=z[1])


def test_energy_conserved():
    s0 = random_state(40)
    e0 = mode_energy_expectation(s0)
    for t in (0.3, 17.0, 1234.5):
        np.testing.assert_allclose(mode_energy_expectation(evolve(s0, t)), e0, atol=1e-12)


def test_evolve_accumulates_time():
    s = evolve(evolve(random_state(8), 1.5), 2.0)
    assert s.time == 3.5
    with pytest.raises(ValueError):
        evolve(random_state(8), -1.0)


def test_ground_state_is_stationary():
    grid = build_grid(200)
    u, v = critical_modes(grid.momenta)
    s0 = ModeAmplitudes(grid=grid, v=v.astype(complex), u=u.astype(complex))
    t = np.linspace(0.0, 600.0, 301)
    sz = sz_values(s0, t)
    assert np.ptp(sz) < 1e-13
    for tt in (0.0, 50.0, 599.0):
        L, logL = loschmidt_echo(s0, tt)
        assert L == pytest.approx(1.0, abs=1e-13)
        assert logL <= 0.0 or logL == pytest.approx(0.0, abs=1e-13)


def test_linearized_dispersion():
    prop = CriticalPropagator.for_grid(build_grid(10), linearized=True)
    np.testing.assert_allclose(prop.eps, 2 * prop.grid.momenta)
