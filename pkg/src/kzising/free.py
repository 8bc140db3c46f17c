"""Free evolution at the critical point g = 1.

The critical mode Hamiltonian has eigenvalues +-eps_k with eps_k = 4 sin(k/2),
so the propagator is known in closed form and applied directly at any t.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .driven import ModeAmplitudes
from .lattice import MomentumGrid


def dispersion(k):
    """Quasiparticle energy 4 sin(k/2) at the critical point."""
    return 4.0 * np.sin(np.asarray(k) / 2.0)


@dataclass(frozen=True)
class CriticalPropagator:
    grid: MomentumGrid
    eps: np.ndarray = field(repr=False)
    sin_half: np.ndarray = field(repr=False)
    cos_half: np.ndarray = field(repr=False)

    @classmethod
    def for_grid(cls, grid: MomentumGrid, linearized: bool = False) -> "CriticalPropagator":
        k = grid.momenta
        eps = 2.0 * k if linearized else dispersion(k)
        return cls(grid=grid, eps=eps, sin_half=np.sin(k / 2), cos_half=np.cos(k / 2))

    def matrix(self, t):
        """Propagator entries (m_vv, m_vu, m_uu) per mode; m_uv == m_vu.

        ``t`` may be a scalar or a 1-d array of times; arrays broadcast to
        shape (len(t), n_modes).
        """
        t = np.asarray(t, dtype=float)
        phase = np.multiply.outer(t, self.eps)
        c, s = np.cos(phase), np.sin(phase)
        off = 1j * self.cos_half * s
        return c - 1j * self.sin_half * s, off, c + 1j * self.sin_half * s

    def apply(self, v0, u0, t):
        m_vv, m_vu, m_uu = self.matrix(t)
        return m_vv * v0 + m_vu * u0, m_vu * v0 + m_uu * u0


def evolve(state0: ModeAmplitudes, t: float, propagator: CriticalPropagator | None = None
           ) -> ModeAmplitudes:
    """Propagate ``state0`` freely by time ``t`` >= 0 at g = 1."""
    if t < 0:
        raise ValueError(f"free evolution needs t >= 0, got {t}")
    prop = propagator or CriticalPropagator.for_grid(state0.grid)
    v, u = prop.apply(state0.v, state0.u, float(t))
    return ModeAmplitudes(grid=state0.grid, v=v, u=u, time=state0.time + float(t))


def mode_energy_expectation(state: ModeAmplitudes):
    """Per-mode <h_k> at g = 1 for the (v, u) pair, h_k = 2[[1-cos k, -sin k], [-sin k, cos k-1]]."""
    k = state.grid.momenta
    a = 2.0 * (1.0 - np.cos(k))
    b = -2.0 * np.sin(k)
    v, u = state.v, state.u
    return a * (np.abs(v) ** 2 - np.abs(u) ** 2) + 2.0 * b * np.real(np.conj(v) * u)
