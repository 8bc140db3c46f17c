"""Momentum grid of the positive-parity sector and equilibrium Bogoliubov modes.

Units: lattice constant = 1, hbar = 1, energies in units of the Ising coupling.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# critical exponents of the transverse-field Ising chain
Z_EXPONENT = 1
NU_EXPONENT = 1


@dataclass(frozen=True)
class MomentumGrid:
    """The N/2 positive quasi-momenta k = (2j+1)pi/N, j = 0..N/2-1."""

    N: int
    momenta: np.ndarray = field(repr=False, compare=False)

    def __len__(self) -> int:
        return self.momenta.size


@dataclass(frozen=True)
class EquilibriumModes:
    g: float
    u: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class KzScales:
    tau_Q: float
    N: int
    t_hat: float
    xi_hat: float
    tau_c: float
    ratio: float

    @property
    def size_ok(self) -> bool:
        # N >> sqrt(tau_Q); ratio of 20 is the working threshold used in scans
        return self.ratio >= 20.0


def build_grid(N: int) -> MomentumGrid:
    if int(N) != N or N < 4 or N % 2:
        raise ValueError(f"N must be an even integer >= 4, got {N!r}")
    N = int(N)
    j = np.arange(N // 2)
    momenta = (2 * j + 1) * np.pi / N
    momenta.flags.writeable = False
    return MomentumGrid(N=N, momenta=momenta)


def bogoliubov_angle(k, g):
    """theta_k in (0, pi), from sin(theta) ~ sin k and cos(theta) ~ g - cos k."""
    return np.arctan2(np.sin(k), g - np.cos(k))


def equilibrium_modes(grid: MomentumGrid, g: float) -> EquilibriumModes:
    """Ground-state Bogoliubov pair (u, v) of every mode at field ``g``."""
    if g < 0:
        raise ValueError(f"field must be nonnegative, got {g}")
    theta = bogoliubov_angle(grid.momenta, g)
    return EquilibriumModes(g=float(g), u=np.cos(theta / 2), v=np.sin(theta / 2))


def critical_modes(k):
    """Closed-form equilibrium modes at g = 1: (u, v) = (sin(k/4+pi/4), cos(k/4+pi/4))."""
    k = np.asarray(k, dtype=float)
    return np.sin(k / 4 + np.pi / 4), np.cos(k / 4 + np.pi / 4)


def mode_energy(k, g):
    """Quasiparticle energy 2*sqrt(g^2 - 2 g cos k + 1)."""
    return 2.0 * np.sqrt(g * g - 2.0 * g * np.cos(k) + 1.0)


def kz_scales(N: int, tau_Q: float) -> KzScales:
    """Kibble-Zurek scales with unit prefactors: t_hat = xi_hat = sqrt(tau_Q), tau_c = N."""
    if tau_Q <= 0:
        raise ValueError(f"tau_Q must be positive, got {tau_Q}")
    t_hat = tau_Q ** (Z_EXPONENT * NU_EXPONENT / (1 + Z_EXPONENT * NU_EXPONENT))
    xi_hat = tau_Q ** (NU_EXPONENT / (1 + Z_EXPONENT * NU_EXPONENT))
    tau_c = float(N) ** Z_EXPONENT
    return KzScales(tau_Q=float(tau_Q), N=int(N), t_hat=t_hat, xi_hat=xi_hat,
                    tau_c=tau_c, ratio=N / xi_hat)
