"""Closed-form approximations around the critical point.

Amplitudes on arrival are expanded to leading order in x = k sqrt(tau_Q), with
the Gaussian cutoff exp(-pi tau_Q k^2 / 4) kept unexpanded.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .driven import ModeAmplitudes
from .free import dispersion
from .lattice import MomentumGrid

EULER_GAMMA = 0.5772156649015329
LOG_CORRECTION = EULER_GAMMA + math.log(2.0)
# truncation of Gaussian sums: exp(-36/2) ~ 1.5e-8 per unit width ** 2 -> terms < 1e-16
_GAUSS_REACH = 6.0


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class ApproxAmplitudes:
    grid: MomentumGrid
    tau_Q: float
    v: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    gamma: float = EULER_GAMMA

    def as_state(self) -> ModeAmplitudes:
        return ModeAmplitudes(grid=self.grid, v=self.v, u=self.u, time=0.0)


def gaussian_cutoff(k, tau_Q):
    return np.exp(-np.pi * tau_Q * np.asarray(k) ** 2 / 4.0)


def approx_amplitudes(grid: MomentumGrid, tau_Q: float) -> ApproxAmplitudes:
    if tau_Q < 10:
        warnings.warn(f"tau_Q = {tau_Q} is too small for the small-k expansion", stacklevel=2)
    k = grid.momenta
    G = gaussian_cutoff(k, tau_Q)
    v = (math.sqrt(tau_Q) * k * math.sqrt(math.pi / 2) * G).astype(complex)
    u = G * np.exp(-1j * math.pi / 4) * (1.0 + 0.5j * tau_Q * k ** 2 * LOG_CORRECTION)
    return ApproxAmplitudes(grid=grid, tau_Q=float(tau_Q), v=v, u=u)


def approx_excitation_probability(grid: MomentumGrid, tau_Q: float) -> np.ndarray:
    """p_k from the approximate amplitudes with u_eq = v_eq = 1/sqrt(2)."""
    a = approx_amplitudes(grid, tau_Q)
    return 0.5 * np.abs(a.u - a.v) ** 2


def approx_ground_probability_per_mode(grid: MomentumGrid, tau_Q: float) -> np.ndarray:
    a = approx_amplitudes(grid, tau_Q)
    return 0.5 * np.abs(np.conj(a.v) + np.conj(a.u)) ** 2


def scaled_excitation(x):
    """p as a function of x = k sqrt(tau_Q) in the large-tau_Q limit."""
    x = np.asarray(x, dtype=float)
    sp = math.sqrt(math.pi)
    return (np.exp(-math.pi * x ** 2 / 2) / 8.0
            * ((x * sp - 2.0) ** 2 + (x * sp - x ** 2 * LOG_CORRECTION) ** 2))


def _c_integrand(x):
    return math.log1p(-float(scaled_excitation(x)))


def constant_C(upper: float = 10.0, epsabs: float = 1e-12) -> float:
    """C = -(1/2pi) int_0^inf ln(1 - p(x)) dx, so that p_GS ~ exp(-C N / sqrt(tau_Q)).

    The integrand is below 1e-60 beyond x = 10, so the integral is cut there.
    """
    value, abserr = integrate.quad(_c_integrand, 0.0, upper, epsabs=epsabs, epsrel=1e-12,
                                   limit=200)
    if not abserr < 1e-8:
        raise QuadratureError(f"quadrature error estimate {abserr:.2e} too large")
    return -value / (2.0 * math.pi)


def ground_state_probability_approx(N: int, tau_Q: float, C: float | None = None) -> float:
    if C is None:
        C = constant_C()
    return math.exp(-C * N / math.sqrt(tau_Q))


def aia_alpha(C: float) -> float:
    """Matching constant for which the adiabatic-impulse estimate equals exp(-C N/sqrt(tau_Q))."""
    return C * 4.0 * math.pi / (math.pi - 2.0)


# ---------------------------------------------------------------- magnetization

def sz_leading_series(grid: MomentumGrid, tau_Q: float, t, linearized: bool = False):
    """Time-dependent part of S^z to leading order in k sqrt(tau_Q)."""
    k = grid.momenta
    eps = 2.0 * k if linearized else dispersion(k)
    t = np.asarray(t, dtype=float)
    phase = np.multiply.outer(t, eps)
    x = k * math.sqrt(tau_Q)
    terms = (np.sin(phase) ** 2 + 0.5 * math.sqrt(math.pi) * x * np.sin(2 * phase)
             + 0.5 * math.pi * x ** 2 * np.cos(phase) ** 2) * np.exp(-math.pi * tau_Q * k ** 2 / 2)
    return -4.0 / grid.N * terms.sum(axis=-1)


def peak_amplitude(tau_Q):
    """A = 1/(pi sqrt(2 tau_Q))."""
    return 1.0 / (math.pi * np.sqrt(2.0 * np.asarray(tau_Q, dtype=float)))


def peak_fwhm(tau_Q):
    """W = sqrt(pi ln2 / 2) sqrt(tau_Q)."""
    return math.sqrt(math.pi * math.log(2.0) / 2.0) * np.sqrt(np.asarray(tau_Q, dtype=float))


def sz_gaussian_train(N: int, tau_Q: float, t):
    """Anti-periodic Gaussian peak train, anti-period N/4."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    reach = _GAUSS_REACH * math.sqrt(math.pi * tau_Q / 8.0)
    period = N / 4.0
    out = np.zeros_like(t)
    s_hi = int(math.floor((t.max() + reach) / period)) if t.size else -1
    for s in range(max(0, s_hi + 1)):
        near = np.abs(t - s * period) <= reach
        if np.any(near):
            out[near] += (-1) ** s * np.exp(-8.0 * (t[near] - s * period) ** 2 / (math.pi * tau_Q))
    return peak_amplitude(tau_Q) * out


# ---------------------------------------------------------------- Loschmidt echo

def echo_product_approx(grid: MomentumGrid, tau_Q: float, t, linearized: bool = False):
    """log L(t) ~ sum_k ln(1 - sin^2(eps_k t) exp(-pi tau_Q k^2))."""
    k = grid.momenta
    eps = 2.0 * k if linearized else dispersion(k)
    phase = np.multiply.outer(np.asarray(t, dtype=float), eps)
    return np.log1p(-np.sin(phase) ** 2 * np.exp(-math.pi * tau_Q * k ** 2)).sum(axis=-1)


def echo_gaussian_revivals(N: int, tau_Q: float, t):
    """Thermodynamic-limit echo with revivals restored every N/2."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    width = math.sqrt(math.pi * tau_Q / 4.0)
    reach = _GAUSS_REACH * width
    period = N / 2.0
    total = np.zeros_like(t)
    s_hi = int(math.floor((t.max() + reach) / period)) if t.size else -1
    for s in range(max(0, s_hi + 1)):
        near = np.abs(t - s * period) <= reach
        if np.any(near):
            total[near] += np.exp(-4.0 * (t[near] - s * period) ** 2 / (math.pi * tau_Q))
    return np.exp(-N / (8.0 * math.pi * math.sqrt(tau_Q)) * (1.0 - total))


def echo_fwhm(N: int, tau_Q: float, exact_log: bool = False):
    """Width of the Gaussian revivals: 2 pi sqrt(2 ln 2) tau_Q^(3/4) / sqrt(N).

    With ``exact_log`` the logarithm is not expanded for N >> sqrt(tau_Q).
    """
    if exact_log:
        arg = 1.0 - 8.0 * math.pi * math.sqrt(tau_Q) * math.log(2.0) / N
        return math.sqrt(-math.pi * tau_Q * math.log(arg))
    return 2.0 * math.pi * math.sqrt(2.0 * math.log(2.0)) * tau_Q ** 0.75 / math.sqrt(N)
