"""Linear ramp g(t) = 1 - t/tau_Q from the paramagnet to the critical point.

Each momentum is an independent two-level system

    i d/dt (v, u) = 2 [[g - cos k, -sin k], [-sin k, cos k - g]] (v, u)

integrated with an adaptive Dormand-Prince 8(5,3) pair compiled by numba.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np
from scipy.integrate._ivp import dop853_coefficients as _dop

from .lattice import MomentumGrid, equilibrium_modes

DEFAULT_G_START = 5.0
DEFAULT_TOL = 1e-11
NORM_FAILURE = 1e-6

_A = np.ascontiguousarray(_dop.A[:_dop.N_STAGES, :_dop.N_STAGES])
_B = np.ascontiguousarray(_dop.B)
_C = np.ascontiguousarray(_dop.C[:_dop.N_STAGES])
_E3 = np.ascontiguousarray(_dop.E3)
_E5 = np.ascontiguousarray(_dop.E5)


class IntegrationError(RuntimeError):
    def __init__(self, message: str, k: float | None = None):
        super().__init__(message if k is None else f"{message} (k={k!r})")
        self.k = k


@dataclass(frozen=True)
class QuenchProtocol:
    tau_Q: float
    g_start: float = DEFAULT_G_START
    g_c: float = 1.0

    def __post_init__(self):
        if not self.tau_Q > 0:
            raise ValueError(f"tau_Q must be positive, got {self.tau_Q}")
        if not self.g_start > self.g_c:
            raise ValueError(f"g_start must exceed the critical field, got {self.g_start}")

    @property
    def t_start(self) -> float:
        return -(self.g_start - self.g_c) * self.tau_Q

    @property
    def t_end(self) -> float:
        return 0.0

    def g(self, t):
        return self.g_c - np.asarray(t) / self.tau_Q


@dataclass(frozen=True)
class ModeAmplitudes:
    """Product state prod_k (u_k - v_k c_k^dag c_-k^dag)|vac> at time ``time``."""

    grid: MomentumGrid
    v: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    time: float = 0.0

    def norm_drift(self) -> float:
        return float(np.max(np.abs(np.abs(self.u) ** 2 + np.abs(self.v) ** 2 - 1.0)))

    def to_csv(self, path) -> None:
        """Dump (k, Re v, Im v, Re u, Im u) per momentum."""
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "re_v", "im_v", "re_u", "im_u"])
            for row in zip(self.grid.momenta, self.v.real, self.v.imag,
                           self.u.real, self.u.imag):
                w.writerow([repr(float(x)) for x in row])


@numba.njit(cache=True, fastmath=True)
def _rhs(t, v, u, cosk, sink, tau_Q):
    a = 2.0 * (1.0 - t / tau_Q - cosk)
    b = -2.0 * sink
    return -1j * (a * v + b * u), -1j * (b * v - a * u)


@numba.njit(cache=True, fastmath=True)
def _dop853_mode(k, tau_Q, t0, t1, v0, u0, rtol, atol, max_steps, A, B, C, E3, E5):
    """Integrate one mode from t0 to t1. Returns (v, u, n_steps, status)."""
    n_stages = B.size
    Kv = np.empty(n_stages + 1, dtype=np.complex128)
    Ku = np.empty(n_stages + 1, dtype=np.complex128)
    cosk = np.cos(k)
    sink = np.sin(k)
    t = t0
    v = v0
    u = u0
    fv, fu = _rhs(t, v, u, cosk, sink, tau_Q)
    # the fastest local frequency bounds the first step
    omega = 2.0 * np.sqrt((1.0 - t0 / tau_Q - cosk) ** 2 + sink ** 2)
    h = min(0.01 / omega, t1 - t0)
    steps = 0
    rejected = False
    while t < t1:
        if steps >= max_steps:
            return v, u, steps, 1
        h = min(h, t1 - t)
        if h < 1e-14 * max(1.0, abs(t)):
            return v, u, steps, 2
        Kv[0] = fv
        Ku[0] = fu
        for s in range(1, n_stages):
            dv = 0j
            du = 0j
            for j in range(s):
                dv += A[s, j] * Kv[j]
                du += A[s, j] * Ku[j]
            Kv[s], Ku[s] = _rhs(t + C[s] * h, v + h * dv, u + h * du, cosk, sink, tau_Q)
        dv = 0j
        du = 0j
        for j in range(n_stages):
            dv += B[j] * Kv[j]
            du += B[j] * Ku[j]
        v_new = v + h * dv
        u_new = u + h * du
        t_new = t + h
        if t_new > t1 or t1 - t_new < 1e-15 * max(1.0, abs(t1)):
            t_new = t1
        fv_new, fu_new = _rhs(t_new, v_new, u_new, cosk, sink, tau_Q)
        Kv[n_stages] = fv_new
        Ku[n_stages] = fu_new
        e5v = 0j
        e5u = 0j
        e3v = 0j
        e3u = 0j
        for j in range(n_stages + 1):
            e5v += E5[j] * Kv[j]
            e5u += E5[j] * Ku[j]
            e3v += E3[j] * Kv[j]
            e3u += E3[j] * Ku[j]
        sv = atol + max(abs(v), abs(v_new)) * rtol
        su = atol + max(abs(u), abs(u_new)) * rtol
        err5 = (abs(e5v) / sv) ** 2 + (abs(e5u) / su) ** 2
        err3 = (abs(e3v) / sv) ** 2 + (abs(e3u) / su) ** 2
        denom = err5 + 0.01 * err3
        if denom > 0.0:
            err = h * err5 / np.sqrt(denom * 2.0)
        else:
            err = 0.0
        if err < 1.0:
            if err == 0.0:
                factor = 10.0
            else:
                factor = min(10.0, 0.9 * err ** (-1.0 / 8.0))
            if rejected:
                factor = min(1.0, factor)
            t = t_new
            v = v_new
            u = u_new
            fv = fv_new
            fu = fu_new
            h *= factor
            rejected = False
            steps += 1
        else:
            h *= max(0.2, 0.9 * err ** (-1.0 / 8.0))
            rejected = True
    return v, u, steps, 0


@numba.njit(cache=True, parallel=True, fastmath=True)
def _integrate_modes(ks, tau_Q, t0, t1, v0, u0, rtol, atol, max_steps, A, B, C, E3, E5):
    n = ks.size
    v = np.empty(n, dtype=np.complex128)
    u = np.empty(n, dtype=np.complex128)
    steps = np.empty(n, dtype=np.int64)
    status = np.empty(n, dtype=np.int64)
    for i in numba.prange(n):
        v[i], u[i], steps[i], status[i] = _dop853_mode(
            ks[i], tau_Q, t0, t1, v0[i], u0[i], rtol, atol, max_steps, A, B, C, E3, E5)
    return v, u, steps, status


def evolve_ramp(momenta, tau_Q: float, v0, u0, t0: float, t1: float,
                tol: float = DEFAULT_TOL, max_steps: int = 50_000_000):
    """Integrate all modes along g(t) = 1 - t/tau_Q from t0 to t1.

    Past t = 0 the field keeps decreasing linearly; that stretch is only used
    to sweep a mode through its anticrossing for Landau-Zener checks.
    """
    if not 0 < tol <= 1e-4:
        raise ValueError(f"tol must lie in (0, 1e-4], got {tol}")
    if t0 > t1:
        raise ValueError("ramp integration needs t0 <= t1")
    momenta = np.atleast_1d(np.asarray(momenta, dtype=float))
    v, u, steps, status = _integrate_modes(
        np.ascontiguousarray(momenta), float(tau_Q),
        float(t0), float(t1),
        np.ascontiguousarray(np.broadcast_to(v0, momenta.shape), dtype=np.complex128),
        np.ascontiguousarray(np.broadcast_to(u0, momenta.shape), dtype=np.complex128),
        float(tol), float(tol), int(max_steps), _A, _B, _C, _E3, _E5)
    bad = np.flatnonzero(status)
    if bad.size:
        i = bad[0]
        why = "step budget exhausted" if status[i] == 1 else "step size underflow"
        raise IntegrationError(why, float(momenta[i]))
    return v, u, steps


def drive_to_critical(protocol: QuenchProtocol, grid: MomentumGrid,
                      tol: float = DEFAULT_TOL) -> ModeAmplitudes:
    """Amplitudes (v_k(0), u_k(0)) on arrival at the critical point.

    Every mode starts in the instantaneous ground state at ``protocol.g_start``
    with real, nonnegative components.
    """
    eq = equilibrium_modes(grid, protocol.g_start)
    v, u, _ = evolve_ramp(grid.momenta, protocol.tau_Q, eq.v.astype(complex),
                          eq.u.astype(complex), protocol.t_start, 0.0, tol)
    state = ModeAmplitudes(grid=grid, v=v, u=u, time=0.0)
    drift = np.abs(np.abs(u) ** 2 + np.abs(v) ** 2 - 1.0)
    worst = int(np.argmax(drift))
    if drift[worst] > NORM_FAILURE:
        raise IntegrationError(f"norm drift {drift[worst]:.3e} exceeds {NORM_FAILURE}",
                               float(grid.momenta[worst]))
    return state


def landau_zener_map(k: float, tau_Q: float):
    """Map the mode-k ramp onto the standard Landau-Zener form.

    Returns ``(t_prime, tau_Q_prime)`` where ``t_prime(t) = 4 tau_Q sin k (g(t) - cos k)``
    and ``tau_Q_prime = 4 tau_Q sin^2 k``.
    """
    if not 0 < k < np.pi:
        raise ValueError(f"k must lie in (0, pi), got {k}")
    s, c = np.sin(k), np.cos(k)

    def t_prime(t):
        return 4.0 * tau_Q * s * (1.0 - np.asarray(t) / tau_Q - c)

    return t_prime, 4.0 * tau_Q * s * s


def landau_zener_probability(k: float, tau_Q: float) -> float:
    """Excitation exp(-pi tau_Q'/2) after a complete sweep through the anticrossing."""
    _, tq = landau_zener_map(k, tau_Q)
    return float(np.exp(-np.pi * tq / 2.0))
