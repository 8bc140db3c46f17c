"""Observables of the product state: excitation probabilities, p_GS, S^z and the echo."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .driven import ModeAmplitudes
from .free import CriticalPropagator
from .lattice import critical_modes

SZ = "Sz"
ECHO = "LoschmidtEcho"
LOG_ECHO = "LogLoschmidtEcho"

# time samples per propagation chunk; bounds memory at chunk * n_modes complex numbers
_CHUNK = 1024
_ONE_MINUS = float(np.nextafter(1.0, 0.0))


@dataclass
class TimeSeries:
    observable: str
    t: np.ndarray
    values: np.ndarray
    logvalues: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.t.size

    def power_one_over_n(self) -> np.ndarray:
        """L^(1/N), computed from the log to survive underflow between revivals."""
        if self.logvalues is None:
            raise ValueError("series carries no log values")
        return np.exp(self.logvalues / self.meta["N"])

    def window(self, t_lo: float, t_hi: float) -> "TimeSeries":
        sel = (self.t >= t_lo) & (self.t <= t_hi)
        logv = None if self.logvalues is None else self.logvalues[sel]
        return TimeSeries(self.observable, self.t[sel], self.values[sel], logv, dict(self.meta))

    def to_csv(self, path, extra: dict | None = None) -> None:
        cols = {"t": self.t, "value": self.values}
        if self.logvalues is not None:
            cols["logvalue"] = self.logvalues
        if extra:
            cols.update(extra)
        lines = [f"# {key}={val}" for key, val in self.meta.items()]
        lines.append(",".join(cols))
        for row in zip(*cols.values()):
            lines.append(",".join(repr(float(x)) for x in row))
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, path) -> "TimeSeries":
        meta, rows, header = {}, [], None
        for line in Path(path).read_text().splitlines():
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                meta[key] = _parse_meta(val)
            elif header is None:
                header = line.split(",")
            elif line:
                rows.append([float(x) for x in line.split(",")])
        data = np.array(rows).reshape(-1, len(header))
        col = dict(zip(header, data.T))
        return cls(meta.get("observable", ""), col["t"], col["value"], col.get("logvalue"), meta)


def _parse_meta(val: str):
    for conv in (int, float):
        try:
            return conv(val)
        except ValueError:
            pass
    return val


def sample_times(t_max: float, dt: float, t_start: float = 0.0) -> np.ndarray:
    if dt <= 0 or t_max <= t_start:
        raise ValueError(f"need dt > 0 and t_max > t_start, got dt={dt}, t_max={t_max}")
    n = int(math.floor((t_max - t_start) / dt + 1e-9)) + 1
    return t_start + dt * np.arange(n)


def default_dt(tau_Q: float) -> float:
    return min(1.0, math.sqrt(tau_Q) / 20.0)


def _row_fsum(a: np.ndarray) -> np.ndarray:
    return np.array([math.fsum(row) for row in np.atleast_2d(a)])


# ---------------------------------------------------------------- t = 0 quantities

def _mode_norm(state: ModeAmplitudes) -> np.ndarray:
    return np.abs(state.u) ** 2 + np.abs(state.v) ** 2


def excitation_probability(state: ModeAmplitudes) -> np.ndarray:
    """p_k = |v_eq u_k - u_eq v_k|^2 with the critical-point equilibrium modes.

    Divided by |u_k|^2 + |v_k|^2 so that integrator norm drift does not leak
    into p_k + P_k = 1.
    """
    u_eq, v_eq = critical_modes(state.grid.momenta)
    p = np.abs(v_eq * state.u - u_eq * state.v) ** 2 / _mode_norm(state)
    return np.clip(p, 0.0, 1.0)


def ground_probability_per_mode(state: ModeAmplitudes) -> np.ndarray:
    """P_k = |v_eq v_k^* + u_eq u_k^*|^2, normalized like p_k."""
    u_eq, v_eq = critical_modes(state.grid.momenta)
    P = np.abs(v_eq * np.conj(state.v) + u_eq * np.conj(state.u)) ** 2 / _mode_norm(state)
    return np.clip(P, 0.0, 1.0)


def log_ground_state_probability(state: ModeAmplitudes) -> float:
    p = excitation_probability(state)
    if np.any(p >= 1.0):
        return -math.inf
    return math.fsum(np.log1p(-p))


def ground_state_probability(state: ModeAmplitudes, return_flag: bool = False):
    """p_GS = prod_k (1 - p_k), accumulated in log space.

    With ``return_flag`` a pair ``(p_gs, saturated)`` is returned, where
    ``saturated`` marks a mode with p_k = 1 that forces p_GS = 0.
    """
    logp = log_ground_state_probability(state)
    saturated = logp == -math.inf
    value = 0.0 if saturated else math.exp(logp)
    return (value, saturated) if return_flag else value


def transverse_magnetization(state: ModeAmplitudes) -> float:
    """S^z = 1 - (4/N) sum_k |v_k|^2."""
    return 1.0 - 4.0 / state.grid.N * math.fsum(np.abs(state.v) ** 2)


def aia_ground_state_probability(N: int, tau_Q: float, alpha: float) -> float:
    """Adiabatic-impulse fidelity estimate exp(-N (pi-2)/(4 pi) g_hat), g_hat = alpha/sqrt(tau_Q)."""
    if alpha <= 0:
        raise ValueError("matching constant alpha must be positive")
    g_hat = alpha / math.sqrt(tau_Q)
    return math.exp(-N * (math.pi - 2.0) / (4.0 * math.pi) * g_hat)


# ---------------------------------------------------------------- free evolution

def _meta(state0: ModeAmplitudes, observable: str, dt: float, **extra) -> dict:
    meta = {"observable": observable, "N": state0.grid.N}
    meta.update({key: val for key, val in extra.items() if val is not None})
    meta["dt"] = dt
    return meta


def _chunks(times: np.ndarray):
    for lo in range(0, times.size, _CHUNK):
        yield times[lo:lo + _CHUNK]


def _echo_overlap_loss(state0: ModeAmplitudes, prop: CriticalPropagator, t) -> np.ndarray:
    """x_k = |u_k(0) v_k(t) - v_k(0) u_k(t)|^2, clamped below 1."""
    v, u = prop.apply(state0.v, state0.u, t)
    x = np.abs(state0.u * v - state0.v * u) ** 2
    # no overlap is lost at t = 0; pin it against rounding in the products
    x[np.asarray(t) == 0] = 0.0
    return np.clip(x, 0.0, _ONE_MINUS)


def loschmidt_echo(state0: ModeAmplitudes, t: float, linearized: bool = False):
    """Return (L, log L) of the state freely evolved by ``t`` from ``state0``."""
    if t < 0:
        raise ValueError(f"free evolution needs t >= 0, got {t}")
    prop = CriticalPropagator.for_grid(state0.grid, linearized)
    logl = math.fsum(np.log1p(-_echo_overlap_loss(state0, prop, float(t))))
    return math.exp(logl), logl


def sz_values(state0: ModeAmplitudes, times, linearized: bool = False) -> np.ndarray:
    prop = CriticalPropagator.for_grid(state0.grid, linearized)
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise ValueError("free evolution needs t >= 0")
    out = []
    for chunk in _chunks(times):
        v, _ = prop.apply(state0.v, state0.u, chunk)
        out.append(1.0 - 4.0 / state0.grid.N * _row_fsum(np.abs(v) ** 2))
    return np.concatenate(out) if out else np.empty(0)


def log_echo_values(state0: ModeAmplitudes, times, linearized: bool = False) -> np.ndarray:
    prop = CriticalPropagator.for_grid(state0.grid, linearized)
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise ValueError("free evolution needs t >= 0")
    out = [_row_fsum(np.log1p(-_echo_overlap_loss(state0, prop, chunk)))
           for chunk in _chunks(times)]
    return np.concatenate(out) if out else np.empty(0)


def sz_series(state0: ModeAmplitudes, t_max: float, dt: float, t_start: float = 0.0,
              linearized: bool = False, **meta) -> TimeSeries:
    """S^z sampled at t_start, t_start + dt, ..., t_max."""
    t = sample_times(t_max, dt, t_start)
    return TimeSeries(SZ, t, sz_values(state0, t, linearized),
                      meta=_meta(state0, SZ, dt, **meta))


def echo_series(state0: ModeAmplitudes, t_max: float, dt: float, t_start: float = 0.0,
                linearized: bool = False, **meta) -> TimeSeries:
    """Loschmidt echo L(t) and log L(t) on a uniform grid."""
    t = sample_times(t_max, dt, t_start)
    logl = log_echo_values(state0, t, linearized)
    return TimeSeries(ECHO, t, np.exp(logl), logl, meta=_meta(state0, ECHO, dt, **meta))


def check_size(N: int, tau_Q: float, threshold: float = 20.0) -> bool:
    ok = N / math.sqrt(tau_Q) >= threshold
    if not ok:
        warnings.warn(f"N/sqrt(tau_Q) = {N / math.sqrt(tau_Q):.1f} < {threshold}: "
                      "finite-size effects are not negligible", stacklevel=2)
    return ok
