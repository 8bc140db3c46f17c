"""Peak extraction from sampled series and log-log scaling fits."""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
from scipy import signal

from . import approximations as approx
from .driven import DEFAULT_G_START, DEFAULT_TOL, QuenchProtocol, drive_to_critical
from .lattice import build_grid
from .observables import (TimeSeries, check_size, default_dt, echo_series,
                          ground_state_probability, sz_series, transverse_magnetization)

MIN, MAX = "min", "max"
SCAN_COLUMNS = ("tau_Q", "N", "p_gs", "sz0_minus_2pi", "A", "W", "Wtilde")
OBSERVABLES = ("pgs", "sz0", "peak-amplitude", "peak-width", "echo-width")


@dataclass
class Peak:
    n: int
    center: float
    amplitude: float
    fwhm: float
    polarity: str
    low_resolution: bool = False


@dataclass
class FitResult:
    slope: float
    intercept: float
    slope_se: float
    intercept_se: float
    n_points: int
    window: tuple[float, float]

    def to_json(self) -> str:
        keys = ("slope", "intercept", "slope_se", "intercept_se", "n_points")
        return json.dumps({key: getattr(self, key) for key in keys})

    def predict(self, x):
        return self.intercept + self.slope * np.asarray(x)


# ---------------------------------------------------------------- fits

def linear_fit(x, y) -> FitResult:
    """Unweighted least squares y = intercept + slope x with one-sigma errors."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size or x.size < 3:
        raise ValueError("need at least 3 (x, y) pairs")
    X = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    dof = x.size - 2
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(X.T @ X)
    return FitResult(slope=float(coef[1]), intercept=float(coef[0]),
                     slope_se=float(math.sqrt(cov[1, 1])), intercept_se=float(math.sqrt(cov[0, 0])),
                     n_points=int(x.size), window=(float(x.min()), float(x.max())))


def loglog_fit(points) -> FitResult:
    """Fit ln y = intercept + slope ln x; ``window`` reports the range of x."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be a sequence of (x, y) pairs")
    if np.any(pts <= 0):
        raise ValueError("log-log fit needs strictly positive x and y")
    fit = linear_fit(np.log(pts[:, 0]), np.log(pts[:, 1]))
    fit.window = (float(pts[:, 0].min()), float(pts[:, 0].max()))
    return fit


# ---------------------------------------------------------------- peaks

def _quadratic_vertex(t, y, i):
    if i == 0 or i == y.size - 1:
        return t[i], y[i]
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    den = y0 - 2 * y1 + y2
    if den == 0:
        return t[i], y[i]
    off = 0.5 * (y0 - y2) / den
    dt = t[i + 1] - t[i]
    return t[i] + off * dt, y1 - 0.25 * (y0 - y2) * off


def _crossing(t, d, i, half, step):
    """Walk from index i in direction ``step`` until |d| drops below ``half``."""
    j = i
    while 0 <= j + step < d.size and d[j + step] >= half:
        j += step
    if not 0 <= j + step < d.size:
        return None, abs(j - i)
    k = j + step
    frac = (d[j] - half) / (d[j] - d[k])
    return t[j] + frac * (t[k] - t[j]), abs(j - i) + 1


def _measure(t, y, i, baseline, polarity):
    sign = 1.0 if polarity == MAX else -1.0
    d = sign * (y - baseline)
    center, top = _quadratic_vertex(t, d, i)
    amp = top
    half = 0.5 * amp
    left, nl = _crossing(t, d, i, half, -1)
    right, nr = _crossing(t, d, i, half, +1)
    if left is None or right is None:
        return center, amp, math.nan, True
    return center, amp, right - left, (nl + nr) < 5


def find_peaks(series: TimeSeries, t_min: float | None = None, baseline: float | None = None,
               polarities=(MIN, MAX), rel_height: float = 0.3,
               separation: float = 4.0) -> list[Peak]:
    """Locate the prominent extrema of a sampled series and measure each one.

    Both minima and maxima count as peaks. Amplitudes and full widths at half
    maximum are measured from ``baseline``; when it is None the baseline is the
    median of the samples away from the detected peaks. Candidates weaker than
    ``rel_height`` times the strongest deviation are dropped, as are those within
    ``separation`` widths of a stronger peak.
    """
    if t_min is None:
        t_min = series.meta.get("N", 0) / 8.0
    sel = series.t >= t_min
    t, y = series.t[sel], series.values[sel]
    if t.size < 3:
        warnings.warn("series too short for peak detection", stacklevel=2)
        return []
    fixed = baseline is not None
    base = float(baseline) if fixed else float(np.median(y))
    peaks: list[Peak] = []
    for _ in range(3):
        peaks = _detect(t, y, base, polarities, rel_height, separation)
        if fixed or not peaks:
            break
        keep = np.ones(t.size, dtype=bool)
        for p in peaks:
            w = p.fwhm if math.isfinite(p.fwhm) else 0.0
            keep &= np.abs(t - p.center) > 3.0 * w
        if not keep.any():
            break
        new = float(np.median(y[keep]))
        if new == base:
            break
        base = new
    if not peaks:
        warnings.warn("no extrema found", stacklevel=2)
    return peaks


def _detect(t, y, base, polarities, rel_height, separation):
    d = y - base
    scale = float(np.max(np.abs(d)))
    if scale == 0.0:
        return []
    cands = []
    for pol in polarities:
        sign = 1.0 if pol == MAX else -1.0
        idx, _ = signal.find_peaks(sign * d, height=rel_height * scale)
        cands += [(abs(d[i]), int(i), pol) for i in idx]
    cands.sort(key=lambda c: (-c[0], c[1]))
    accepted = []
    for _, i, pol in cands:
        center, amp, fwhm, low = _measure(t, y, i, base, pol)
        if not math.isfinite(fwhm):
            continue
        if any(abs(center - q[0]) < separation * max(fwhm, q[2]) for q in accepted):
            continue
        accepted.append((float(center), float(amp), float(fwhm), pol, bool(low)))
    accepted.sort()
    return [Peak(n=j + 1, center=c, amplitude=a, fwhm=w, polarity=p, low_resolution=low)
            for j, (c, a, w, p, low) in enumerate(accepted)]


def spacing_fit(peaks: list[Peak]) -> FitResult:
    """Linear fit of peak center against peak number."""
    return linear_fit([p.n for p in peaks], [p.center for p in peaks])


# ---------------------------------------------------------------- scans

@lru_cache(maxsize=32)
def critical_state(N: int, tau_Q: float, g_start: float = DEFAULT_G_START,
                   tol: float = DEFAULT_TOL):
    """Arrival state for (N, tau_Q), cached because the ramp dominates the cost."""
    return drive_to_critical(QuenchProtocol(tau_Q, g_start), build_grid(N), tol)


def first_sz_peak(state, tau_Q: float, dt: float | None = None) -> Peak:
    N = state.grid.N
    if dt is None:
        dt = min(default_dt(tau_Q), float(approx.peak_fwhm(tau_Q)) / 20.0)
    ser = sz_series(state, 3.0 * N / 8.0, dt, t_start=N / 8.0, tau_Q=tau_Q)
    peaks = find_peaks(ser, t_min=N / 8.0)
    if not peaks:
        raise RuntimeError(f"no magnetization peak found for N={N}, tau_Q={tau_Q}")
    return peaks[0]


def first_echo_peak(state, tau_Q: float, dt: float | None = None) -> Peak:
    N = state.grid.N
    if dt is None:
        dt = min(default_dt(tau_Q), approx.echo_fwhm(N, tau_Q) / 20.0)
    ser = echo_series(state, 5.0 * N / 8.0, dt, t_start=3.0 * N / 8.0, tau_Q=tau_Q)
    peaks = find_peaks(ser, t_min=3.0 * N / 8.0, polarities=(MAX,))
    if not peaks:
        raise RuntimeError(f"no echo revival found for N={N}, tau_Q={tau_Q}")
    return peaks[0]


def scan_cell(N: int, tau_Q: float, observables=OBSERVABLES, g_start: float = DEFAULT_G_START,
              tol: float = DEFAULT_TOL) -> dict:
    check_size(N, tau_Q)
    state = critical_state(int(N), float(tau_Q), float(g_start), float(tol))
    row = dict.fromkeys(SCAN_COLUMNS, math.nan)
    row.update(tau_Q=float(tau_Q), N=int(N))
    obs = set(observables)
    if "pgs" in obs:
        row["p_gs"] = ground_state_probability(state)
    if "sz0" in obs:
        row["sz0_minus_2pi"] = transverse_magnetization(state) - 2.0 / math.pi
    if obs & {"peak-amplitude", "peak-width"}:
        p = first_sz_peak(state, tau_Q)
        row["A"], row["W"] = p.amplitude, p.fwhm
    if "echo-width" in obs:
        row["Wtilde"] = first_echo_peak(state, tau_Q).fwhm
    return row


def scan_tau_q(N: int, tau_list, observables=OBSERVABLES, **kw) -> list[dict]:
    return [scan_cell(N, tq, observables, **kw) for tq in tau_list]


def scan_system_size(tau_Q: float, N_list, observables=("echo-width",), **kw) -> list[dict]:
    return [scan_cell(n, tau_Q, observables, **kw) for n in N_list]


def fit_column(rows, x: str, y: str) -> FitResult:
    return loglog_fit([(r[x], r[y]) for r in rows])


def table_to_csv(rows, path) -> None:
    lines = [",".join(SCAN_COLUMNS)]
    for r in rows:
        lines.append(",".join(str(r["N"]) if c == "N" else repr(float(r[c]))
                              for c in SCAN_COLUMNS))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def peaks_as_dicts(peaks):
    return [asdict(p) for p in peaks]
