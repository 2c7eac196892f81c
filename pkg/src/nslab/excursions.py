"""Excursion sets {τ : ρ(τ) > threshold} of a sampled series.

The sampled series is read through an interpolant, linear by default or a
not-a-knot cubic spline with ``method="cubic"``.  Each maximal open interval
on which the interpolant exceeds the threshold becomes one
:class:`Interval`.  Its ends are threshold crossings of the interpolant, or
window endpoints flagged as clipped.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

__all__ = [
    "Interval",
    "ExcursionSet",
    "LimsupSet",
    "threshold_for",
    "extract_excursions",
    "measure",
    "limsup_excursions",
    "indicator",
    "write_excursion_csv",
]

EPS_CROSS = 1e-9


def threshold_for(alpha: float) -> float:
    """tan(α π/2), the excursion level attached to α ∈ (0, 1)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return math.tan(alpha * math.pi / 2.0)


@dataclass(frozen=True)
class Interval:
    s: float
    t: float
    clipped_left: bool = False
    clipped_right: bool = False

    @property
    def length(self) -> float:
        return self.t - self.s


@dataclass(frozen=True)
class ExcursionSet:
    threshold: float
    window: tuple[float, float]
    intervals: tuple[Interval, ...] = ()
    alpha: float | None = None
    method: str = "linear"

    @property
    def total_measure(self) -> float:
        return float(sum(iv.length for iv in self.intervals))

    def __len__(self) -> int:
        return len(self.intervals)

    def contains(self, tau) -> np.ndarray:
        """Membership of each point of ``tau`` in the (open) union of intervals."""
        tau = np.asarray(tau, dtype=float)
        out = np.zeros(tau.shape, dtype=bool)
        for iv in self.intervals:
            out |= (tau > iv.s) & (tau < iv.t)
        return out


def measure(exc: ExcursionSet) -> float:
    return exc.total_measure


def _validate(times, rho, window):
    times = np.asarray(times, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if times.ndim != 1 or times.shape != rho.shape:
        raise ValueError("times and rho must be 1-d arrays of equal length")
    if len(times) < 2:
        raise ValueError("need at least two samples")
    if np.any(np.diff(times) <= 0):
        raise ValueError("time axis must be strictly increasing")
    s, t = (times[0], times[-1]) if window is None else (float(window[0]), float(window[1]))
    tol = 1e-12 * max(1.0, abs(times[-1]))
    if not (times[0] - tol <= s < t <= times[-1] + tol):
        raise ValueError(f"window ({s}, {t}) outside the series [{times[0]}, {times[-1]}]")
    lo, hi = np.searchsorted(times, [s - tol, t + tol])
    if np.any(~np.isfinite(rho[max(lo - 1, 0):hi + 1])):
        raise ValueError("non-finite samples inside the analysis window")
    return times, rho, max(s, times[0]), min(t, times[-1])


def extract_excursions(
    times,
    rho,
    threshold: float,
    window=None,
    *,
    alpha: float | None = None,
    method: str = "linear",
    eps_cross: float = EPS_CROSS,
) -> ExcursionSet:
    """Maximal open intervals inside ``window`` where interpolated ρ exceeds ``threshold``.

    Grazing contacts, where the interpolant rises above the threshold by no
    more than ``eps_cross·(1 + threshold)``, produce no interval.
    """
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    times, rho, s, t = _validate(times, rho, window)
    if method == "linear":
        ivs = _linear_intervals(times, rho, threshold, s, t, eps_cross)
    elif method == "cubic":
        ivs = _cubic_intervals(CubicSpline(times, rho), threshold, s, t, eps_cross)
    else:
        raise ValueError(f"unknown method {method!r}")
    return ExcursionSet(threshold, (s, t), tuple(ivs), alpha, method)


def _linear_intervals(times, rho, thr, s, t, eps):
    inside = (times > s) & (times < t)
    nodes = np.concatenate([[s], times[inside], [t]])
    vals = np.interp(nodes, times, rho)
    above = vals > thr
    ivs = []
    i, n = 0, len(nodes)
    while i < n:
        if not above[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and above[j + 1]:
            j += 1
        if vals[i:j + 1].max() > thr + eps * (1.0 + thr):
            left = s if i == 0 else _cross(nodes[i - 1], nodes[i], vals[i - 1], vals[i], thr)
            right = t if j == n - 1 else _cross(nodes[j], nodes[j + 1], vals[j], vals[j + 1], thr)
            ivs.append(Interval(left, right, i == 0, j == n - 1))
        i = j + 1
    return ivs


def _cross(t0, t1, y0, y1, thr):
    return t0 + (thr - y0) / (y1 - y0) * (t1 - t0)


def _cubic_intervals(spline: CubicSpline, thr, s, t, eps):
    roots = np.asarray(spline.solve(thr, extrapolate=False), dtype=float)
    roots = np.unique(roots[(roots > s) & (roots < t) & np.isfinite(roots)])
    d = spline.derivative()
    polished = []
    for r in roots:
        for _ in range(3):
            slope = d(r)
            if slope == 0:
                break
            r = float(np.clip(r - (spline(r) - thr) / slope, s, t))
        polished.append(r)
    cuts = np.unique(np.concatenate([[s], polished, [t]]))
    ivs = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b <= a:
            continue
        probe = np.linspace(a, b, 7)[1:-1]
        peak = float(np.max(spline(probe)))
        if spline(0.5 * (a + b)) <= thr or peak <= thr + eps * (1.0 + thr):
            continue
        if ivs and ivs[-1].t == a:
            prev = ivs.pop()
            ivs.append(Interval(prev.s, b, prev.clipped_left, b == t))
        else:
            ivs.append(Interval(a, b, a == s, b == t))
    return ivs


def indicator(exc: ExcursionSet, times) -> np.ndarray:
    return exc.contains(times)


@dataclass(frozen=True)
class LimsupSet:
    """Finite-family surrogate of limsup_m J^m(α) on a sample grid."""

    times: np.ndarray
    indicator: np.ndarray
    intervals: tuple[tuple[float, float], ...]
    measure: float
    tail: int
    bound: float | None = None
    bound_holds: bool | None = None
    counts: tuple[int, ...] = field(default=())


def _union(intervals):
    merged = []
    for a, b in sorted(intervals):
        if merged and a <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], b))
        else:
            merged.append((a, b))
    return merged


def limsup_excursions(sets, times, rho_series=None, tail: int | None = None) -> LimsupSet:
    """Points lying in the excursion sets along every tail of the m-ordered list.

    ``∩_{j ≤ K−L} ∪_{i ≥ j} J_i`` with tail length ``L`` (default ⌈K/2⌉).  The
    tail unions are nested, so this is the union of the last ``L`` sets.  With
    ``rho_series`` (one sampled ρ per set), the bound |J̃| ≤ ‖ρ̄‖₁/threshold is
    evaluated for ρ̄ the pointwise max over the tail.
    """
    sets = list(sets)
    if not sets:
        raise ValueError("need at least one excursion set")
    thr, win = sets[0].threshold, sets[0].window
    for e in sets[1:]:
        if not math.isclose(e.threshold, thr, rel_tol=1e-12) or not np.allclose(e.window, win):
            raise ValueError("excursion sets must share alpha and window")
    k = len(sets)
    tail = max(1, math.ceil(k / 2)) if tail is None else tail
    if not 1 <= tail <= k:
        raise ValueError(f"tail must lie in [1, {k}]")
    times = np.asarray(times, dtype=float)
    tail_sets = sets[k - tail:]
    ind = np.zeros(times.shape, dtype=bool)
    for e in tail_sets:
        ind |= e.contains(times)
    union = _union([(iv.s, iv.t) for e in tail_sets for iv in e.intervals])
    meas = float(sum(b - a for a, b in union))
    bound = holds = None
    if rho_series is not None:
        rho_series = [np.asarray(r, dtype=float) for r in rho_series]
        if len(rho_series) != k:
            raise ValueError("need one rho series per set")
        rho_bar = np.max(np.stack(rho_series[k - tail:]), axis=0)
        sel = (times >= win[0]) & (times <= win[1])
        bound = float(np.trapezoid(rho_bar[sel], times[sel])) / thr
        # the trapezoid rule for ‖ρ̄‖₁ carries O(h²) error; allow a matching slack
        h = float(np.max(np.diff(times[sel]))) if sel.sum() > 1 else 0.0
        holds = meas <= bound * (1.0 + 1e-6) + h * h
    return LimsupSet(
        times, ind, tuple(union), meas, tail, bound, holds, tuple(len(e) for e in sets)
    )


def write_excursion_csv(sets, path) -> Path:
    """Excursion dump with columns ``alpha,s_h,t_h,clipped_left,clipped_right``."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha", "s_h", "t_h", "clipped_left", "clipped_right"])
        for e in sets:
            a = "" if e.alpha is None else repr(float(e.alpha))
            for iv in e.intervals:
                w.writerow([a, repr(float(iv.s)), repr(float(iv.t)), int(iv.clipped_left), int(iv.clipped_right)])
    return path
