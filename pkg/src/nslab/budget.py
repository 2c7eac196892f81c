"""Weighted energy budget and the defect formulations over excursion sets.

All window quantities read the sampled series through not-a-knot cubic
splines of ‖v‖², ρ and (f, v), and integrate with 6-point Gauss-Legendre on
every sub-interval between consecutive nodes (sample instants plus threshold
crossings).  Excursions are extracted on the same ρ spline, so the
weighted integrands are smooth on each sub-interval and interval endpoints are
exact crossings of the interpolant.

Notation: ``E = ‖v‖²``, ``fw = (f, v)``, ``c = 2/((1−α)π)``, ``τ* = tan(απ/2)``
and ``q* = τ*/(1+τ*²)``.  Signs follow the estimates: ``direct`` tracks +M,
``jump_sum``, ``dissipation`` and ``relation_residual`` track −M.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .excursions import ExcursionSet, extract_excursions, threshold_for
from .trajectory import TrajectoryRecord

__all__ = [
    "weight",
    "weight_derivative",
    "scale_factor",
    "ld_value",
    "WindowBudget",
    "weighted_energy_identity_residual",
    "defect_direct",
    "defect_jump_sum",
    "jump_sum_unscaled",
    "defect_dissipation",
    "relation_residual",
    "correction_terms",
    "measure_bounds",
    "vanishing_terms",
    "DefectCell",
    "DefectEstimate",
    "build_defect_estimate",
]

_GL_X, _GL_W = np.polynomial.legendre.leggauss(6)


def _check_alpha(alpha):
    a = np.asarray(alpha, dtype=float)
    if np.any(~((a > 0) & (a < 1))):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")


def weight(alpha, rho):
    """p(α, ρ): 1 up to tan(απ/2), then arctan(1/ρ)/((1−α)π/2).

    ``arctan(1/ρ)`` equals ``π/2 − arctan ρ`` for ρ > 0 without the cancellation.
    """
    _check_alpha(alpha)
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise ValueError("rho must be non-negative")
    thr = np.tan(np.asarray(alpha, dtype=float) * np.pi / 2)
    with np.errstate(divide="ignore", over="ignore"):
        upper = np.arctan(1.0 / rho) / ((1.0 - np.asarray(alpha, dtype=float)) * np.pi / 2)
    out = np.where(rho <= thr, 1.0, upper)
    return float(out) if out.ndim == 0 else out


def weight_derivative(alpha, rho, rho_dot):
    """d/dτ p(α, ρ(τ)) = −2ρ̇/((1−α)π(1+ρ²)) above the threshold, 0 below."""
    _check_alpha(alpha)
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise ValueError("rho must be non-negative")
    thr = np.tan(np.asarray(alpha, dtype=float) * np.pi / 2)
    val = -2.0 * np.asarray(rho_dot, dtype=float) / ((1.0 - alpha) * np.pi * (1.0 + rho**2))
    out = np.where(rho > thr, val, 0.0)
    return float(out) if out.ndim == 0 else out


def scale_factor(alpha: float) -> float:
    """c = 2/((1−α)π)."""
    _check_alpha(alpha)
    return 2.0 / ((1.0 - alpha) * math.pi)


def ld_value(alpha):
    """(1−α)·tan(απ/2), which tends to 2/π as α → 1⁻."""
    _check_alpha(alpha)
    a = np.asarray(alpha, dtype=float)
    out = (1.0 - a) * np.tan(a * np.pi / 2)
    return float(out) if out.ndim == 0 else out


class WindowBudget:
    """Spline representation of one trajectory restricted to a window (s, t).

    ``s`` and ``t`` must be sample instants.  Excursion sets are cached per α.
    """

    def __init__(self, traj: TrajectoryRecord, s: float | None = None, t: float | None = None):
        if len(traj) < 4:
            raise ValueError("need at least four samples for the spline budget")
        times = traj.times
        s = float(times[0]) if s is None else float(s)
        t = float(times[-1]) if t is None else float(t)
        if not s < t:
            raise ValueError(f"window requires s < t, got ({s}, {t})")
        i0, i1 = traj.index_of(s), traj.index_of(t)
        if traj.truncated and i1 == len(times) - 1:
            raise ValueError(f"trajectory truncated at t={times[-1]:.6g}; window ({s}, {t}) reaches it")
        for name in ("energy", "rho", "fwork"):
            if not np.all(np.isfinite(getattr(traj, name))):
                raise ValueError(f"non-finite {name} samples")
        self.traj = traj
        self.nu = traj.nu
        self.i0, self.i1 = i0, i1
        self.s, self.t = float(times[i0]), float(times[i1])
        self.times = times
        self.E = CubicSpline(times, traj.energy)
        self.rho = CubicSpline(times, traj.rho)
        self.drho = self.rho.derivative()
        self.fw = CubicSpline(times, traj.fwork)
        self._exc: dict[float, ExcursionSet] = {}

    # quadrature

    def integrate(self, func, a: float, b: float, extra_nodes=()) -> float:
        """∫_a^b func(τ) dτ, Gauss-Legendre on each sub-interval between nodes."""
        if b <= a:
            return 0.0
        times = self.times
        inner = times[(times > a) & (times < b)]
        nodes = np.unique(np.concatenate([[a, b], inner, [x for x in extra_nodes if a < x < b]]))
        lo, hi = nodes[:-1], nodes[1:]
        half = 0.5 * (hi - lo)
        pts = (0.5 * (hi + lo))[:, None] + half[:, None] * _GL_X[None, :]
        vals = func(pts)
        return float(np.sum(half * (vals @ _GL_W)))

    def _over_intervals(self, func, exc: ExcursionSet) -> float:
        return sum(self.integrate(func, iv.s, iv.t) for iv in exc.intervals)

    # excursions

    def excursions(self, alpha: float) -> ExcursionSet:
        if alpha not in self._exc:
            thr = threshold_for(alpha)
            self._exc[alpha] = extract_excursions(
                self.times, self.traj.rho, thr, (self.s, self.t), alpha=alpha, method="cubic"
            )
        return self._exc[alpha]

    def _crossings(self, alpha):
        return [x for iv in self.excursions(alpha).intervals for x in (iv.s, iv.t)]

    # formulations

    def weighted_residual(self, alpha: float) -> float:
        """p(t)E(t) − p(s)E(s) + 2ν∫pρ − 2∫p·fw + direct over the whole window."""
        nodes = self._crossings(alpha)

        def p(x):
            return weight(alpha, np.maximum(self.rho(x), 0.0))

        s, t = self.s, self.t
        dis = self.integrate(lambda x: p(x) * self.rho(x), s, t, nodes)
        frc = self.integrate(lambda x: p(x) * self.fw(x), s, t, nodes)
        e_s, e_t = self.traj.energy[self.i0], self.traj.energy[self.i1]
        p_s, p_t = weight(alpha, self.traj.rho[self.i0]), weight(alpha, self.traj.rho[self.i1])
        return p_t * e_t - p_s * e_s + 2.0 * self.nu * dis - 2.0 * frc + self.direct(alpha)

    def direct_unscaled(self, alpha: float) -> float:
        """∫_J E ρ̇/(1+ρ²)."""
        return self._over_intervals(
            lambda x: self.E(x) * self.drho(x) / (1.0 + self.rho(x) ** 2), self.excursions(alpha)
        )

    def direct(self, alpha: float) -> float:
        return scale_factor(alpha) * self.direct_unscaled(alpha)

    def jump_sum_unscaled(self, alpha: float, per_interval: bool = False):
        """Σ_h [E(t_h) − E(s_h)], or the list of per-interval jumps."""
        jumps = [float(self.E(iv.t) - self.E(iv.s)) for iv in self.excursions(alpha).intervals]
        return jumps if per_interval else float(sum(jumps))

    def jump_sum(self, alpha: float) -> float:
        thr = threshold_for(alpha)
        return scale_factor(alpha) * thr / (1.0 + thr * thr) * self.jump_sum_unscaled(alpha)

    def dissipation(self, alpha: float, per_interval: bool = False):
        """−2ν∫_J ρ."""
        vals = [-2.0 * self.nu * self.integrate(self.rho, iv.s, iv.t) for iv in self.excursions(alpha).intervals]
        return vals if per_interval else float(sum(vals))

    def force_on_excursions(self, alpha: float, per_interval: bool = False):
        """2∫_J (f, v)."""
        vals = [2.0 * self.integrate(self.fw, iv.s, iv.t) for iv in self.excursions(alpha).intervals]
        return vals if per_interval else float(sum(vals))

    def consistency(self, alpha: float) -> np.ndarray:
        """Per-interval E(t_h) − E(s_h) − (−2ν∫ρ + 2∫fw); zero by the energy relation."""
        j = np.array(self.jump_sum_unscaled(alpha, per_interval=True))
        d = np.array(self.dissipation(alpha, per_interval=True))
        f = np.array(self.force_on_excursions(alpha, per_interval=True))
        return j - d - f

    def relation_residual(self) -> float:
        """E(t) + 2ν∫ρ − E(s) − 2∫fw over the whole window."""
        e_s, e_t = self.traj.energy[self.i0], self.traj.energy[self.i1]
        dis = self.integrate(self.rho, self.s, self.t)
        frc = self.integrate(self.fw, self.s, self.t)
        return float(e_t + 2.0 * self.nu * dis - e_s - 2.0 * frc)

    def corrections(self, alpha: float) -> dict:
        """Scaled correction terms; −direct + second_order + force = jump_sum + rho2 + clip."""
        c = scale_factor(alpha)
        exc = self.excursions(alpha)
        rho, E, fw, drho = self.rho, self.E, self.fw, self.drho

        def r2(x):
            r = rho(x)
            return r * r / (1.0 + r * r)

        rho2 = c * 2.0 * self.nu * self._over_intervals(r2, exc)
        force = c * 2.0 * self._over_intervals(lambda x: rho(x) * fw(x) / (1.0 + rho(x) ** 2), exc)
        second = c * 2.0 * self._over_intervals(lambda x: E(x) * drho(x) / (1.0 + rho(x) ** 2) ** 2, exc)
        thr = threshold_for(alpha)
        qstar = thr / (1.0 + thr * thr)
        clip = 0.0
        for iv in exc.intervals:
            if iv.clipped_left or iv.clipped_right:
                ends = [E(x) * rho(x) / (1.0 + rho(x) ** 2) for x in (iv.s, iv.t)]
                clip += (ends[1] - ends[0]) - qstar * (E(iv.t) - E(iv.s))
        return {"rho2": float(rho2), "force": float(force), "second_order": float(second), "clip": float(c * clip)}

    def measure_bounds(self, alpha: float) -> dict:
        exc = self.excursions(alpha)
        thr = exc.threshold
        meas = exc.total_measure
        int_rho = self._over_intervals(self.rho, exc)
        e_s = float(self.traj.energy[self.i0])
        fint = self.integrate(self.fw, self.s, self.t)
        bound = (0.5 * e_s + fint) / self.nu
        lhs = meas * thr
        scale = max(1.0, abs(int_rho))
        first = lhs <= int_rho + 1e-12 * scale
        second = int_rho < bound or (meas == 0.0 and bound >= 0.0)
        return {
            "alpha": alpha,
            "threshold": thr,
            "measure": meas,
            "intervals": len(exc),
            "measure_times_threshold": lhs,
            "integral_rho_on_excursions": int_rho,
            "energy_bound": bound,
            "holds": bool(first and second),
            "strict": bool(lhs < bound),
            "normalized_measure": meas / (1.0 - alpha),
            "lmj_bound": (math.pi / 2) * bound,
            "lmj_bound_printed": (e_s / math.pi + 2.0 * fint / math.pi) / self.nu,
            "ld_value": ld_value(alpha),
        }


# functional interface

def weighted_energy_identity_residual(traj, alpha, s=None, t=None) -> float:
    return WindowBudget(traj, s, t).weighted_residual(alpha)


def defect_direct(traj, alpha, s=None, t=None) -> float:
    return WindowBudget(traj, s, t).direct(alpha)


def defect_jump_sum(traj, alpha, s=None, t=None) -> float:
    return WindowBudget(traj, s, t).jump_sum(alpha)


def jump_sum_unscaled(traj, alpha, s=None, t=None) -> float:
    return WindowBudget(traj, s, t).jump_sum_unscaled(alpha)


def defect_dissipation(traj, alpha, s=None, t=None) -> float:
    return WindowBudget(traj, s, t).dissipation(alpha)


def relation_residual(traj, s=None, t=None) -> float:
    return WindowBudget(traj, s, t).relation_residual()


def correction_terms(traj, alpha, s=None, t=None) -> dict:
    return WindowBudget(traj, s, t).corrections(alpha)


def measure_bounds(traj, alpha, s=None, t=None) -> dict:
    return WindowBudget(traj, s, t).measure_bounds(alpha)


def vanishing_terms(traj, alphas, s=None, t=None) -> dict:
    """Correction terms per α plus a flag for non-increasing magnitudes along α."""
    wb = WindowBudget(traj, s, t)
    alphas = sorted(float(a) for a in alphas)
    rows = [dict(alpha=a, **wb.corrections(a)) for a in alphas]
    trend = {}
    for key in ("rho2", "force", "second_order"):
        mags = [abs(r[key]) for r in rows]
        trend[key] = bool(all(b <= a * (1 + 1e-9) + 1e-15 for a, b in zip(mags, mags[1:])))
    return {"rows": rows, "decreasing": trend}


# aggregation over an (m, α) grid

@dataclass(frozen=True)
class DefectCell:
    m: object
    alpha: float
    direct: float
    jump_sum: float
    dissipation: float
    relation_residual: float
    measure: float
    corrections: dict
    intervals: int = 0
    weighted_residual: float = 0.0
    consistency: float = 0.0

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "alpha": self.alpha,
            "direct": self.direct,
            "jump_sum": self.jump_sum,
            "dissipation": self.dissipation,
            "relation_residual": self.relation_residual,
            "measure": self.measure,
            "corrections": dict(self.corrections),
            "intervals": self.intervals,
            "weighted_residual": self.weighted_residual,
            "consistency": self.consistency,
        }

    @property
    def formulations(self) -> tuple[float, float, float, float]:
        return (self.direct, self.jump_sum, self.dissipation, self.relation_residual)


@dataclass(frozen=True)
class DefectEstimate:
    s: float
    t: float
    cells: tuple[DefectCell, ...]
    m_list: tuple
    alphas: tuple[float, ...]
    trend: dict
    s_sequence: tuple[dict, ...] | None = None
    partial: bool = False
    notes: tuple[str, ...] = field(default=())

    def cell(self, m, alpha) -> DefectCell:
        for c in self.cells:
            if c.m == m and math.isclose(c.alpha, alpha):
                return c
        raise KeyError((m, alpha))

    def max_abs_defect(self) -> float:
        return max((abs(v) for c in self.cells for v in c.formulations), default=0.0)

    def to_dict(self) -> dict:
        out = {
            "window": {"s": self.s, "t": self.t},
            "m_list": list(self.m_list),
            "alphas": list(self.alphas),
            "cells": [c.to_dict() for c in self.cells],
            "trend": self.trend,
            "partial": self.partial,
            "conventions": {
                "direct": "+M estimate, 2/((1-a)pi) * int_J E rho'/(1+rho^2)",
                "jump_sum": "-M estimate, 2/((1-a)pi) * q * sum_h [E(t_h)-E(s_h)], q = tan/(1+tan^2)",
                "dissipation": "-M estimate, -2 nu int_J rho",
                "relation_residual": "-M estimate, E(t) + 2 nu int rho - E(s) - 2 int (f,v)",
                "identity": "-direct + second_order + force = jump_sum + rho2 + clip",
            },
        }
        if self.s_sequence is not None:
            out["s_sequence"] = list(self.s_sequence)
        if self.notes:
            out["notes"] = list(self.notes)
        return out

    def to_json(self, path=None, indent: int = 2) -> str:
        text = json.dumps(self.to_dict(), indent=indent)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text


def _cell(wb: WindowBudget, m, alpha) -> DefectCell:
    cons = wb.consistency(alpha)
    return DefectCell(
        m=m,
        alpha=alpha,
        direct=wb.direct(alpha),
        jump_sum=wb.jump_sum(alpha),
        dissipation=wb.dissipation(alpha),
        relation_residual=wb.relation_residual(),
        measure=wb.excursions(alpha).total_measure,
        corrections=wb.corrections(alpha),
        intervals=len(wb.excursions(alpha)),
        weighted_residual=wb.weighted_residual(alpha),
        consistency=float(np.abs(cons).max()) if len(cons) else 0.0,
    )


def _s_sequence(traj: TrajectoryRecord, t: float, length: int) -> list[float]:
    """Decreasing sample instants s_k ≈ t·2^{-k}, ending at the first positive sample."""
    times = traj.times
    pos = times[(times > 0) & (times < t)]
    if not len(pos):
        return []
    out = []
    for k in range(1, length + 1):
        target = t * 2.0**-k
        s = float(pos[np.argmin(np.abs(pos - target))])
        if not out or s < out[-1]:
            out.append(s)
    return out


def build_defect_estimate(
    trajs,
    alphas,
    s: float | None = None,
    t: float | None = None,
    m_list=None,
    s_zero: bool = False,
    s_sequence_length: int = 6,
) -> DefectEstimate:
    """All four defect formulations on the (m, α) grid for a family of runs.

    ``trajs`` is ordered by m; ``m_list`` defaults to each record's ``meta['m']``.
    The limsup over m is the maximum over the computed m values; the trend
    toward α → 1⁻ is the table at the largest m.  With ``s_zero`` the
    window starts at 0 and the relation residual and defects at the largest
    (m, α) are also tabulated along a decreasing sequence s_k → 0.
    """
    trajs = list(trajs)
    if not trajs:
        raise ValueError("empty m list")
    alphas = tuple(sorted(float(a) for a in alphas))
    if not alphas:
        raise ValueError("empty alpha list")
    for a in alphas:
        _check_alpha(a)
    m_list = tuple(m_list) if m_list is not None else tuple(tr.m for tr in trajs)
    if len(m_list) != len(trajs):
        raise ValueError("m_list and trajectories differ in length")
    if s_zero:
        s = 0.0
    ends = {(float(tr.times[0]), float(tr.times[-1])) for tr in trajs}
    s0 = float(trajs[0].times[0]) if s is None else float(s)
    t0 = float(trajs[0].times[-1]) if t is None else float(t)
    for lo, hi in ends:
        if not (lo <= s0 and t0 <= hi):
            raise ValueError(f"window ({s0}, {t0}) not covered by every trajectory")
    budgets = [WindowBudget(tr, s0, t0) for tr in trajs]
    cells = [_cell(wb, m, a) for wb, m in zip(budgets, m_list) for a in alphas]

    keys = ("direct", "jump_sum", "dissipation", "relation_residual")
    last = m_list[-1]
    at_last = [c for c in cells if c.m == last]
    limsup = []
    for a in alphas:
        group = [c for c in cells if math.isclose(c.alpha, a)]
        limsup.append({"alpha": a, **{k: max(getattr(c, k) for c in group) for k in keys}})
    trend = {
        "alpha_to_1": [
            {"alpha": c.alpha, "m": c.m, **{k: getattr(c, k) for k in keys}, "measure": c.measure}
            for c in at_last
        ],
        "limsup_over_m": limsup,
        "note": "finite-parameter trend; not an estimate of the limit",
    }
    seq = None
    if s_zero:
        wb_last = budgets[-1]
        rows = []
        for sk in _s_sequence(wb_last.traj, t0, s_sequence_length):
            wb = WindowBudget(wb_last.traj, sk, t0)
            a = alphas[-1]
            rows.append({
                "s": sk,
                "relation_residual": wb.relation_residual(),
                "direct": wb.direct(a),
                "jump_sum": wb.jump_sum(a),
                "dissipation": wb.dissipation(a),
            })
        seq = tuple(rows)
        if rows:
            trend["s_sequence_spread"] = {
                k: float(max(r[k] for r in rows) - min(r[k] for r in rows))
                for k in ("relation_residual", "direct", "jump_sum", "dissipation")
            }
    partial = any(tr.truncated for tr in trajs)
    return DefectEstimate(s0, t0, tuple(cells), m_list, alphas, trend, seq, partial)
