"""Orchestration of runs, m-sweeps and trajectory analyses, with their file outputs."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .budget import WindowBudget, build_defect_estimate, vanishing_terms
from .config import ExperimentPlan, RunConfig
from .excursions import write_excursion_csv
from .solver import LeraySolver
from .spectral import save_snapshot
from .trajectory import TrajectoryRecord

log = logging.getLogger(__name__)

__all__ = ["execute_run", "run_sweep", "analyze", "SweepResult"]


def execute_run(cfg: RunConfig, out: Path, stem: str = "trajectory", snapshot_times=()) -> TrajectoryRecord:
    """Integrate ``cfg`` and write ``<stem>.csv``, its sidecar and any snapshots."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    record, snaps = LeraySolver(cfg).run(snapshot_times)
    record.to_csv(out / f"{stem}.csv")
    for t, field in sorted(snaps.items()):
        save_snapshot(field, out / f"{stem}_t{t:.6f}.npz", time=t)
    return record


def _sweep_job(args):
    cfg, out, stem = args
    rec = execute_run(cfg, out, stem)
    return stem, rec


class SweepResult:
    def __init__(self, estimate, records, failures):
        self.estimate = estimate
        self.records = records
        self.failures = failures


def run_sweep(plan: ExperimentPlan, out, jobs: int | None = None) -> SweepResult:
    """Run every m of the plan, then write ``defect.json`` and ``excursions.csv``.

    Runs are independent and go to run-unique files ``traj_m<m>.csv``.  A run
    that fails or blows up inside the window is left out and the report is
    flagged partial.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    jobs = plan.jobs if jobs is None else jobs
    tasks = [(plan.base.model_copy(update={"m": m}), out, f"traj_m{m}") for m in plan.m_list]
    records, failures = {}, {}
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {m: pool.submit(_sweep_job, task) for m, task in zip(plan.m_list, tasks)}
            for m, fut in futures.items():
                try:
                    records[m] = fut.result()[1]
                except Exception as exc:  # reported per run, sweep continues
                    failures[m] = str(exc)
    else:
        for m, task in zip(plan.m_list, tasks):
            try:
                records[m] = _sweep_job(task)[1]
            except Exception as exc:
                failures[m] = str(exc)
    s, t = plan.resolved_window()
    usable = {}
    for m, rec in records.items():
        if rec.truncated and rec.times[-1] <= t:
            failures[m] = f"blow-up at t={rec.times[-1]:.6g}, inside the window"
        else:
            usable[m] = rec
    for m, msg in failures.items():
        log.warning("m=%s failed: %s", m, msg)
    if not usable:
        raise RuntimeError(f"every run of the sweep failed: {failures}")
    ms = [m for m in plan.m_list if m in usable]
    est = build_defect_estimate(
        [usable[m] for m in ms], plan.alpha_list, s, t, m_list=ms,
        s_zero=plan.s_zero, s_sequence_length=plan.s_sequence_length,
    )
    doc = est.to_dict()
    doc["partial"] = bool(failures) or est.partial
    doc["failures"] = {str(m): msg for m, msg in failures.items()}
    doc["tolerance"] = plan.tolerance
    doc["max_abs_defect"] = est.max_abs_defect()
    (out / "defect.json").write_text(json.dumps(doc, indent=2, default=_plain) + "\n")
    sets = []
    for m in ms:
        wb = WindowBudget(usable[m], s, t)
        sets.extend(wb.excursions(a) for a in plan.alpha_list)
    write_excursion_csv(sets, out / "excursions.csv")
    return SweepResult(est, usable, failures)


def _plain(obj):
    # numpy scalars and arrays leak out of the spline code
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def analyze(traj: TrajectoryRecord, alphas, window=None, out=None) -> dict:
    """Excursions, all defect formulations, measure bounds and vanishing terms of one trajectory."""
    s, t = (None, None) if window is None else window
    wb = WindowBudget(traj, s, t)
    alphas = sorted(float(a) for a in alphas)
    cells = []
    for a in alphas:
        exc = wb.excursions(a)
        cons = wb.consistency(a)
        cells.append({
            "alpha": a,
            "intervals": [[iv.s, iv.t, iv.clipped_left, iv.clipped_right] for iv in exc.intervals],
            "direct": wb.direct(a),
            "jump_sum": wb.jump_sum(a),
            "jump_sum_unscaled": wb.jump_sum_unscaled(a),
            "dissipation": wb.dissipation(a),
            "force_on_excursions": wb.force_on_excursions(a),
            "consistency": cons.tolist(),
            "weighted_residual": wb.weighted_residual(a),
            "corrections": wb.corrections(a),
            "measure_bounds": wb.measure_bounds(a),
        })
    report = {
        "window": {"s": wb.s, "t": wb.t},
        "nu": wb.nu,
        "relation_residual": wb.relation_residual(),
        "cells": cells,
        "vanishing_terms": vanishing_terms(traj, alphas, wb.s, wb.t),
    }
    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        write_excursion_csv([wb.excursions(a) for a in alphas], out / "excursions.csv")
        (out / "budget.json").write_text(json.dumps(report, indent=2, default=_plain) + "\n")
    return report
