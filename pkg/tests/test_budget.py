import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nslab import presets
from nslab.budget import (
    WindowBudget,
    build_defect_estimate,
    correction_terms,
    defect_direct,
    defect_dissipation,
    defect_jump_sum,
    jump_sum_unscaled,
    ld_value,
    measure_bounds,
    relation_residual,
    scale_factor,
    vanishing_terms,
    weight,
    weight_derivative,
    weighted_energy_identity_residual,
)
from nslab.solver import run
from nslab.trajectory import TrajectoryRecord
from synthetic import bump_record, bump_rho

FINE = np.linspace(0.0, 1.0, 2001)


# weight and its derivative

def test_weight_examples():
    assert weight(0.5, 0.0) == 1.0
    assert weight(0.5, math.sqrt(3)) == pytest.approx(2 / 3, rel=1e-14)
    for a in (0.1, 0.5, 0.9, 0.999):
        assert weight(a, math.tan(a * math.pi / 2)) == 1.0


def test_weight_branch_continuity():
    for a in (0.2, 0.5, 0.9, 0.99):
        thr = math.tan(a * math.pi / 2)
        upper = (math.pi / 2 - math.atan(thr)) / ((1 - a) * math.pi / 2)
        assert abs(upper - 1.0) < 1e-12


def test_weight_errors():
    for bad in (0.0, 1.0, -0.5, 1.5):
        with pytest.raises(ValueError):
            weight(bad, 1.0)
    with pytest.raises(ValueError):
        weight(0.5, -1.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 0.999), st.lists(st.floats(0.0, 1e8), min_size=2, max_size=30))
def test_weight_invariants(alpha, rhos):
    rho = np.sort(np.array(rhos))
    p = weight(alpha, rho)
    assert np.all((p >= 0) & (p <= 1))
    assert np.all(np.diff(p) <= 1e-15)
    thr = math.tan(alpha * math.pi / 2)
    # p is continuous at the threshold, so compare only away from rounding of tan
    below, above = rho <= thr * (1 - 1e-12), rho >= thr * (1 + 1e-12)
    assert np.all(p[below] == 1.0)
    assert np.all(p[above] < 1.0)
    assert weight(alpha, 1e300) < 1e-200


def test_weight_derivative_examples():
    assert weight_derivative(0.5, 0.5, 1.0) == 0.0
    assert weight_derivative(0.5, math.sqrt(3), 1.0) == pytest.approx(-1 / math.pi, rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.1, 3.0))
def test_weight_derivative_chain_rule(alpha, slope):
    # ρ(τ) = thr + 1 + slope·τ stays above the threshold near τ = 0
    thr = math.tan(alpha * math.pi / 2)
    h = 1e-6

    def p_of(tau):
        return weight(alpha, thr + 1 + slope * tau)

    fd = (p_of(h) - p_of(-h)) / (2 * h)
    assert weight_derivative(alpha, thr + 1, slope) == pytest.approx(fd, rel=1e-6, abs=1e-9)


def test_ld_value():
    assert abs(ld_value(0.999) - 2 / math.pi) <= 1e-3
    for a in (0.99, 0.995, 0.999):
        assert abs(ld_value(a) - 2 / math.pi) <= 2e-3
    assert scale_factor(0.5) == pytest.approx(4 / math.pi)


# weighted identity and defect formulations

def test_weighted_identity_manufactured():
    rec = bump_record(FINE)
    for a in (0.5, 0.8, 0.9):
        assert abs(weighted_energy_identity_residual(rec, a)) <= 1e-8


def test_weighted_identity_with_forcing_and_viscosity():
    rec = bump_record(FINE, nu=0.3, f0=0.7)
    for a in (0.5, 0.8):
        assert abs(weighted_energy_identity_residual(rec, a)) <= 1e-8


def test_weighted_identity_reduces_to_relation_when_no_excursion():
    rec = bump_record(FINE, amp=0.2)
    a = 0.9
    assert len(WindowBudget(rec).excursions(a)) == 0
    assert weighted_energy_identity_residual(rec, a) == pytest.approx(relation_residual(rec), abs=1e-15)


def zero_record(n=11):
    t = np.linspace(0, 1, n)
    return TrajectoryRecord.synthetic(t, 0 * t, 0 * t)


def test_zero_solution():
    rec = zero_record()
    assert weighted_energy_identity_residual(rec, 0.5) == 0.0
    assert relation_residual(rec) == 0.0
    assert defect_direct(rec, 0.5) == 0.0
    assert defect_jump_sum(rec, 0.5) == 0.0
    assert defect_dissipation(rec, 0.5) == 0.0


def test_direct_constant_energy_symmetric_bump():
    rho = bump_rho(FINE, 0.5, 10.0, 0.5, 0.08)
    rec = TrajectoryRecord.synthetic(FINE, np.full_like(FINE, 3.0), rho)
    wb = WindowBudget(rec)
    assert len(wb.excursions(0.6)) == 1
    assert abs(wb.direct(0.6)) < 1e-9
    assert abs(wb.jump_sum(0.6)) < 1e-12


def test_direct_matches_weight_derivative_route():
    rec = bump_record(FINE)
    wb = WindowBudget(rec)
    a = 0.7
    nodes = [x for iv in wb.excursions(a).intervals for x in (iv.s, iv.t)]

    def integrand(x):
        return wb.E(x) * (-(1 - a) * math.pi / 2) * weight_derivative(a, wb.rho(x), wb.drho(x))

    via_p = wb.integrate(integrand, wb.s, wb.t, nodes)
    assert via_p == pytest.approx(wb.direct_unscaled(a), abs=1e-8)


def test_jump_sum_matches_direct_through_corrections():
    rec = bump_record(FINE, f0=0.4)
    for a in (0.5, 0.8):
        c = correction_terms(rec, a)
        lhs = -defect_direct(rec, a) + c["second_order"] + c["force"]
        rhs = defect_jump_sum(rec, a) + c["rho2"] + c["clip"]
        assert lhs == pytest.approx(rhs, abs=1e-6)
        assert c["clip"] == 0.0


def test_identity_with_clipped_intervals():
    rec = bump_record(FINE, center=0.0, width=0.2)
    a = 0.8
    wb = WindowBudget(rec)
    assert wb.excursions(a).intervals[0].clipped_left
    c = wb.corrections(a)
    assert c["clip"] != 0.0
    assert -wb.direct(a) + c["second_order"] + c["force"] == pytest.approx(wb.jump_sum(a) + c["rho2"] + c["clip"], abs=1e-6)
    assert abs(wb.weighted_residual(a)) < 1e-8


def test_jump_sum_equals_dissipation_without_force():
    rec = bump_record(FINE)
    for a in (0.5, 0.9):
        assert jump_sum_unscaled(rec, a) == pytest.approx(defect_dissipation(rec, a), abs=1e-8)


def test_dissipation_rectangle():
    t = np.linspace(0, 1, 11)
    rec = TrajectoryRecord.synthetic(t, np.ones_like(t), np.full_like(t, 5.0))
    assert defect_dissipation(rec, 0.5) == pytest.approx(-10.0, rel=1e-14)


def test_consistency_per_interval(forced_traj):
    wb = WindowBudget(forced_traj)
    for a in (0.5, 0.9):
        cons = wb.consistency(a)
        assert len(cons) >= 1
        assert np.all(np.abs(cons) <= 1e-8)


def test_relation_residual_injected_jump():
    delta, t_star = 0.3, 0.4
    t = FINE
    rec0 = bump_record(t, f0=0.2)
    energy = rec0.energy - np.where(t > t_star, delta, 0.0)
    rec = TrajectoryRecord.synthetic(t, energy, rec0.rho, fwork=rec0.fwork)
    assert relation_residual(rec) == pytest.approx(-delta, abs=1e-10)


def test_relation_residual_refines(forced_traj):
    assert abs(relation_residual(forced_traj)) < 1e-8


def test_window_errors():
    rec = bump_record(FINE)
    with pytest.raises(ValueError):
        WindowBudget(rec, 0.1234, 0.5)
    with pytest.raises(ValueError):
        WindowBudget(rec, 0.5, 0.2)
    with pytest.raises(ValueError):
        WindowBudget(rec, 0.0, 2.0)
    trunc = TrajectoryRecord(
        rec.times, rec.energy, rec.rho, rec.fwork, rec.pdelta, rec.vt, truncated=True
    )
    with pytest.raises(ValueError, match="truncated"):
        WindowBudget(trunc)
    WindowBudget(trunc, 0.0, 0.5)


# measure bounds and vanishing terms

def test_measure_bounds_no_excursion():
    rep = measure_bounds(bump_record(FINE, amp=0.1), 0.9)
    assert rep["measure"] == 0.0 and rep["holds"] and rep["strict"]


def test_measure_bounds_hold_on_runs(forced_traj, random_traj, tg_traj):
    for traj in (forced_traj, random_traj, tg_traj):
        for a in (0.5, 0.9, 0.99):
            rep = measure_bounds(traj, a)
            assert rep["holds"] and rep["strict"]
            assert rep["lmj_bound"] == pytest.approx(math.pi / 2 * rep["energy_bound"])


def manufactured_family(alpha, n=4001):
    """ρ peaks at 2·tan(απ/2) with width ∝ (1−α)², on a grid refined around the peak."""
    thr = math.tan(alpha * math.pi / 2)
    w = 0.5 * (1 - alpha) ** 2
    t = np.unique(np.concatenate([np.linspace(0, 1, 801), 0.5 + w * np.linspace(-6, 6, n)]))
    return bump_record(t, base=0.2, amp=2 * thr - 0.2, center=0.5, width=w, e0=5.0, f0=0.5)


def test_vanishing_terms_synthetic_family():
    alphas = (0.9, 0.95, 0.99)
    mags = {k: [] for k in ("rho2", "force", "second_order")}
    for a in alphas:
        rows = vanishing_terms(manufactured_family(a), [a])["rows"]
        for k in mags:
            mags[k].append(abs(rows[0][k]))
    for k, vals in mags.items():
        assert vals[-1] < vals[0] / 5, (k, vals)


def test_vanishing_terms_trivial_cases():
    rec = bump_record(FINE)
    rep = vanishing_terms(rec, [0.5, 0.9])
    assert all(r["force"] == 0.0 for r in rep["rows"])
    rep = vanishing_terms(bump_record(FINE, amp=0.1), [0.9])
    assert all(rep["rows"][0][k] == 0.0 for k in ("rho2", "force", "second_order"))


# defect estimate assembly

def test_single_cell_estimate():
    rec = bump_record(FINE)
    est = build_defect_estimate([rec], [0.8], m_list=[None])
    assert len(est.cells) == 1
    cell = est.cells[0]
    assert cell.direct == pytest.approx(defect_direct(rec, 0.8))
    assert cell.measure >= 0
    doc = json.loads(est.to_json())
    assert set(doc["window"]) == {"s", "t"}
    keys = {"m", "alpha", "direct", "jump_sum", "dissipation", "relation_residual", "measure", "corrections"}
    assert keys <= set(doc["cells"][0])
    assert {"rho2", "force", "second_order"} <= set(doc["cells"][0]["corrections"])
    assert "alpha_to_1" in doc["trend"]


def test_taylor_green_family_defects():
    # amplitude 0.3 keeps ρ below the α=0.9 threshold from the start of the window
    trajs = [run(presets.taylor_green_config(n=32, t_end=0.5, amplitude=0.3, m=m)) for m in (4, 8)]
    est = build_defect_estimate(trajs, [0.9, 0.99], m_list=[4, 8])
    assert len(est.cells) == 4
    assert est.max_abs_defect() <= 1e-6
    assert all(c.m in (4, 8) for c in est.cells)
    assert len({(est.s, est.t)}) == 1


def test_s_zero_sequence(random_traj):
    est = build_defect_estimate([random_traj], [0.9], s_zero=True)
    seq = est.s_sequence
    assert len(seq) >= 4
    assert all(b["s"] < a["s"] for a, b in zip(seq, seq[1:]))
    spread = est.trend["s_sequence_spread"]
    assert all(v <= 1e-6 for v in spread.values())


def test_estimate_errors(random_traj):
    with pytest.raises(ValueError):
        build_defect_estimate([], [0.9])
    short = TrajectoryRecord.synthetic(FINE[:1001], random_traj.energy[:1001], random_traj.rho[:1001])
    with pytest.raises(ValueError):
        build_defect_estimate([random_traj, short], [0.9], s=0.0, t=1.0, m_list=[1, 2])
