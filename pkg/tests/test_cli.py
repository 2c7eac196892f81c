import json
import math

import numpy as np
import pytest

from nslab.cli import main
from nslab.trajectory import TrajectoryRecord

TG = "grid: {dim: 2, n: 16}\nt_end: 0.05\ndt: 0.001\nic: {kind: taylor-green}\n"


def write(path, text):
    path.write_text(text)
    return str(path)


def test_run_taylor_green(tmp_path):
    cfg = write(tmp_path / "tg.yaml", TG)
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    rec = TrajectoryRecord.from_csv(tmp_path / "o" / "tg.csv")
    assert len(rec) == 51
    assert np.all(np.diff(rec.energy) < 0)


def test_run_is_byte_deterministic(tmp_path):
    cfg = write(tmp_path / "r.yaml", "grid: {dim: 2, n: 16}\nt_end: 0.02\ndt: 0.001\nic: {kind: random-divfree}\n")
    for name in ("a", "b"):
        assert main(["run", "--config", cfg, "--out", str(tmp_path / name), "--seed", "3"]) == 0
    assert (tmp_path / "a" / "r.csv").read_bytes() == (tmp_path / "b" / "r.csv").read_bytes()


def test_run_missing_dt(tmp_path, capsys):
    cfg = write(tmp_path / "bad.yaml", "grid: {dim: 2, n: 16}\nt_end: 0.05\n")
    assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == 1
    assert "dt" in capsys.readouterr().err


def test_run_zero(tmp_path):
    cfg = write(tmp_path / "z.yaml", "grid: {dim: 2, n: 16}\nt_end: 0.01\ndt: 0.001\nic: {kind: zero}\n")
    assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == 0
    rec = TrajectoryRecord.from_csv(tmp_path / "z.csv")
    assert not np.any(np.stack([rec.energy, rec.rho, rec.fwork, rec.pdelta, rec.vt]))


def test_run_blow_up_exit_code(tmp_path, capsys):
    cfg = write(
        tmp_path / "b.yaml",
        "grid: {dim: 2, n: 16}\nt_end: 20.0\ndt: 1.0\nnu: 0.001\n"
        "ic: {kind: random-divfree, energy: 1.0e+6, kmax: 6.0}\n",
    )
    assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == 2
    assert "truncated at t=" in capsys.readouterr().err


def test_run_snapshots(tmp_path):
    cfg = write(tmp_path / "tg.yaml", TG)
    assert main(["run", "--config", cfg, "--out", str(tmp_path), "--snapshot", "0.01,0.02"]) == 0
    assert len(list(tmp_path.glob("tg_t*.npz"))) == 2


def test_env_out(tmp_path, monkeypatch):
    monkeypatch.setenv("NSLAB_OUT", str(tmp_path / "env"))
    cfg = write(tmp_path / "tg.yaml", TG)
    assert main(["run", "--config", cfg]) == 0
    assert (tmp_path / "env" / "tg.csv").exists()


def test_round_trip_run_to_analyze(tmp_path):
    cfg = write(tmp_path / "tg.yaml", TG)
    assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == 0
    out = tmp_path / "an"
    assert main(["analyze", str(tmp_path / "tg.csv"), "--alpha", "0.5,0.9", "--window", "0.01,0.04", "--out", str(out)]) == 0
    rep = json.loads((out / "budget.json").read_text())
    assert rep["window"] == {"s": 0.01, "t": 0.04}
    assert len(rep["cells"]) == 2


def test_analyze_sin_squared(tmp_path):
    t = np.linspace(0, math.pi, 2001)
    rho = np.sin(t) ** 2
    rec = TrajectoryRecord.synthetic(t, 2.0 - 0.01 * t, rho)
    rec.to_csv(tmp_path / "s.csv")
    (tmp_path / "s.meta.json").unlink()
    assert main(["analyze", str(tmp_path / "s.csv"), "--alpha", "0.29516723530086653", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "excursions.csv").read_text().splitlines()
    assert len(lines) == 2
    _, s_h, t_h, cl, cr = lines[1].split(",")
    assert float(s_h) == pytest.approx(math.pi / 4, abs=1e-6)
    assert float(t_h) == pytest.approx(3 * math.pi / 4, abs=1e-6)
    assert (cl, cr) == ("0", "0")


def test_analyze_no_excursion(tmp_path):
    t = np.linspace(0, 1, 101)
    TrajectoryRecord.synthetic(t, 1.0 - 0.2 * t, np.full_like(t, 0.1)).to_csv(tmp_path / "q.csv")
    assert main(["analyze", str(tmp_path / "q.csv"), "--out", str(tmp_path)]) == 0
    assert (tmp_path / "excursions.csv").read_text().strip() == "alpha,s_h,t_h,clipped_left,clipped_right"
    rep = json.loads((tmp_path / "budget.json").read_text())
    assert all(c["direct"] == 0 and c["jump_sum"] == 0 and c["dissipation"] == 0 for c in rep["cells"])


def test_analyze_missing_rho(tmp_path, capsys):
    p = write(tmp_path / "x.csv", "t,energy,fwork,pdelta,vt\n0,1,0,0,0\n")
    assert main(["analyze", p, "--out", str(tmp_path)]) == 1
    assert "rho" in capsys.readouterr().err


def test_lemmas_ld(tmp_path, capsys):
    assert main(["lemmas", "ld", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "harness.json").read_text())
    rows = rep["suites"]["ld"]["rows"]
    assert rows[-1]["alpha"] == 0.999 and rows[-1]["distance"] <= 1e-3
    assert "ld: PASS" in capsys.readouterr().out


def test_lemmas_wc(tmp_path):
    assert main(["lemmas", "wc", "--out", str(tmp_path)]) == 0


def test_lemmas_unknown_selector(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["lemmas", "foo", "--out", str(tmp_path)])
    assert info.value.code == 1


def test_no_command():
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 1


PLAN = """\
base:
  grid: {dim: 2, n: 16}
  t_end: 0.2
  dt: 0.002
  ic: {kind: random-divfree, seed: 0, energy: 0.25}
m_list: [4, 8, 16]
alpha_list: [0.9, 0.99]
"""


def test_sweep_and_report(tmp_path):
    plan = write(tmp_path / "plan.yaml", PLAN)
    out = tmp_path / "sw"
    assert main(["sweep", "--plan", plan, "--out", str(out), "--jobs", "2"]) == 0
    doc = json.loads((out / "defect.json").read_text())
    assert len(doc["cells"]) == 6
    assert all(abs(c[k]) <= 1e-5 for c in doc["cells"] for k in ("direct", "jump_sum", "dissipation", "relation_residual"))
    assert not doc["partial"]
    for m in (4, 8, 16):
        assert (out / f"traj_m{m}.csv").exists()
    assert main(["report", str(out)]) == 0
    lines = (out / "trend.csv").read_text().splitlines()
    assert lines[0] == "m,alpha,direct,jump_sum,dissipation,relation_residual,measure"
    assert len(lines) == 7


def test_sweep_single_cell_and_s_zero(tmp_path):
    text = PLAN.replace("[4, 8, 16]", "[8]").replace("[0.9, 0.99]", "[0.9]") + "s_zero: true\n"
    plan = write(tmp_path / "plan.yaml", text)
    assert main(["sweep", "--plan", plan, "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "defect.json").read_text())
    assert len(doc["cells"]) == 1
    assert len(doc["s_sequence"]) >= 3


def test_sweep_bad_plan(tmp_path):
    plan = write(tmp_path / "plan.yaml", PLAN.replace("[4, 8, 16]", "[8, 4]"))
    assert main(["sweep", "--plan", plan, "--out", str(tmp_path)]) == 1


def test_report_missing(tmp_path):
    assert main(["report", str(tmp_path / "nothing.json")]) == 1
