import math

import numpy as np
import pytest

from nslab import presets
from nslab.config import ForceConfig, GridConfig, ICConfig, RunConfig
from nslab.solver import BlowUpError, LeraySolver, run, step
from nslab.spectral import SpectralField, divergence_error, l2_norm


def test_taylor_green_energy_decay(tg_traj):
    exact = tg_traj.energy[0] * np.exp(-4 * tg_traj.times)
    assert np.max(np.abs(tg_traj.energy / exact - 1)) < 1e-12
    assert np.all(np.diff(tg_traj.energy) < 0)


def test_taylor_green_3d_short():
    cfg = RunConfig(grid=GridConfig(dim=3, n=16), dt=1e-3, t_end=0.01, ic=ICConfig(kind="taylor-green"))
    tr = run(cfg)
    assert np.all(np.diff(tr.energy) < 0)
    assert np.all(tr.energy[1:] < tr.energy[0])


def test_zero_solution_stays_zero():
    cfg = RunConfig(grid=GridConfig(dim=2, n=16), dt=1e-2, t_end=0.1, ic=ICConfig(kind="zero"))
    tr = run(cfg)
    for series in (tr.energy, tr.rho, tr.fwork, tr.pdelta, tr.vt):
        assert not np.any(series)


def test_state_stays_divergence_free_and_real():
    cfg = presets.forced_config(n=16, dt=2e-3, t_end=0.05)
    solver = LeraySolver(cfg)
    u = solver.initial_state()
    for i in range(10):
        u = solver.step(u, i * cfg.dt)
    assert divergence_error(u) < 1e-13
    phys = np.fft.ifftn(u.coeffs, axes=(1, 2), norm="forward")
    assert np.abs(phys.imag).max() < 1e-13


def test_abc_flow_energy_decay():
    # Beltrami field: advection is a gradient, so energy decays as e^{-2t}
    cfg = RunConfig(grid=GridConfig(dim=3, n=16), dt=1e-3, t_end=0.05, ic=ICConfig(kind="abc-flow"))
    tr = run(cfg)
    assert tr.energy[-1] == pytest.approx(tr.energy[0] * math.exp(-2 * 0.05), rel=1e-10)


def test_step_function_matches_solver():
    cfg = presets.random_config(n=16, dt=1e-3, t_end=0.01)
    u0 = LeraySolver(cfg).initial_state()
    u1 = step(u0, cfg)
    assert l2_norm(u1) < l2_norm(u0)


def test_blow_up_raises():
    cfg = presets.random_config(n=16, dt=1e-3, t_end=0.01)
    u = LeraySolver(cfg).initial_state()
    bad = u.coeffs.copy()
    bad[0, 1, 1] = np.nan
    with pytest.raises(BlowUpError) as info:
        step(SpectralField(u.grid, bad), cfg, t=0.5)
    assert info.value.time == pytest.approx(0.501)


def test_blow_up_truncates_run():
    cfg = RunConfig(
        grid=GridConfig(dim=2, n=16), dt=1.0, t_end=20.0, nu=1e-3,
        ic=ICConfig(kind="random-divfree", energy=1e6, kmax=6.0),
    )
    rec, _ = LeraySolver(cfg).run()
    assert rec.truncated
    assert len(rec) < cfg.nsteps + 1
    assert np.all(np.isfinite(rec.energy))


def test_determinism():
    cfg = presets.random_config(n=16, dt=2e-3, t_end=0.02, seed=7)
    a, b = run(cfg), run(cfg)
    assert np.array_equal(a.energy, b.energy)
    assert np.array_equal(a.rho, b.rho)


def test_mollifier_changes_dynamics():
    base = presets.cl_config(n=32, t_end=0.02)
    e_full = run(base).rho
    e_moll = run(base.model_copy(update={"m": 4})).rho
    assert e_moll[0] < e_full[0]


def test_sample_every_and_snapshots():
    cfg = presets.random_config(n=16, dt=1e-3, t_end=0.01, sample_every=5)
    rec, snaps = LeraySolver(cfg).run(snapshot_times=(0.005,))
    assert np.allclose(rec.times, [0.0, 0.005, 0.01])
    assert list(snaps) == [pytest.approx(0.005)]


def test_forcing_energy_input():
    cfg = RunConfig(
        grid=GridConfig(dim=2, n=16), dt=1e-3, t_end=0.05, ic=ICConfig(kind="zero"),
        force=ForceConfig(kind="fixed-field", amplitude=1.0),
    )
    tr = run(cfg)
    assert tr.energy[-1] > 0
    assert np.all(tr.fwork[1:] > 0)
    assert np.allclose(tr.extras["fnorm"], tr.extras["fnorm"][0])


@pytest.mark.parametrize("scheme", ["rk4", "heun"])
def test_global_convergence_order(scheme):
    cfg = presets.forced_config(n=16, t_end=0.2, scheme=scheme)
    ref = run(cfg.model_copy(update={"dt": 2.5e-4, "scheme": "rk4"})).final
    errs = []
    for dt in (0.02, 0.01):
        u = run(cfg.model_copy(update={"dt": dt})).final
        errs.append(l2_norm(u - ref))
    order = math.log2(errs[0] / errs[1])
    assert order > (3.5 if scheme == "rk4" else 1.8)
