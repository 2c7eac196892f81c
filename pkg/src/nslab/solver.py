"""Time integration of the Leray-mollified Navier-Stokes system on the torus.

    v_t + P[J_m[v]·∇v] = ν Δv + P f,     ∇·v = 0

Diffusion is handled exactly per mode by the integrating factor e^{−ν|k|²t}.
Advection and forcing are explicit: classical RK4 under the integrating
factor (Lawson) by default, or the two-stage Heun predictor-corrector.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from .config import RunConfig
from .presets import force_field, initial_field
from .spectral import SpectralField, nonlinear_coeffs, project_coeffs
from .trajectory import TrajectoryRecord

log = logging.getLogger(__name__)

__all__ = ["BlowUpError", "LeraySolver", "step", "run"]


class BlowUpError(FloatingPointError):
    """Non-finite state encountered during integration."""

    def __init__(self, time: float, message: str = ""):
        self.time = time
        super().__init__(message or f"non-finite state at t={time:.6g}")


class LeraySolver:
    """Integrator for one :class:`RunConfig`.  Owns its state; not shared between threads."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.grid = grid = cfg.grid_spec
        self.nu = cfg.nu
        self.dt = cfg.dt
        self.mask = grid.dealias_mask
        moll = cfg.mollifier_spec
        self.moll = None if moll is None else moll.symbol(grid)
        self.k2 = grid.k2
        self.vol = grid.volume
        f = force_field(cfg.force, grid)
        self.force = None if f is None else f.coeffs
        self.rate = cfg.force.rate if cfg.force.kind == "time-decaying" else 0.0
        self.ef = np.exp(-self.nu * self.k2 * self.dt)
        self.ef2 = np.exp(-0.5 * self.nu * self.k2 * self.dt)

    def initial_state(self) -> SpectralField:
        u = initial_field(self.cfg.ic, self.grid)
        if self.moll is not None:
            u = u.with_coeffs(u.coeffs * self.moll)
        return u

    def forcing(self, t: float):
        if self.force is None:
            return None
        return self.force if self.rate == 0.0 else self.force * math.exp(-self.rate * t)

    def advection(self, u: np.ndarray) -> np.ndarray:
        """Dealiased J_m[u]·∇u, unprojected."""
        a = u if self.moll is None else u * self.moll
        return nonlinear_coeffs(a, u, self.grid)

    def explicit_rhs(self, u: np.ndarray, t: float, adv: np.ndarray | None = None) -> np.ndarray:
        """P[−J_m[u]·∇u + f], the non-stiff part of the right-hand side."""
        if adv is None:
            adv = self.advection(u)
        out = -project_coeffs(adv, self.grid)
        f = self.forcing(t)
        if f is not None:
            out = out + f
        return out * self.mask

    def step_coeffs(self, u: np.ndarray, t: float, k1: np.ndarray | None = None) -> np.ndarray:
        dt = self.dt
        if k1 is None:
            k1 = self.explicit_rhs(u, t)
        ef = self.ef
        if self.cfg.scheme == "heun":
            pred = ef * (u + dt * k1)
            k2 = self.explicit_rhs(pred, t + dt)
            return ef * u + 0.5 * dt * (ef * k1 + k2)
        ef2 = self.ef2
        k2 = self.explicit_rhs(ef2 * (u + 0.5 * dt * k1), t + 0.5 * dt)
        k3 = self.explicit_rhs(ef2 * u + 0.5 * dt * k2, t + 0.5 * dt)
        k4 = self.explicit_rhs(ef * u + dt * ef2 * k3, t + dt)
        return ef * u + (dt / 6.0) * (ef * k1 + 2.0 * ef2 * (k2 + k3) + k4)

    def step(self, state: SpectralField, t: float = 0.0) -> SpectralField:
        with np.errstate(over="ignore", invalid="ignore"):
            new = self.step_coeffs(state.coeffs, t)
        if not np.all(np.isfinite(new)):
            raise BlowUpError(t + self.dt)
        return state.with_coeffs(new)

    def diagnostics(self, u: np.ndarray, t: float, adv: np.ndarray) -> dict:
        vol, k2 = self.vol, self.k2
        u2 = (u * np.conj(u)).real
        f = self.forcing(t)
        lap = -k2 * u
        ut = self.nu * lap + self.explicit_rhs(u, t, adv)
        return {
            "energy": vol * float(u2.sum()),
            "rho": vol * float((k2 * u2).sum()),
            "fwork": 0.0 if f is None else vol * float((f * np.conj(u)).real.sum()),
            "pdelta": vol * float((k2 * k2 * u2).sum()),
            "vt": vol * float((ut * np.conj(ut)).real.sum()),
            "pdelta_vt": vol * float((lap * np.conj(ut)).real.sum()),
            "adv": vol * float((adv * np.conj(adv)).real.sum()),
            "fnorm": 0.0 if f is None else vol * float((f * np.conj(f)).real.sum()),
        }

    def run(self, snapshot_times=()) -> tuple[TrajectoryRecord, dict]:
        """Integrate to ``t_end``.

        Returns the trajectory and a dict ``{time: SpectralField}`` with the
        states at the requested sample instants.  On blow-up the record is
        marked truncated and ends at the last finite state.
        """
        cfg = self.cfg
        nsteps, every = cfg.nsteps, cfg.sample_every
        want = {int(round(s / self.dt)) for s in snapshot_times}
        u = self.initial_state().coeffs
        rows, times, snaps = [], [], {}
        truncated = False
        for n in range(nsteps + 1):
            t = n * self.dt
            adv = self.advection(u)
            if n % every == 0 or n == nsteps:
                rows.append(self.diagnostics(u, t, adv))
                times.append(t)
            if n in want:
                snaps[t] = SpectralField(self.grid, u)
            if n == nsteps:
                break
            with np.errstate(over="ignore", invalid="ignore"):
                k1 = self.explicit_rhs(u, t, adv)
                new = self.step_coeffs(u, t, k1)
            if not np.all(np.isfinite(new)):
                log.warning("blow-up at t=%.6g, trajectory truncated", t + self.dt)
                truncated = True
                break
            u = new
        series = {k: np.array([r[k] for r in rows]) for k in rows[0]}
        record = TrajectoryRecord(
            times=np.array(times),
            energy=series.pop("energy"),
            rho=series.pop("rho"),
            fwork=series.pop("fwork"),
            pdelta=series.pop("pdelta"),
            vt=series.pop("vt"),
            extras=series,
            meta=dict(cfg.echo(), nu=cfg.nu),
            truncated=truncated,
            final=SpectralField(self.grid, u),
        )
        return record, snaps


def step(state: SpectralField, cfg: RunConfig, t: float = 0.0) -> SpectralField:
    """One integrating-factor step of size ``cfg.dt`` from time ``t``."""
    return LeraySolver(cfg).step(state, t)


def run(cfg: RunConfig) -> TrajectoryRecord:
    """Integrate ``cfg``; use :meth:`LeraySolver.run` to also collect field snapshots."""
    return LeraySolver(cfg).run()[0]
