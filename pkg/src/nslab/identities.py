"""Solver-level identities checked on recorded trajectories.

Time derivatives of recorded scalars are centered differences on the sample
grid, second-order one-sided at the endpoints, so the residuals below isolate
the discretization error and shrink at second order under dt refinement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .trajectory import TrajectoryRecord

__all__ = [
    "Residual",
    "CLReport",
    "time_derivative",
    "energy_identity_residual",
    "enstrophy_identity_residual",
    "cl_functional",
    "proof_chain_checks",
    "convergence_orders",
]


@dataclass(frozen=True)
class Residual:
    times: np.ndarray
    values: np.ndarray

    @property
    def max_abs(self) -> float:
        return float(np.abs(self.values).max()) if len(self.values) else 0.0


@dataclass(frozen=True)
class CLReport:
    """Values of the CL-type functionals on one trajectory.

    ``value``      ∫ |ρ̇| / (1+ρ)² dt     (the form the theorem's last estimate uses)
    ``companion``  ∫ |ρ̇| / (1+ρ²)² dt
    ``energy_form`` ∫ |d/dt‖v‖²| / (1+ρ)² dt
    """

    value: float
    companion: float
    energy_form: float


def time_derivative(times, y) -> np.ndarray:
    return np.gradient(np.asarray(y, dtype=float), np.asarray(times, dtype=float), edge_order=2)


def _need(traj: TrajectoryRecord, n: int = 3) -> None:
    if len(traj) < n:
        raise ValueError(f"need at least {n} samples, got {len(traj)}")


def energy_identity_residual(traj: TrajectoryRecord) -> Residual:
    """r(t) = d/dt‖v‖² + 2ν ρ − 2 (f, v)."""
    _need(traj)
    dE = time_derivative(traj.times, traj.energy)
    return Residual(traj.times, dE + 2.0 * traj.nu * traj.rho - 2.0 * traj.fwork)


def enstrophy_identity_residual(traj: TrajectoryRecord) -> Residual:
    """Residual of d/dt ρ + ‖PΔv‖² + ‖v_t‖² = ‖PΔv − v_t‖².

    The right-hand side is expanded as ‖PΔv‖² + ‖v_t‖² − 2(PΔv, v_t) with the
    recorded cross term, so the residual is d/dt ρ + 2(PΔv, v_t).
    """
    _need(traj)
    if "pdelta_vt" not in traj.extras:
        raise ValueError("trajectory lacks the (PΔv, v_t) series 'pdelta_vt' needed for the cross term")
    cross = traj.extras["pdelta_vt"]
    rhs = traj.pdelta + traj.vt - 2.0 * cross
    drho = time_derivative(traj.times, traj.rho)
    return Residual(traj.times, drho + traj.pdelta + traj.vt - rhs)


def cl_functional(traj: TrajectoryRecord) -> CLReport:
    _need(traj)
    t, rho = traj.times, traj.rho
    drho = np.abs(time_derivative(t, rho))
    dE = np.abs(time_derivative(t, traj.energy))
    return CLReport(
        value=float(np.trapezoid(drho / (1.0 + rho) ** 2, t)),
        companion=float(np.trapezoid(drho / (1.0 + rho**2) ** 2, t)),
        energy_form=float(np.trapezoid(dE / (1.0 + rho) ** 2, t)),
    )


def proof_chain_checks(traj: TrajectoryRecord) -> dict:
    """Pointwise checks from the proof of the uniform CL bound.

    ``pdelta_vt_margin``: min over samples of 2‖J_m[v]·∇v‖² + 2‖f‖² − ‖νPΔv − v_t‖²;
    non-negative when the inequality holds.  ``nlt_ratio``: max of
    ‖J_m[v]·∇v‖₂ / (‖PΔv‖₂^½ ‖∇v‖₂^{3/2}), an empirical value of the
    interpolation constant (reported only).
    """
    for key in ("pdelta_vt", "adv", "fnorm"):
        if key not in traj.extras:
            raise ValueError(f"trajectory lacks series {key!r}")
    nu = traj.nu
    cross, adv, fn = traj.extras["pdelta_vt"], traj.extras["adv"], traj.extras["fnorm"]
    lhs = nu**2 * traj.pdelta + traj.vt - 2.0 * nu * cross
    margin = 2.0 * adv + 2.0 * fn - lhs
    scale = np.maximum(1.0, np.abs(lhs))
    denom = np.sqrt(np.sqrt(traj.pdelta)) * traj.rho**0.75
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(denom > 0, np.sqrt(adv) / denom, 0.0)
    return {
        "pdelta_vt_margin": float(np.min(margin / scale)),
        "pdelta_vt_holds": bool(np.all(margin >= -1e-10 * scale)),
        "nlt_ratio": float(np.max(ratio)),
    }


def convergence_orders(dts, errors) -> np.ndarray:
    """Pairwise observed orders log(e_i/e_{i+1}) / log(dt_i/dt_{i+1})."""
    dts, errors = np.asarray(dts, float), np.asarray(errors, float)
    return np.log(errors[:-1] / errors[1:]) / np.log(dts[:-1] / dts[1:])
