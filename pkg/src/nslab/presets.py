"""Initial conditions, forcing fields and the named configurations used by the test suite."""

from __future__ import annotations

import math

import numpy as np

from .config import ForceConfig, GridConfig, ICConfig, RunConfig
from .spectral import (
    GridSpec,
    SpectralField,
    dealias,
    l2_norm,
    load_snapshot,
    project_div_free,
)


def taylor_green(grid: GridSpec, amplitude: float = 1.0) -> SpectralField:
    """u = (sin x cos y, −cos x sin y) in 2D; the classic cos z-modulated vortex in 3D."""
    if grid.dim == 2:
        x, y = grid.coordinates()
        vals = [np.sin(x) * np.cos(y), -np.cos(x) * np.sin(y)]
    else:
        x, y, z = grid.coordinates()
        vals = [
            np.sin(x) * np.cos(y) * np.cos(z),
            -np.cos(x) * np.sin(y) * np.cos(z),
            np.zeros_like(x),
        ]
    return SpectralField.from_physical(grid, amplitude * np.stack(vals))


def abc_flow(grid: GridSpec, a: float = 1.0, b: float = 1.0, c: float = 1.0) -> SpectralField:
    """Arnold-Beltrami-Childress flow; a Beltrami field, so advection is a pure gradient."""
    if grid.dim != 3:
        raise ValueError("abc flow is three-dimensional")
    x, y, z = grid.coordinates()
    vals = np.stack([
        a * np.sin(z) + c * np.cos(y),
        b * np.sin(x) + a * np.cos(z),
        c * np.sin(y) + b * np.cos(x),
    ])
    return SpectralField.from_physical(grid, vals)


def random_divfree(
    grid: GridSpec,
    seed: int = 0,
    slope: float = -4.0,
    kmin: float = 1.0,
    kmax: float = 4.0,
    energy: float | None = 0.5,
    amplitude: float = 1.0,
) -> SpectralField:
    """Random solenoidal field with shell spectrum E(k) ∝ k^slope on kmin ≤ |k| ≤ kmax.

    Built by filtering white noise, so it is real and reproducible from ``seed``.
    With ``energy`` set, the field is rescaled so that ‖u‖₂² equals it;
    otherwise ``amplitude`` multiplies the filtered noise.
    """
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((grid.dim,) + grid.shape)
    u = SpectralField.from_physical(grid, noise)
    kmag = np.sqrt(grid.k2)
    band = (kmag >= kmin) & (kmag <= kmax)
    with np.errstate(divide="ignore"):
        filt = np.where(band, kmag ** ((slope - (grid.dim - 1)) / 2.0), 0.0)
    u = dealias(project_div_free(u.with_coeffs(u.coeffs * filt)))
    if energy is not None:
        norm = l2_norm(u)
        if norm == 0:
            raise ValueError("empty wavenumber band for random field")
        return u * math.sqrt(energy) * (1.0 / norm)
    return u * amplitude


def kolmogorov(grid: GridSpec, amplitude: float = 1.0, wavenumber: int = 2) -> SpectralField:
    """Shear forcing (A sin(k y), 0[, 0])."""
    coords = grid.coordinates()
    vals = np.zeros((grid.dim,) + grid.shape)
    vals[0] = amplitude * np.sin(wavenumber * coords[1])
    return SpectralField.from_physical(grid, vals)


def initial_field(ic: ICConfig, grid: GridSpec) -> SpectralField:
    if ic.kind == "taylor-green":
        u = taylor_green(grid, ic.amplitude)
    elif ic.kind == "abc-flow":
        u = abc_flow(grid, ic.amplitude, ic.amplitude, ic.amplitude)
    elif ic.kind == "random-divfree":
        u = random_divfree(grid, ic.seed, ic.slope, ic.kmin, ic.kmax, ic.energy, ic.amplitude)
    elif ic.kind == "zero":
        u = SpectralField.zeros(grid)
    else:
        u = load_snapshot(ic.path)
        if u.grid != grid:
            raise ValueError(f"snapshot grid {u.grid} does not match run grid {grid}")
        u = u * ic.amplitude
    return _solenoidal(u)


def force_field(force: ForceConfig, grid: GridSpec) -> SpectralField | None:
    """Spatial part F of the forcing; the solver multiplies by exp(−rate·t) when decaying."""
    if force.kind == "zero":
        return None
    if force.field == "kolmogorov":
        f = kolmogorov(grid, force.amplitude, force.wavenumber)
    else:
        f = load_snapshot(force.field)
        if f.grid != grid:
            raise ValueError(f"force snapshot grid {f.grid} does not match run grid {grid}")
        f = f * force.amplitude
    return _solenoidal(f)


def _solenoidal(u: SpectralField) -> SpectralField:
    c = project_div_free(dealias(u)).coeffs.copy()
    c[(slice(None),) + (0,) * u.grid.dim] = 0.0
    return u.with_coeffs(c)


# Named configurations shared by the acceptance suite and ``nslab lemmas``.

def taylor_green_config(
    n: int = 64, dt: float = 1e-3, t_end: float = 1.0, amplitude: float = 1.0, **kw
) -> RunConfig:
    """At unit amplitude ρ(0) = 2‖v0‖² ≈ 39.5; amplitude 0.3 keeps ρ below tan(0.45π)."""
    ic = ICConfig(kind="taylor-green", amplitude=amplitude)
    return RunConfig(grid=GridConfig(dim=2, n=n), dt=dt, t_end=t_end, ic=ic, **kw)


def random_config(
    n: int = 32, dt: float = 1e-3, t_end: float = 1.0, seed: int = 0, energy: float = 0.25, **kw
) -> RunConfig:
    """Smooth low-mode 2D data: ρ stays well below tan(0.45π) ≈ 6.31."""
    ic = ICConfig(kind="random-divfree", seed=seed, slope=-4.0, kmin=1.0, kmax=4.0, energy=energy)
    return RunConfig(grid=GridConfig(dim=2, n=n), dt=dt, t_end=t_end, ic=ic, **kw)


def forced_config(n: int = 32, dt: float = 1e-3, t_end: float = 2.0, seed: int = 1, **kw) -> RunConfig:
    """Decaying Kolmogorov forcing on weak random data.

    ρ starts below 1, rises through tan(π/4) = 1 and tan(0.45π) ≈ 6.31 while the
    force is active, and falls back below 1 before ``t_end``: one interior
    excursion at α = 0.5 and at α = 0.9.
    """
    ic = ICConfig(kind="random-divfree", seed=seed, slope=-4.0, kmin=1.0, kmax=4.0, energy=0.05)
    force = ForceConfig(kind="time-decaying", field="kolmogorov", amplitude=4.0, wavenumber=2, rate=2.0)
    return RunConfig(grid=GridConfig(dim=2, n=n), dt=dt, t_end=t_end, ic=ic, force=force, **kw)


def cl_config(n: int = 64, dt: float = 1e-3, t_end: float = 1.0, seed: int = 3, **kw) -> RunConfig:
    """Broadband data reaching |k| = 20, so the mollifier index m changes the dynamics."""
    ic = ICConfig(kind="random-divfree", seed=seed, slope=-3.0, kmin=1.0, kmax=20.0, energy=1.0)
    return RunConfig(grid=GridConfig(dim=2, n=n), dt=dt, t_end=t_end, ic=ic, **kw)
