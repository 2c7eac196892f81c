"""Periodic-torus vector fields in Fourier representation.

Fields live on the 2π-periodic torus in 2 or 3 dimensions.  Coefficients are
stored with numpy's ``norm="forward"`` convention, so ``coeffs[c, k]`` is the
physical amplitude of ``exp(i k·x)`` in component ``c`` and

    ‖u‖₂² = (2π)^dim · Σ_k |û(k)|²

holds exactly.  Array layout is ``(ncomp, n, n[, n])`` in standard FFT order
(non-negative wavenumbers first, then negative ones).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

BOX = 2.0 * math.pi
SNAPSHOT_FORMAT = "nslab-field"
SNAPSHOT_VERSION = 1

__all__ = [
    "GridSpec",
    "MollifierSpec",
    "SpectralField",
    "GridMismatchError",
    "project_div_free",
    "mollify",
    "dealias",
    "l2_norm",
    "grad_norm_sq",
    "laplacian",
    "inner",
    "lq_norm",
    "nonlinear_term",
    "divergence_error",
    "is_real_symmetric",
    "resample",
    "save_snapshot",
    "load_snapshot",
]


class GridMismatchError(ValueError):
    """Raised when two fields on different grids are combined."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid with ``n`` points per axis on [0, 2π)^dim."""

    dim: int = 2
    n: int = 32
    dealias: float = 2.0 / 3.0

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if self.n < 8 or self.n % 2:
            raise ValueError(f"n must be even and >= 8, got {self.n}")
        if not 0.0 < self.dealias <= 1.0:
            raise ValueError(f"dealias must lie in (0, 1], got {self.dealias}")

    @property
    def box(self) -> float:
        return BOX

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def volume(self) -> float:
        return BOX**self.dim

    @property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Integer wavevector components, each broadcastable to ``shape``."""
        return _wavenumbers(self.dim, self.n)

    @property
    def k2(self) -> np.ndarray:
        return _k2(self.dim, self.n)

    @property
    def dealias_mask(self) -> np.ndarray:
        return _dealias_mask(self.dim, self.n, self.dealias)

    def coordinates(self) -> tuple[np.ndarray, ...]:
        x = np.arange(self.n) * (BOX / self.n)
        return tuple(np.meshgrid(*([x] * self.dim), indexing="ij"))


@functools.lru_cache(maxsize=None)
def _wavenumbers(dim: int, n: int) -> tuple[np.ndarray, ...]:
    k1 = np.fft.fftfreq(n, 1.0 / n)
    out = []
    for axis in range(dim):
        shape = [1] * dim
        shape[axis] = n
        k = k1.reshape(shape)
        k.flags.writeable = False
        out.append(k)
    return tuple(out)


@functools.lru_cache(maxsize=None)
def _k2(dim: int, n: int) -> np.ndarray:
    k2 = sum(k**2 for k in _wavenumbers(dim, n))
    k2 = np.broadcast_to(k2, (n,) * dim).copy()
    k2.flags.writeable = False
    return k2


@functools.lru_cache(maxsize=None)
def _dealias_mask(dim: int, n: int, frac: float) -> np.ndarray:
    mask = np.sqrt(_k2(dim, n)) < frac * (n // 2)
    mask.flags.writeable = False
    return mask


@dataclass(frozen=True)
class MollifierSpec:
    """Fourier mollifier J_m: sharp cutoff at |k| ≤ m, or a Gaussian of width m."""

    m: int
    kind: str = "sharp"

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"mollifier index m must be a positive integer, got {self.m}")
        if self.kind not in ("sharp", "gaussian"):
            raise ValueError(f"unknown mollifier kind {self.kind!r}")

    def symbol(self, grid: GridSpec) -> np.ndarray:
        if self.kind == "sharp":
            return (grid.k2 <= self.m**2).astype(float)
        return np.exp(-grid.k2 / float(self.m) ** 2)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Immutable vector (or scalar, ``ncomp=1``) field given by Fourier coefficients."""

    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128)
        if c.ndim == self.grid.dim:
            c = c[np.newaxis]
        if c.shape[1:] != self.grid.shape:
            raise ValueError(
                f"coefficient shape {c.shape} does not match grid {self.grid.shape}"
            )
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def ncomp(self) -> int:
        return self.coeffs.shape[0]

    @classmethod
    def zeros(cls, grid: GridSpec, ncomp: int | None = None) -> "SpectralField":
        ncomp = grid.dim if ncomp is None else ncomp
        return cls(grid, np.zeros((ncomp,) + grid.shape, dtype=np.complex128))

    @classmethod
    def from_physical(cls, grid: GridSpec, values) -> "SpectralField":
        values = np.asarray(values, dtype=float)
        if values.ndim == grid.dim:
            values = values[np.newaxis]
        axes = tuple(range(1, grid.dim + 1))
        return cls(grid, np.fft.fftn(values, axes=axes, norm="forward"))

    def to_physical(self) -> np.ndarray:
        axes = tuple(range(1, self.grid.dim + 1))
        return np.fft.ifftn(self.coeffs, axes=axes, norm="forward").real

    def with_coeffs(self, coeffs) -> "SpectralField":
        return SpectralField(self.grid, coeffs)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _check_grids(self, other)
        return self.with_coeffs(self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _check_grids(self, other)
        return self.with_coeffs(self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "SpectralField":
        return self.with_coeffs(self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return self.with_coeffs(-self.coeffs)


def _check_grids(*fields: SpectralField) -> None:
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise GridMismatchError(f"grid mismatch: {g} vs {f.grid}")


# Raw-array kernels.  The solver calls these directly on (ncomp, *shape) arrays.

def project_coeffs(c: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Leray projection of a coefficient array; Nyquist modes are zeroed.

    A mode with any index at n/2 has no distinct partner at −k, so its
    projection cannot keep the field real; dealiased fields never carry one.
    """
    ks = grid.wavenumbers
    k2 = grid.k2
    kdotc = sum(k * c[i] for i, k in enumerate(ks))
    safe = np.where(k2 == 0, 1.0, k2)
    coef = kdotc / safe
    return np.stack([c[i] - k * coef for i, k in enumerate(ks)]) * _non_nyquist(grid.dim, grid.n)


@functools.lru_cache(maxsize=None)
def _non_nyquist(dim: int, n: int) -> np.ndarray:
    keep = np.ones((n,) * dim)
    for axis in range(dim):
        idx = [slice(None)] * dim
        idx[axis] = n // 2
        keep[tuple(idx)] = 0.0
    keep.flags.writeable = False
    return keep


def nonlinear_coeffs(a_hat: np.ndarray, u_hat: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Dealiased Fourier coefficients of (a·∇)u for coefficient arrays."""
    mask = grid.dealias_mask
    axes = tuple(range(1, grid.dim + 1))
    # Inputs are Hermitian, so the half spectrum along the last axis suffices.
    half = (Ellipsis, slice(0, grid.n // 2 + 1))
    a = np.fft.irfftn((a_hat * mask)[half], s=grid.shape, axes=axes, norm="forward")
    u_hat = u_hat * mask
    ks = grid.wavenumbers
    grads = np.fft.irfftn(
        np.stack([1j * k * u_hat for k in ks])[half],
        s=grid.shape,
        axes=tuple(ax + 1 for ax in axes),
        norm="forward",
    )
    # grads[j, i] = ∂_j u_i
    prod = np.einsum("j...,ji...->i...", a, grads)
    return np.fft.fftn(prod, axes=axes, norm="forward") * mask


def _spectral_sum(weights: np.ndarray | None, c1: np.ndarray, c2: np.ndarray) -> float:
    prod = (c1 * np.conj(c2)).real
    if weights is not None:
        prod = prod * weights
    return float(prod.sum())


# Public operations on SpectralField values.

def project_div_free(u: SpectralField) -> SpectralField:
    """Leray projection v̂ − k(k·v̂)/|k|²; the k=0 coefficient is kept, Nyquist modes dropped."""
    if u.ncomp != u.grid.dim:
        raise ValueError("projection needs a vector field with dim components")
    return u.with_coeffs(project_coeffs(u.coeffs, u.grid))


def mollify(u: SpectralField, m: MollifierSpec | int) -> SpectralField:
    if not isinstance(m, MollifierSpec):
        m = MollifierSpec(int(m))
    return u.with_coeffs(u.coeffs * m.symbol(u.grid))


def dealias(u: SpectralField) -> SpectralField:
    return u.with_coeffs(u.coeffs * u.grid.dealias_mask)


def l2_norm(u: SpectralField) -> float:
    return math.sqrt(u.grid.volume * _spectral_sum(None, u.coeffs, u.coeffs))


def grad_norm_sq(u: SpectralField) -> float:
    """‖∇u‖₂² = (2π)^dim Σ |k|² |û(k)|²."""
    return u.grid.volume * _spectral_sum(u.grid.k2, u.coeffs, u.coeffs)


def laplacian(u: SpectralField) -> SpectralField:
    return u.with_coeffs(-u.grid.k2 * u.coeffs)


def inner(u: SpectralField, w: SpectralField) -> float:
    _check_grids(u, w)
    if u.ncomp != w.ncomp:
        raise ValueError("component count mismatch")
    return u.grid.volume * _spectral_sum(None, u.coeffs, w.coeffs)


def lq_norm(u: SpectralField, q: float) -> float:
    """L^q norm of the pointwise Euclidean magnitude by grid quadrature.

    The rectangle rule on the uniform periodic grid is spectrally accurate for
    smooth fields; ``q = inf`` is the grid maximum.
    """
    if not q >= 1:
        raise ValueError(f"q must be >= 1, got {q}")
    mag = np.sqrt((u.to_physical() ** 2).sum(axis=0))
    if math.isinf(q):
        return float(mag.max())
    cell = (BOX / u.grid.n) ** u.grid.dim
    return float((cell * (mag**q).sum()) ** (1.0 / q))


def nonlinear_term(u_adv: SpectralField, u: SpectralField) -> SpectralField:
    """Dealiased pseudo-spectral (u_adv·∇)u.  Not projected."""
    _check_grids(u_adv, u)
    if u_adv.ncomp != u.grid.dim:
        raise ValueError("advecting field must have dim components")
    return u.with_coeffs(nonlinear_coeffs(u_adv.coeffs, u.coeffs, u.grid))


def divergence_error(u: SpectralField) -> float:
    """max_k |k·û(k)| / max(1, ‖û‖), the relative divergence defect."""
    kdotc = sum(k * u.coeffs[i] for i, k in enumerate(u.grid.wavenumbers))
    scale = max(1.0, float(np.sqrt((np.abs(u.coeffs) ** 2).sum())))
    return float(np.abs(kdotc).max()) / scale


def _negate_k(c: np.ndarray, dim: int) -> np.ndarray:
    axes = tuple(range(1, dim + 1))
    return np.roll(np.flip(c, axis=axes), 1, axis=axes)


def is_real_symmetric(u: SpectralField, tol: float = 1e-12) -> bool:
    """Check coeff(−k) = conj(coeff(k)) up to ``tol`` relative to the largest coefficient."""
    diff = np.abs(_negate_k(u.coeffs, u.grid.dim) - np.conj(u.coeffs)).max()
    return bool(diff <= tol * max(1.0, float(np.abs(u.coeffs).max())))


def resample(u: SpectralField, n: int) -> SpectralField:
    """Exact change of resolution for fields whose modes fit on both grids."""
    new = GridSpec(u.grid.dim, n, u.grid.dealias)
    out = np.zeros((u.ncomp,) + new.shape, dtype=np.complex128)
    kmax = min(u.grid.n, n) // 2 - 1
    src = np.abs(np.fft.fftfreq(u.grid.n, 1.0 / u.grid.n)) <= kmax
    dst = np.abs(np.fft.fftfreq(n, 1.0 / n)) <= kmax
    src_idx = np.ix_(*([np.flatnonzero(src)] * u.grid.dim))
    dst_idx = np.ix_(*([np.flatnonzero(dst)] * u.grid.dim))
    for c in range(u.ncomp):
        out[c][dst_idx] = u.coeffs[c][src_idx]
    return SpectralField(new, out)


def save_snapshot(u: SpectralField, path: str | Path, **extra) -> Path:
    """Write ``u`` as an .npz file with a versioned header."""
    path = Path(path)
    np.savez(
        path,
        format=SNAPSHOT_FORMAT,
        version=SNAPSHOT_VERSION,
        dim=u.grid.dim,
        n=u.grid.n,
        box=BOX,
        dealias=u.grid.dealias,
        coeffs=u.coeffs,
        **{f"meta_{k}": v for k, v in extra.items()},
    )
    return path if path.suffix == ".npz" else path.with_name(path.name + ".npz")


def load_snapshot(path: str | Path) -> SpectralField:
    with np.load(Path(path), allow_pickle=False) as data:
        fmt = str(data.get("format", ""))
        if fmt != SNAPSHOT_FORMAT:
            raise ValueError(f"{path}: not an {SNAPSHOT_FORMAT} file (format={fmt!r})")
        version = int(data["version"])
        if version != SNAPSHOT_VERSION:
            raise ValueError(f"{path}: unsupported snapshot version {version}")
        if not math.isclose(float(data["box"]), BOX):
            raise ValueError(f"{path}: only the 2π box is supported")
        grid = GridSpec(int(data["dim"]), int(data["n"]), float(data["dealias"]))
        return SpectralField(grid, data["coeffs"])
