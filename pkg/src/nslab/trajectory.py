"""Time-sampled scalar diagnostics of one run, and their CSV form.

The CSV header starts with the six required columns ``t,energy,rho,fwork,pdelta,vt``.
Optional trailing columns written by the solver:

``pdelta_vt``  the cross term (PΔv, v_t) used by the enstrophy identity
``adv``        ‖J_m[v]·∇v‖₂² (dealiased, unprojected)
``fnorm``      ‖f‖₂²

Run metadata (config echo, viscosity, truncation flag) goes to a sidecar
``<name>.meta.json``.  A CSV without a sidecar is read with ν = 1.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

REQUIRED_COLUMNS = ("t", "energy", "rho", "fwork", "pdelta", "vt")
EXTRA_COLUMNS = ("pdelta_vt", "adv", "fnorm")

__all__ = ["TrajectoryRecord", "SchemaError", "REQUIRED_COLUMNS", "EXTRA_COLUMNS"]


class SchemaError(ValueError):
    """A trajectory file lacks a required column or is malformed."""


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    times: np.ndarray
    energy: np.ndarray
    rho: np.ndarray
    fwork: np.ndarray
    pdelta: np.ndarray
    vt: np.ndarray
    extras: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    truncated: bool = False
    final: object = None

    def __post_init__(self):
        n = len(self.times)
        for name in REQUIRED_COLUMNS[1:]:
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (n,):
                raise ValueError(f"series {name!r} has length {arr.shape}, expected {n}")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        times = np.asarray(self.times, dtype=float)
        if n and np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        times.flags.writeable = False
        object.__setattr__(self, "times", times)
        extras = {}
        for k, v in self.extras.items():
            arr = np.asarray(v, dtype=float)
            if arr.shape != (n,):
                raise ValueError(f"extra series {k!r} has wrong length")
            arr.flags.writeable = False
            extras[k] = arr
        object.__setattr__(self, "extras", extras)
        if np.any(self.energy < 0) or np.any(self.rho < 0):
            raise ValueError("energy and rho must be non-negative")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def nu(self) -> float:
        return float(self.meta.get("nu", 1.0))

    @property
    def m(self):
        return self.meta.get("m")

    def index_of(self, t: float) -> int:
        """Index of sample instant ``t``; raises if ``t`` is not (within 1e-9) a sample."""
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"{t} is not a sample instant of the trajectory")
        return i

    def to_csv(self, path) -> Path:
        path = Path(path)
        cols = list(REQUIRED_COLUMNS) + [c for c in EXTRA_COLUMNS if c in self.extras]
        data = [self.times, self.energy, self.rho, self.fwork, self.pdelta, self.vt]
        data += [self.extras[c] for c in cols[6:]]
        with path.open("w", newline="") as fh:
            fh.write(",".join(cols) + "\n")
            for row in zip(*data):
                fh.write(",".join(repr(float(x)) for x in row) + "\n")
        meta = {"meta": self.meta, "truncated": self.truncated}
        _sidecar(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        return path

    @classmethod
    def from_csv(cls, path) -> "TrajectoryRecord":
        path = Path(path)
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = [h.strip() for h in next(reader)]
            except StopIteration:
                raise SchemaError(f"{path}: empty file") from None
            for col in REQUIRED_COLUMNS:
                if col not in header:
                    raise SchemaError(f"{path}: missing column {col!r}")
            rows = [r for r in reader if r]
        try:
            table = np.array(rows, dtype=float).reshape(len(rows), len(header))
        except ValueError as exc:
            raise SchemaError(f"{path}: malformed rows ({exc})") from None
        cols = {h: table[:, i] for i, h in enumerate(header)}
        meta, truncated = {}, False
        side = _sidecar(path)
        if side.exists():
            doc = json.loads(side.read_text())
            meta, truncated = doc.get("meta", {}), bool(doc.get("truncated", False))
        if np.any(~np.isfinite(table)):
            raise SchemaError(f"{path}: non-finite samples; truncate the record first")
        return cls(
            times=cols["t"],
            energy=cols["energy"],
            rho=cols["rho"],
            fwork=cols["fwork"],
            pdelta=cols["pdelta"],
            vt=cols["vt"],
            extras={c: cols[c] for c in EXTRA_COLUMNS if c in cols},
            meta=meta,
            truncated=truncated,
        )

    @classmethod
    def synthetic(cls, times, energy, rho, fwork=None, nu: float = 1.0, **extras) -> "TrajectoryRecord":
        """Record built from given series; unspecified solver columns are zero."""
        times = np.asarray(times, dtype=float)
        zeros = np.zeros_like(times)
        return cls(
            times=times,
            energy=energy,
            rho=rho,
            fwork=zeros if fwork is None else fwork,
            pdelta=zeros,
            vt=zeros,
            extras=extras,
            meta={"nu": nu, "synthetic": True},
        )


def _sidecar(path: Path) -> Path:
    return path.with_name(path.stem + ".meta.json")
