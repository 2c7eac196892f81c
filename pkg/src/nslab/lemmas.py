"""Numeric harness for the auxiliary lemmas: weighted convergence, interpolation, the LD limit.

Everything here runs on synthetic input; nothing depends on the solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .budget import ld_value, weight
from .presets import random_divfree
from .spectral import GridSpec, SpectralField, project_div_free, resample

__all__ = [
    "HypothesisViolation",
    "SyntheticFamily",
    "constant_family",
    "spike_family",
    "oscillating_mass_family",
    "tan_threshold",
    "check_weight_hypotheses",
    "check_family_hypotheses",
    "WCReport",
    "wc_weighted_limit",
    "interpolation_exponent",
    "interpolation_ratio",
    "interpolation_campaign",
    "ld_limit",
]


class HypothesisViolation(ValueError):
    """Input violates a hypothesis of the lemma under test; ``hypothesis`` names it."""

    def __init__(self, hypothesis: str, detail: str = ""):
        self.hypothesis = hypothesis
        super().__init__(f"hypothesis '{hypothesis}' violated" + (f": {detail}" if detail else ""))


# synthetic families

@dataclass(frozen=True)
class SyntheticFamily:
    """A sequence h_m on [0, T] with pointwise limit h off a null set.

    ``evaluate(m, t)`` and ``limit(t)`` are vectorized.  ``breakpoints(m)``
    lists the discontinuities of h_m, used to split quadrature.  ``null_set(m)``
    returns the interval on which h_m(t) → h(t) is not expected at this m.
    """

    description: str
    evaluate: Callable
    limit: Callable
    bound: float
    breakpoints: Callable = lambda m: ()
    null_set: Callable = lambda m: (0.0, 0.0)
    params: dict = field(default_factory=dict)
    seed: int | None = None


def _base_profile(level: float, amp: float, T: float):
    def h(t):
        t = np.asarray(t, dtype=float)
        return level + amp * np.sin(np.pi * t / T) ** 2

    return h


def constant_family(level: float = 3.0, amp: float = 2.0, T: float = 1.0) -> SyntheticFamily:
    """h_m = h for every m: the dominated case."""
    h = _base_profile(level, amp, T)
    return SyntheticFamily(
        description="constant in m",
        evaluate=lambda m, t: h(t),
        limit=h,
        bound=(level + amp) * T,
        params={"level": level, "amp": amp, "T": T},
    )


def spike_family(
    mass: float = 1.0, w0: float = 1.0, level: float = 1.0, amp: float = 2.0, T: float = 1.0,
    seed: int | None = None,
) -> SyntheticFamily:
    """h_m = h + (mass/w_m)·χ_[x_0, x_0+w_m], w_m = w0/m.

    The spike keeps its mass while its width shrinks, so ∫h_m − ∫h = mass for
    every m although h_m → h off the shrinking support.  With ``seed`` the
    spike position x_0 is drawn uniformly in [0, T/2]; otherwise it is 0.
    """
    h = _base_profile(level, amp, T)
    x0 = 0.0 if seed is None else float(np.random.default_rng(seed).uniform(0.0, 0.5 * T))

    def width(m):
        return w0 / m

    def evaluate(m, t):
        t = np.asarray(t, dtype=float)
        w = width(m)
        return h(t) + np.where((t >= x0) & (t <= x0 + w), mass / w, 0.0)

    return SyntheticFamily(
        description="shrinking spike of fixed mass",
        evaluate=evaluate,
        limit=h,
        bound=(level + amp) * T + mass,
        breakpoints=lambda m: (x0, x0 + width(m)),
        null_set=lambda m: (x0, x0 + width(m)),
        params={"mass": mass, "w0": w0, "level": level, "amp": amp, "T": T, "x0": x0},
        seed=seed,
    )


def oscillating_mass_family(
    mass: float = 1.0, w0: float = 1.0, level: float = 1.0, amp: float = 2.0, T: float = 1.0,
) -> SyntheticFamily:
    """Spike of mass ``mass`` for even m and none for odd m: ∫h_m has no limit."""
    h = _base_profile(level, amp, T)

    def evaluate(m, t):
        t = np.asarray(t, dtype=float)
        w = w0 / m
        height = mass / w if m % 2 == 0 else 0.0
        return h(t) + np.where(t <= w, height, 0.0)

    return SyntheticFamily(
        description="spike mass alternating with m",
        evaluate=evaluate,
        limit=h,
        bound=(level + amp) * T + mass,
        breakpoints=lambda m: (w0 / m,),
        null_set=lambda m: (0.0, w0 / m),
        params={"mass": mass, "w0": w0, "level": level, "amp": amp, "T": T},
    )


# hypothesis checks

def tan_threshold(alpha):
    return np.tan(np.asarray(alpha, dtype=float) * np.pi / 2)


def check_weight_hypotheses(p, g, alphas, alpha0: float = 1.0, n_rho: int = 400) -> None:
    """Raise :class:`HypothesisViolation` unless (g, p) meet the lemma's hypotheses.

    Checked on sampled grids: g strictly increasing and unbounded toward α₀;
    0 ≤ p ≤ 1; p = 1 on [0, g(α)]; p weakly decreasing in ρ; p → 0 as ρ → ∞.
    """
    alphas = np.sort(np.asarray(alphas, dtype=float))
    gv = np.array([float(g(a)) for a in alphas])
    if not np.all(np.isfinite(gv)) or np.any(np.diff(gv) <= 0):
        raise HypothesisViolation("g-increasing", f"g(alphas) = {gv}")
    near = alpha0 - 1e-9 * max(1.0, abs(alpha0))
    if not float(g(near)) > 1e6:
        raise HypothesisViolation("g-unbounded", f"g({near}) = {g(near)}")
    for a, ga in zip(alphas, gv):
        below = np.linspace(0.0, ga, n_rho)
        above = ga * np.logspace(0.0, 12.0, n_rho)
        pb = np.asarray(p(a, below), dtype=float)
        pa = np.asarray(p(a, above), dtype=float)
        allv = np.concatenate([pb, pa])
        if np.any(allv < -1e-15) or np.any(allv > 1 + 1e-12):
            raise HypothesisViolation("range", f"p outside [0, 1] at alpha={a}")
        if np.any(np.abs(pb - 1.0) > 1e-12):
            raise HypothesisViolation("p=1-below-g", f"alpha={a}")
        if np.any(np.diff(allv) > 1e-12):
            raise HypothesisViolation("monotone", f"p increases in rho at alpha={a}")
        if not pa[-1] <= 1e-6:
            raise HypothesisViolation("decay", f"p(alpha={a}, {above[-1]:.3g}) = {pa[-1]}")


def check_family_hypotheses(family: SyntheticFamily, ms, T: float, n_t: int = 2001) -> None:
    """Non-negativity, uniform L¹ bound and pointwise convergence on a sample grid."""
    ts = np.linspace(0.0, T, n_t)
    for m in ms:
        vals = np.asarray(family.evaluate(m, ts), dtype=float)
        if np.any(vals < 0):
            raise HypothesisViolation("non-negativity", f"h_m < 0 for m={m}")
        total = _integrate(lambda t: family.evaluate(m, t), T, family.breakpoints(m))
        if total > family.bound * (1 + 1e-9):
            raise HypothesisViolation("L1-bound", f"int h_m = {total} > B = {family.bound} at m={m}")
    m_last = max(ms)
    lo, hi = family.null_set(m_last)
    off = (ts < lo) | (ts > hi)
    gap = np.abs(np.asarray(family.evaluate(m_last, ts[off])) - family.limit(ts[off]))
    if gap.size and gap.max() > 1e-9 * (1 + np.abs(family.limit(ts[off])).max()):
        raise HypothesisViolation("pointwise-convergence", f"max |h_m - h| = {gap.max()} at m={m_last}")


def _integrate(func, T, breaks=()) -> float:
    pts = sorted({0.0, T, *[b for b in breaks if 0.0 < b < T]})
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        val, _ = quad(lambda x: float(func(np.array(x))), a, b, limit=200, epsabs=1e-13, epsrel=1e-12)
        total += val
    return total


# weighted convergence

@dataclass(frozen=True)
class WCReport:
    alphas: tuple[float, ...]
    ms: tuple[int, ...]
    table: np.ndarray
    plain: tuple[float, ...]
    limit_integral: float
    diagonal: tuple[tuple[float, int, float], ...]
    corner_distance: float
    monotone: bool
    passed: bool
    tolerance: float
    family: str
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "seed": self.seed,
            "alphas": list(self.alphas),
            "ms": list(self.ms),
            "weighted": self.table.tolist(),
            "plain": list(self.plain),
            "limit_integral": self.limit_integral,
            "diagonal": [{"alpha": a, "m": m, "distance": d} for a, m, d in self.diagonal],
            "corner_distance": self.corner_distance,
            "monotone": self.monotone,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


def wc_weighted_limit(
    family: SyntheticFamily,
    g=tan_threshold,
    p=weight,
    alphas=(0.9, 0.99, 0.999),
    ms=(10**3, 10**5, 10**7),
    T: float = 1.0,
    tol: float = 1e-3,
    alpha0: float = 1.0,
) -> WCReport:
    """Table of ∫₀ᵀ h_m p(α, h_m) over (α, m) and its distance to ∫₀ᵀ h.

    The diagonal pairs alphas[j] with ms[j].  Passes when the corner distance is
    within ``tol`` and distances do not increase along the diagonal.
    """
    alphas = tuple(float(a) for a in alphas)
    ms = tuple(int(m) for m in ms)
    check_weight_hypotheses(p, g, alphas, alpha0)
    check_family_hypotheses(family, ms, T)
    target = _integrate(family.limit, T)
    table = np.empty((len(alphas), len(ms)))
    for i, a in enumerate(alphas):
        for j, m in enumerate(ms):
            def f(t, a=a, m=m):
                hv = family.evaluate(m, t)
                return hv * p(a, hv)

            table[i, j] = _integrate(f, T, family.breakpoints(m))
    plain = tuple(_integrate(lambda t, m=m: family.evaluate(m, t), T, family.breakpoints(m)) for m in ms)
    k = min(len(alphas), len(ms))
    diag = tuple((alphas[j], ms[j], float(abs(table[j, j] - target))) for j in range(k))
    dists = [d for _, _, d in diag]
    monotone = all(b <= a + 1e-12 for a, b in zip(dists, dists[1:]))
    corner = float(abs(table[-1, -1] - target))
    return WCReport(
        alphas, ms, table, plain, target, diag, corner, monotone,
        bool(corner <= tol and monotone), tol, family.description, family.seed,
    )


# interpolation inequality

def interpolation_exponent(r: float, q: float, dim: int) -> float:
    """a solving a(1/2 − 2/dim) + (1 − a)/q = 1/r; must lie in [0, 1)."""
    if not (r >= 1 and q >= 1):
        raise ValueError(f"r and q must be >= 1, got r={r}, q={q}")
    inv_r = 0.0 if math.isinf(r) else 1.0 / r
    inv_q = 0.0 if math.isinf(q) else 1.0 / q
    denom = 0.5 - 2.0 / dim - inv_q
    if denom == 0:
        raise ValueError(f"no interpolation exponent for r={r}, q={q}, dim={dim}")
    a = (inv_r - inv_q) / denom
    if not 0.0 <= a < 1.0:
        raise ValueError(f"interpolation exponent a={a} outside [0, 1)")
    return a


def interpolation_ratio(u: SpectralField, r: float, q: float) -> float:
    """‖u‖_r / (‖PΔu‖₂^a ‖u‖_q^{1−a}) with a from :func:`interpolation_exponent`."""
    a = interpolation_exponent(r, q, u.grid.dim)
    pu = project_div_free(u)
    k2 = u.grid.k2
    lap = math.sqrt(u.grid.volume * float((k2 * k2 * np.abs(pu.coeffs) ** 2).sum()))
    ur, uq = _lebesgue_norms(u, (r, q))
    denom = lap**a * uq ** (1.0 - a)
    if denom == 0 or not math.isfinite(denom):
        raise ValueError("zero denominator in interpolation ratio")
    return ur / denom


def _lebesgue_norms(u: SpectralField, qs) -> list[float]:
    """Grid L^q norms of |u| for several q from one inverse transform; matches :func:`lq_norm`."""
    mag = np.sqrt((u.to_physical() ** 2).sum(axis=0))
    cell = (2.0 * math.pi / u.grid.n) ** u.grid.dim
    return [float(mag.max()) if math.isinf(q) else float((cell * (mag**q).sum()) ** (1.0 / q)) for q in qs]


def interpolation_campaign(
    samples: int = 1000, dim: int = 3, n: int = 32, r: float = math.inf, q: float = 6.0,
    seed: int = 0, kmax_range=(2, 6), doubling: bool = True,
) -> dict:
    """Max of the interpolation ratio over random solenoidal trigonometric polynomials.

    Sample i uses seed ``seed + i`` and a band limit drawn in ``kmax_range``.
    With ``doubling``, each sample is also evaluated after exact resampling to
    2n, which refines the grid quadrature of the L^r and L^q norms.
    """
    grid = GridSpec(dim, n)
    rng = np.random.default_rng(seed)
    kmaxes = rng.integers(kmax_range[0], kmax_range[1] + 1, size=samples)
    slopes = rng.uniform(-5.0, -1.0, size=samples)
    ratios, ratios2 = [], []
    for i in range(samples):
        u = random_divfree(grid, seed + i, float(slopes[i]), 1.0, float(kmaxes[i]), energy=1.0)
        ratios.append(interpolation_ratio(u, r, q))
        if doubling:
            ratios2.append(interpolation_ratio(resample(u, 2 * n), r, q))
    out = {
        "samples": samples, "dim": dim, "n": n, "r": r if math.isfinite(r) else "inf", "q": q,
        "exponent": interpolation_exponent(r, q, dim), "seed": seed,
        "max_ratio": float(max(ratios)), "min_ratio": float(min(ratios)),
    }
    if doubling:
        m2 = float(max(ratios2))
        out["max_ratio_doubled"] = m2
        out["relative_change"] = abs(m2 - out["max_ratio"]) / out["max_ratio"]
    out["finite"] = bool(all(map(math.isfinite, ratios + ratios2)))
    return out


# LD limit

def ld_limit(alphas) -> dict:
    """(1−α)tan(απ/2) and its distance to 2/π along the given α."""
    alphas = sorted(float(a) for a in alphas)
    rows = [{"alpha": a, "value": ld_value(a), "distance": abs(ld_value(a) - 2.0 / math.pi)} for a in alphas]
    d = [row["distance"] for row in rows]
    return {"rows": rows, "limit": 2.0 / math.pi, "monotone": all(b < a for a, b in zip(d, d[1:]))}
