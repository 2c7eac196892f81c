"""Named verification suites shared by ``nslab lemmas`` and the acceptance tests.

Each suite returns a JSON-ready dict with a boolean ``pass`` and the numbers
behind it.
"""

from __future__ import annotations

import time

import numpy as np

from . import identities, lemmas, presets
from .solver import run

__all__ = [
    "SELECTORS",
    "identity_suite",
    "cl_suite",
    "wc_suite",
    "ld_suite",
    "interp_suite",
    "run_lemmas",
]

SELECTORS = ("wc", "cl", "interp", "ld", "all")


def identity_suite(dts=(4e-3, 2e-3, 1e-3), scheme: str = "rk4", n: int = 32, seed: int = 0,
                   min_order: float = 1.8, max_residual: float = 1e-5) -> dict:
    """Energy and enstrophy identity residuals under dt refinement on smooth random data."""
    er, en, proof = [], [], None
    for dt in dts:
        traj = run(presets.random_config(n=n, dt=dt, seed=seed, scheme=scheme))
        er.append(identities.energy_identity_residual(traj).max_abs)
        en.append(identities.enstrophy_identity_residual(traj).max_abs)
        proof = identities.proof_chain_checks(traj)
    er_orders = identities.convergence_orders(dts, er)
    en_orders = identities.convergence_orders(dts, en)
    er_ok = bool(np.all(er_orders >= min_order) and er[-1] <= max_residual)
    en_ok = bool(np.all(en_orders >= min_order))
    return {
        "scheme": scheme,
        "seed": seed,
        "dts": list(dts),
        "energy": {"max_residual": er, "orders": er_orders.tolist(), "pass": er_ok},
        "enstrophy": {"max_residual": en, "orders": en_orders.tolist(), "pass": en_ok},
        "proof_chain": proof,
        "pass": er_ok and en_ok and bool(proof["pdelta_vt_holds"]),
    }


def cl_suite(ms=(8, 16, 32), n: int = 64, seed: int = 3, max_variation: float = 0.2) -> dict:
    """sup over the m-sweep of ∫|ρ̇|/(1+ρ)², and its relative spread across m."""
    rows = []
    for m in ms:
        traj = run(presets.cl_config(n=n, seed=seed, m=m))
        rep = identities.cl_functional(traj)
        rows.append({"m": m, "value": rep.value, "companion": rep.companion,
                     "energy_form": rep.energy_form, "rho_max": float(traj.rho.max())})
    vals = [r["value"] for r in rows]
    sup = max(vals)
    variation = (sup - min(vals)) / sup if sup > 0 else 0.0
    return {
        "seed": seed,
        "n": n,
        "rows": rows,
        "sup": sup,
        "variation": variation,
        "pass": bool(np.isfinite(sup) and variation <= max_variation),
    }


def wc_suite(seed: int | None = None, tol: float = 1e-3) -> dict:
    t0 = time.perf_counter()
    family = lemmas.spike_family(seed=seed)
    rep = lemmas.wc_weighted_limit(family, tol=tol)
    mass_gap = min(abs(p - rep.limit_integral) for p in rep.plain)
    out = rep.to_dict()
    out["plain_gap"] = mass_gap
    out["runtime"] = time.perf_counter() - t0
    out["pass"] = bool(rep.passed and mass_gap >= 0.5)
    return out


def ld_suite(alphas=(0.9, 0.99, 0.999), tol: float = 1e-3) -> dict:
    out = lemmas.ld_limit(alphas)
    out["pass"] = bool(out["monotone"] and out["rows"][-1]["distance"] <= tol)
    return out


def interp_suite(samples: int = 1000, seed: int = 0, n: int = 32, max_change: float = 0.05) -> dict:
    """Sampling campaign for the r=∞, q=6 interpolation ratio in 3D.

    No bound on the ratio is asserted; the suite passes when every ratio is
    finite and the maximum moves by at most ``max_change`` under doubling.
    """
    out = lemmas.interpolation_campaign(samples=samples, dim=3, n=n, seed=seed)
    out["pass"] = bool(out["finite"] and out["relative_change"] <= max_change)
    return out


def run_lemmas(selector: str = "all", seed: int = 0, samples: int = 1000) -> dict:
    """Run the suites picked by ``selector``; ``cl`` includes the solver identity suite."""
    if selector not in SELECTORS:
        raise ValueError(f"unknown selector {selector!r}; choose from {', '.join(SELECTORS)}")
    want = set(SELECTORS[:-1]) if selector == "all" else {selector}
    suites = {}
    if "ld" in want:
        suites["ld"] = ld_suite()
    if "wc" in want:
        suites["wc"] = wc_suite()
    if "cl" in want:
        suites["identities"] = identity_suite(seed=seed)
        suites["cl"] = cl_suite()
    if "interp" in want:
        suites["interp"] = interp_suite(samples=samples, seed=seed)
    return {
        "selector": selector,
        "seed": seed,
        "suites": suites,
        "pass": all(s["pass"] for s in suites.values()),
    }
