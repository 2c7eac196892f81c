"""Manufactured scalar series with closed-form energy, for budget and excursion tests."""

import math

import numpy as np
from scipy.special import erf

from nslab.trajectory import TrajectoryRecord


def bump_rho(t, base, amp, center, width):
    return base + amp * np.exp(-(((t - center) / width) ** 2))


def bump_record(times, base=0.5, amp=10.0, center=0.5, width=0.08, e0=20.0, nu=1.0, f0=0.0):
    """ρ a Gaussian bump over a constant, (f, v) ≡ f0, E solving E' = −2νρ + 2f0 exactly."""
    t = np.asarray(times, dtype=float)
    rho = bump_rho(t, base, amp, center, width)
    integral = base * t + amp * width * math.sqrt(math.pi) / 2 * (erf((t - center) / width) - erf(-center / width))
    energy = e0 - 2.0 * nu * integral + 2.0 * f0 * t
    return TrajectoryRecord.synthetic(t, energy, rho, fwork=np.full_like(t, f0), nu=nu)


def random_piecewise_rho(rng, n=401, T=1.0):
    """Sum of random bumps and one random kink; non-negative, piecewise smooth."""
    t = np.linspace(0.0, T, n)
    rho = np.full_like(t, rng.uniform(0.0, 2.0))
    for _ in range(rng.integers(1, 5)):
        c, w, a = rng.uniform(0, T), rng.uniform(0.02, 0.2) * T, rng.uniform(0.5, 8.0)
        rho += a * np.exp(-(((t - c) / w) ** 2))
    k = rng.uniform(0.2, 0.8) * T
    rho += rng.uniform(0.0, 3.0) * np.maximum(0.0, 1.0 - np.abs(t - k) / (0.1 * T))
    return t, rho
