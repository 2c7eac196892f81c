import math

import numpy as np
import pytest

from nslab.budget import weight
from nslab.lemmas import (
    HypothesisViolation,
    SyntheticFamily,
    check_weight_hypotheses,
    constant_family,
    interpolation_campaign,
    interpolation_exponent,
    interpolation_ratio,
    ld_limit,
    oscillating_mass_family,
    spike_family,
    tan_threshold,
    wc_weighted_limit,
)
from nslab.presets import random_divfree
from nslab.spectral import GridSpec, SpectralField


def test_wc_constant_family():
    rep = wc_weighted_limit(constant_family())
    assert rep.passed
    assert rep.corner_distance < 1e-12


def test_wc_spike_family():
    rep = wc_weighted_limit(spike_family())
    assert rep.passed
    assert rep.corner_distance <= 1e-3
    assert all(abs(p - rep.limit_integral - 1.0) < 1e-9 for p in rep.plain)
    d = [x for _, _, x in rep.diagonal]
    assert d[0] > d[1] > d[2]


def test_wc_spike_position_seeded():
    a = wc_weighted_limit(spike_family(seed=11))
    b = wc_weighted_limit(spike_family(seed=11))
    assert a.passed and a.seed == 11
    assert np.array_equal(a.table, b.table)


def test_wc_oscillating_mass():
    rep = wc_weighted_limit(oscillating_mass_family(), ms=(1000, 100_000, 10_000_000))
    assert rep.passed
    odd = wc_weighted_limit(oscillating_mass_family(), ms=(1001, 100_001, 10_000_001))
    # without a spike the plain integrals already equal ∫h
    assert all(abs(p - odd.limit_integral) < 1e-9 for p in odd.plain)


def test_theorem_weight_meets_hypotheses():
    check_weight_hypotheses(weight, tan_threshold, [0.5, 0.9, 0.99, 0.999])


def test_degenerate_weight_rejected():
    with pytest.raises(HypothesisViolation) as info:
        wc_weighted_limit(spike_family(), p=lambda a, r: np.ones_like(np.asarray(r, dtype=float)))
    assert info.value.hypothesis == "decay"


def test_weight_hypothesis_names():
    with pytest.raises(HypothesisViolation) as info:
        check_weight_hypotheses(lambda a, r: np.where(np.asarray(r) < 1, 1.0, 0.5), tan_threshold, [0.9])
    assert info.value.hypothesis == "p=1-below-g"
    with pytest.raises(HypothesisViolation) as info:
        check_weight_hypotheses(weight, lambda a: 5.0 - a, [0.5, 0.9])
    assert info.value.hypothesis == "g-increasing"
    with pytest.raises(HypothesisViolation) as info:
        check_weight_hypotheses(weight, lambda a: a, [0.5, 0.9])
    assert info.value.hypothesis == "g-unbounded"


def test_family_hypothesis_violations():
    neg = SyntheticFamily("negative", lambda m, t: np.asarray(t) - 0.5, lambda t: np.asarray(t) - 0.5, bound=1.0)
    with pytest.raises(HypothesisViolation) as info:
        wc_weighted_limit(neg)
    assert info.value.hypothesis == "non-negativity"

    def growing(m, t):
        return np.full_like(np.asarray(t, dtype=float), float(m))

    unbounded = SyntheticFamily("growing", growing, lambda t: 0 * np.asarray(t), bound=10.0)
    with pytest.raises(HypothesisViolation) as info:
        wc_weighted_limit(unbounded)
    assert info.value.hypothesis == "L1-bound"

    shifted = SyntheticFamily("no limit", lambda m, t: 1.0 + 0 * np.asarray(t), lambda t: 0 * np.asarray(t), bound=2.0)
    with pytest.raises(HypothesisViolation) as info:
        wc_weighted_limit(shifted)
    assert info.value.hypothesis == "pointwise-convergence"


def test_interpolation_exponent():
    assert interpolation_exponent(math.inf, 6, 3) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        # 1/2 − 2/4 − 0 = 0
        interpolation_exponent(2, math.inf, 4)
    with pytest.raises(ValueError):
        interpolation_exponent(2, 6, 3)
    with pytest.raises(ValueError):
        interpolation_exponent(0.5, 6, 3)


def test_interpolation_ratio_invariances():
    g = GridSpec(3, 16)
    u = random_divfree(g, seed=5, kmax=4.0)
    r0 = interpolation_ratio(u, math.inf, 6)
    assert interpolation_ratio(u * 3.7, math.inf, 6) == pytest.approx(r0, rel=1e-12)
    # cyclic permutation of coordinates and components
    c = np.transpose(u.coeffs, (0, 2, 3, 1))[[1, 2, 0]]
    assert interpolation_ratio(SpectralField(g, c), math.inf, 6) == pytest.approx(r0, rel=1e-12)


def test_interpolation_ratio_zero_field():
    with pytest.raises(ValueError):
        interpolation_ratio(SpectralField.zeros(GridSpec(3, 8)), math.inf, 6)


def test_interpolation_campaign_small():
    rep = interpolation_campaign(samples=10, n=16, seed=1)
    assert rep["finite"]
    assert rep["exponent"] == pytest.approx(0.5)
    assert rep["relative_change"] < 0.05


def test_ld_limit():
    rep = ld_limit([0.999, 0.9, 0.99])
    rows = rep["rows"]
    assert [r["alpha"] for r in rows] == [0.9, 0.99, 0.999]
    assert rows[0]["value"] == pytest.approx(0.6314, abs=1e-4)
    assert rows[0]["distance"] <= 1e-2
    assert rows[-1]["distance"] <= 1e-3
    assert rep["monotone"]
