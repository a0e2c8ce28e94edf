import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_field
from lpregularity.dyadic import build_partition, random_band_limited, sobolev_ensemble_field
from lpregularity.errors import ParameterError
from lpregularity.grid import Field, PeriodicGrid, character, lp_norm
from lpregularity.paraproduct import (
    TERMS,
    ZONES,
    BandFactors,
    Zone,
    classify,
    decompose,
    estimate_rhs,
    fit_estimate_constant,
    outside_pairs,
    pair_vanishes,
    scan_range,
    vanishing_check,
    zone_pairs,
    zone_sum,
)


@pytest.mark.parametrize(
    "ijk,zone",
    [((7, 12, 10), Zone.LL), ((0, 10, 10), Zone.LH), ((17, 18, 10), Zone.HH), ((2, 2, 10), Zone.OUTSIDE), ((10, 0, 10), Zone.HL)],
)
def test_classify_examples(ijk, zone):
    assert classify(*ijk) is zone


def test_vanishing_examples():
    assert vanishing_check(2, 2, 10)
    assert not vanishing_check(9, 10, 10)
    assert not vanishing_check(16, 17, 10)
    assert classify(16, 17, 10) is Zone.HH


@given(st.integers(-5, 40), st.integers(-5, 40), st.integers(1, 30))
def test_outside_pairs_vanish_in_the_continuum(i, j, k):
    # every pair not in a zone is certified by interval arithmetic
    if classify(i, j, k) is Zone.OUTSIDE:
        assert vanishing_check(i, j, k)


def test_zones_are_disjoint_and_cover():
    for k in range(1, 25):
        for i, j in itertools.product(range(-3, 40), repeat=2):
            hits = [
                k - 5 <= i <= k + 7 and k - 5 <= j <= k + 7 and min(i, j) <= k + 5,
                i < k - 5 and k - 3 <= j <= k + 3,
                k - 3 <= i <= k + 3 and j < k - 5,
                i > k + 5 and j > k + 5 and abs(i - j) <= 3,
            ]
            assert sum(hits) <= 1
            assert any(hits) or vanishing_check(i, j, k)


def test_grid_indexing_low_block():
    # the low block sits in B_2 rather than an annulus
    assert not pair_vanishes(0, 1, 1)
    assert not pair_vanishes(0, 0, 3)  # B_4 touches the closed annulus of band 3
    assert pair_vanishes(0, 0, 4)


def test_zone_sum_zero_potential():
    g = PeriodicGrid(2, 64)
    u = random_field(g, np.random.default_rng(0))
    for z in ZONES:
        assert np.all(zone_sum(Field.zeros(g), u, 5, z).samples == 0)
    with pytest.raises(ParameterError):
        zone_sum(u, u, 5, Zone.OUTSIDE)
    with pytest.raises(ParameterError):
        zone_sum(u, u, 0, Zone.LL)


def test_single_pair_hits_one_zone():
    g = PeriodicGrid(2, 128)
    part = build_partition(g)
    V = character(g, (40, 0))  # band 5 only
    u = character(g, (0, 2))  # band 1 only
    for k in part.bands:
        norms = {z: lp_norm(zone_sum(V, u, k, z, part), 2) for z in ZONES}
        nonzero = [z for z, v in norms.items() if v > 1e-12]
        assert len(nonzero) <= 1
        if nonzero:
            assert classify(5, 1, k) is nonzero[0]


@given(st.integers(0, 10_000), st.sampled_from([32, 64, 128]))
def test_decomposition_identity(seed, N):
    g = PeriodicGrid(2, N)
    rng = np.random.default_rng(seed)
    V, u = random_field(g, rng), random_field(g, rng)
    part = build_partition(g)
    fac = BandFactors(V, u, part)
    for k in part.bands:
        assert decompose(V, u, k, part, fac).within_tolerance()


def test_decompose_zero_and_swap(rng):
    g = PeriodicGrid(2, 64)
    V, u = random_field(g, rng), random_field(g, rng)
    d0 = decompose(Field.zeros(g), u, 4)
    assert d0.residual == 0 and all(np.all(t.samples == 0) for t in d0.terms.values())
    for k in (3, 5, 6):
        a, b = decompose(V, u, k), decompose(u, V, k)
        assert np.allclose(a.I.samples, b.I.samples, atol=1e-12)
        assert np.allclose(a.II.samples, b.III.samples, atol=1e-12)
        assert np.allclose(a.IV.samples, b.IV.samples, atol=1e-12)


def test_outside_pairs_numerically_zero(rng):
    g = PeriodicGrid(2, 128)
    V, u = random_field(g, rng), random_field(g, rng)
    part = build_partition(g)
    fac = BandFactors(V, u, part)
    for k in part.bands:
        for i, j, cert, norm in outside_pairs(V, u, k, part, fac):
            assert cert or norm <= 1e-10 * lp_norm(V, 2) * lp_norm(u, 2)


def test_scan_range():
    assert scan_range(build_partition(PeriodicGrid(2, 128))) == [4, 5, 6, 7]
    assert scan_range(build_partition(PeriodicGrid(1, 256))) == [4, 5, 6, 7]


def test_estimate_rhs_hand_computed():
    a = np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0])
    delta, n, alpha, s, k = 0.5, 2, 0.75, 1.0, 7
    lead = delta * 2 ** ((2 * alpha - s) * k)
    assert estimate_rhs("I+II", k, a, delta, n, alpha, s) == pytest.approx(lead * a[2:].sum())
    j = np.array([1, 2])
    iii = delta * 2 ** ((2 * alpha - 1) * k) * a[0] + lead * np.sum(a[j] * 2.0 ** ((1 - s) * (j - k)))
    assert estimate_rhs("III", k, a, delta, n, alpha, s) == pytest.approx(iii)
    assert estimate_rhs("IV", k, a, delta, n, alpha, s) == pytest.approx(lead * a[7])
    # big regime: n > 4 alpha
    alpha = 0.4
    lead = delta * 2 ** ((2 * alpha - s) * k)
    iii = delta * a[0] + lead * np.sum(a[j] * 2.0 ** ((2 * alpha - s) * (j - k)))
    assert estimate_rhs("III", k, a, delta, n, alpha, s) == pytest.approx(iii)
    with pytest.raises(ParameterError):
        estimate_rhs("V", k, a, delta, n, alpha, s)


def test_fit_zero_potential_gives_zero():
    g = PeriodicGrid(2, 64)
    u = sobolev_ensemble_field(g, 1.5, 0)
    for term in TERMS:
        assert fit_estimate_constant(term, Field.zeros(g), u, 1.0, 0.75).constant == 0


def test_fit_bounds_every_band():
    g = PeriodicGrid(2, 128)
    V, u = sobolev_ensemble_field(g, 1.0, 1000), sobolev_ensemble_field(g, 1.5, 0)
    for term in TERMS:
        fit = fit_estimate_constant(term, V, u, 1.0, 0.75)
        assert np.isfinite(fit.constant)
        for left, right in zip(fit.lhs, fit.rhs):
            assert left <= fit.constant * right * (1 + 1e-12)
        assert fit.regime == "n<=4alpha"
    assert fit_estimate_constant("IV", V, u, 1.0, 0.75).zone_empty


def test_fit_unknown_term():
    g = PeriodicGrid(2, 64)
    u = random_band_limited(g, 30, np.random.default_rng(1))
    with pytest.raises(ParameterError):
        fit_estimate_constant("II", u, u, 1.0, 0.75)


def test_iii_constant_stable_once_band_six_is_resolved():
    # at N=64 the HL zone exists only in the truncated top band; from N=128 on
    # that band is fully resolved and the constant settles
    consts = {}
    for N in (128, 256):
        g = PeriodicGrid(2, N)
        part = build_partition(g)
        c = 0.0
        for seed in range(8):
            u, V = sobolev_ensemble_field(g, 1.5, seed), sobolev_ensemble_field(g, 1.0, 1000 + seed)
            c = max(c, fit_estimate_constant("III", V, u, 1.0, 0.75, part).constant)
        consts[N] = c
    assert 0.5 < consts[256] / consts[128] < 2
