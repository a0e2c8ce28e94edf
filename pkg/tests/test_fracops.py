import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_field
from lpregularity.dyadic import sobolev_ensemble_field
from lpregularity.errors import DegenerateError, InsufficientDataError, ParameterError
from lpregularity.fracops import (
    FracParams,
    _bump,
    _periodic_distance,
    check_admissible,
    commutator_decay_slope,
    cutoff_field,
    frac_laplacian,
    localize,
    log2_slope,
    manufacture_potential,
)
from lpregularity.grid import Field, PeriodicGrid, character, lp_norm


@pytest.mark.parametrize(
    "n,alpha,s,needle",
    [(2, 1.0, 0.5, "2*alpha < n"), (2, 0.75, 1.0, "2*s < n"), (3, 1.0, 0.2, "2*alpha - n/2 < s")],
)
def test_admissibility_names_failed_inequality(n, alpha, s, needle):
    with pytest.raises(ParameterError, match=needle.replace("*", r"\*")):
        check_admissible(n, alpha, s)


def test_frac_params_ok():
    fp = FracParams(2, 0.75, 0.9)
    assert fp.critical_exponent == pytest.approx(4 / 3)


@pytest.mark.parametrize("alpha,factor", [(1.0, 25.0), (0.5, 5.0)])
def test_frac_laplacian_on_character(alpha, factor):
    g = PeriodicGrid(2, 32)
    f = character(g, (3, 4))
    assert np.allclose(frac_laplacian(f, alpha).samples, factor * f.samples, atol=1e-11)


def test_frac_laplacian_kills_constants_and_rejects_alpha():
    g = PeriodicGrid(1, 16)
    assert np.abs(frac_laplacian(Field(g, np.ones(16)), 0.3).samples).max() < 1e-14
    with pytest.raises(ParameterError):
        frac_laplacian(Field(g, np.ones(16)), 0)


@given(st.floats(0.05, 1.5), st.floats(0.05, 1.5), st.integers(0, 1000))
def test_frac_laplacian_composition(a, b, seed):
    g = PeriodicGrid(2, 16)
    f = random_field(g, np.random.default_rng(seed))
    lhs = frac_laplacian(frac_laplacian(f, a), b)
    rhs = frac_laplacian(f, a + b)
    assert lp_norm(lhs - rhs, 2) <= 1e-12 * lp_norm(rhs, 2)
    assert lp_norm(frac_laplacian(f, a), 2) <= g.max_frequency ** (2 * a) * lp_norm(f, 2) * (1 + 1e-12)


def test_cutoff_shape():
    g = PeriodicGrid(1, 256)
    rho = 0.6
    eta = cutoff_field(g, rho).samples.real
    d = _periodic_distance(g, np.pi)
    assert eta[np.argmin(d)] == 1.0
    assert np.all(eta[d <= rho] == 1.0) and np.all(eta[d >= 2 * rho] == 0.0)
    assert np.all((eta >= 0) & (eta <= 1))
    x = g.coordinates[0]
    ray = eta[(x >= np.pi)]
    assert np.all(np.diff(ray) <= 0)


def test_cutoff_2d_at_three_rho():
    g = PeriodicGrid(2, 64)
    eta = cutoff_field(g, 0.5, center=(1.0, 2.0))
    d = _periodic_distance(g, (1.0, 2.0))
    assert np.all(eta.samples[d >= 1.5] == 0)


@pytest.mark.parametrize("rho", [0.0, -1, np.pi / 2, 2.0])
def test_cutoff_rejects_radius(rho):
    with pytest.raises(ParameterError):
        cutoff_field(PeriodicGrid(1, 32), rho)


def test_localize_identity_random(rng):
    g = PeriodicGrid(2, 64)
    u, V = random_field(g, rng), random_field(g, rng)
    loc = localize(u, V, 1.0, 0.6)
    assert loc.residual <= 1e-10
    assert np.allclose(loc.u_loc.samples, (cutoff_field(g, 1.0) * u).samples)
    assert np.allclose(loc.V_loc.samples, (_bump(g, 2.0, None) * V).samples)


def test_localize_near_max_radius_single_mode():
    g = PeriodicGrid(2, 64)
    loc = localize(character(g, (5, 2)), Field.zeros(g), 0.99 * np.pi / 2, 0.8)
    assert loc.residual <= 1e-10


def test_localize_zero_u():
    g = PeriodicGrid(1, 64)
    loc = localize(Field.zeros(g), Field.zeros(g), 1.0, 1.0)
    assert np.all(loc.F.samples == 0)


def test_commutator_of_constant_lives_on_transition():
    # F = Delta(eta) for u = 1; inside B_rho it vanishes up to spectral leakage,
    # which decays as the grid is refined
    interior = []
    for N in (64, 128, 256):
        g = PeriodicGrid(2, N)
        F = localize(Field(g, np.ones(g.shape)), Field.zeros(g), 1.5, 1.0).F
        d = _periodic_distance(g, np.pi)
        interior.append(np.abs(F.samples[d < 0.5 * 1.5]).max())
        peak = np.abs(F.samples).max()
    assert interior[0] > interior[1] > interior[2]
    assert interior[2] <= 1e-6 * peak


def test_commutator_slope_smooth_u():
    g = PeriodicGrid(2, 128)
    u = Field.from_function(g, lambda x, y: 1 + 0.3 * np.cos(x) * np.sin(2 * y))
    F = localize(u, Field.zeros(g), 1.0, 1.0).F
    assert commutator_decay_slope(F, 1.0, 1.0).slope <= (2 * 1.0 - 1.0 - 1) + 0.3


def test_commutator_slope_stable_under_doubling():
    # rough u in H^0.75: band norms of F grow at the rate 1 - 0.75
    slopes = {}
    for N in (128, 256):
        g = PeriodicGrid(2, N)
        s = [
            commutator_decay_slope(localize(sobolev_ensemble_field(g, 0.75, seed), Field.zeros(g), 1.5, 1.0).F, 1.0, 1.0).slope
            for seed in range(8)
        ]
        slopes[N] = float(np.mean(s))
    assert abs(slopes[256] - slopes[128]) < 0.1


def test_commutator_slope_errors():
    with pytest.raises(InsufficientDataError):
        commutator_decay_slope(Field.zeros(PeriodicGrid(2, 64)), 1, 1)
    with pytest.raises(InsufficientDataError):
        commutator_decay_slope(character(PeriodicGrid(1, 8), 1), 1, 1)


def test_log2_slope():
    fit = log2_slope([1, 2, 3, 4], [2.0, 4.0, 8.0, 0.0])
    assert fit.slope == pytest.approx(1.0) and fit.bands == (1, 2, 3)
    with pytest.raises(InsufficientDataError):
        log2_slope([1, 2], [1.0, 0.0])


def test_manufactured_potential():
    g = PeriodicGrid(2, 32)
    assert np.abs(manufacture_potential(Field(g, np.ones(g.shape)), 0.7, 0.5).samples).max() < 1e-13
    u = 1 + 0.1 * character(g, (3, 1))
    V = manufacture_potential(u, 0.7, 0.5)
    lap = frac_laplacian(u, 0.7)
    assert lp_norm(lap + V * u, 2) <= 1e-10 * lp_norm(lap, 2)
    with pytest.raises(DegenerateError):
        manufacture_potential(character(g, (1, 0)) + 1, 0.7, 0.1)
    with pytest.raises(ParameterError):
        manufacture_potential(u, 0.7, 0.0)


def test_delta_shrinks_with_radius():
    g = PeriodicGrid(2, 128)
    d = _periodic_distance(g, np.pi)
    V = Field(g, np.maximum(d, np.pi / g.N) ** -0.8)  # beta * n/2alpha = 0.8 * 4/3 < 2
    radii = [0.7, 0.5, 0.3, 0.2, 0.1, 0.05, 0.03]
    deltas = [lp_norm(_bump(g, 2 * r, None) * V, 4 / 3) for r in radii]
    assert all(b <= a for a, b in zip(deltas, deltas[1:]))
    assert deltas[-1] < 0.1 * deltas[0]
