import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_field
from lpregularity.errors import InvalidInputError, ParameterError
from lpregularity.grid import (
    Field,
    PeriodicGrid,
    SpectralField,
    character,
    forward_transform,
    inverse_transform,
    load_field,
    lp_norm,
    save_field,
)


@pytest.mark.parametrize("n,N", [(0, 16), (4, 16), (2, 12), (2, 4), (1, 512)])
def test_grid_rejects_bad_shapes(n, N):
    with pytest.raises(ParameterError):
        PeriodicGrid(n, N)


def test_grid_invariants():
    g = PeriodicGrid(3, 16)
    assert g.size == 16**3
    assert g.max_frequency == pytest.approx(8 * np.sqrt(3))
    assert g.frequency_magnitude.max() == pytest.approx(g.max_frequency)
    assert g.centered_index((-8, 0, 7)) == (0, 8, 15)


def test_field_rejects_nonfinite_and_wrong_size(grid2):
    bad = np.zeros(grid2.shape)
    bad[0, 0] = np.nan
    with pytest.raises(InvalidInputError):
        Field(grid2, bad)
    with pytest.raises(InvalidInputError):
        Field(grid2, np.zeros(10))


def test_field_is_immutable(grid2):
    f = Field.zeros(grid2)
    with pytest.raises(ValueError):
        f.samples[0, 0] = 1


def test_constant_transform(grid2):
    g = forward_transform(Field(grid2, np.full(grid2.shape, 3.0 - 1j)))
    assert g[(0, 0)] == pytest.approx(3.0 - 1j)
    mask = np.ones(grid2.shape, bool)
    mask[grid2.centered_index((0, 0))] = False
    assert np.abs(g.coefficients[mask]).max() < 1e-14


@pytest.mark.parametrize("xi", [(3, -4), (-16, 15), (0, 1)])
def test_character_has_single_coefficient(grid2, xi):
    g = forward_transform(character(grid2, xi))
    assert g[xi] == pytest.approx(1.0, abs=1e-13)
    assert np.sum(np.abs(g.coefficients) > 1e-12) == 1


def test_inverse_of_single_coefficient(grid2):
    c = np.zeros(grid2.shape, complex)
    c[grid2.centered_index((2, 5))] = 1
    f = inverse_transform(SpectralField(grid2, c))
    assert np.allclose(f.samples, character(grid2, (2, 5)).samples, atol=1e-13)
    assert np.all(inverse_transform(SpectralField(grid2, np.zeros(grid2.shape))).samples == 0)


def test_plancherel_n2_N16(rng):
    g = PeriodicGrid(2, 16)
    f = random_field(g, rng)
    lhs = np.sum(np.abs(forward_transform(f).coefficients) ** 2)
    rhs = np.mean(np.abs(f.samples) ** 2)
    assert abs(lhs - rhs) <= 1e-12 * rhs


@given(st.integers(1, 3), st.sampled_from([8, 16]), st.integers(0, 2**32 - 1))
def test_round_trip_and_linearity(n, N, seed):
    g = PeriodicGrid(n, N)
    r = np.random.default_rng(seed)
    f, h = random_field(g, r), random_field(g, r)
    back = inverse_transform(forward_transform(f))
    assert np.linalg.norm(back.samples - f.samples) <= 1e-12 * np.linalg.norm(f.samples)
    a, b = 0.3 - 2j, 1.7
    lhs = forward_transform(a * f + b * h).coefficients
    rhs = a * forward_transform(f).coefficients + b * forward_transform(h).coefficients
    assert np.abs(lhs - rhs).max() <= 1e-12 * np.abs(rhs).max()


@pytest.mark.parametrize("p", [1, 1.5, 2, 7, np.inf])
def test_lp_norm_constants_and_characters(grid2, p):
    assert lp_norm(Field(grid2, np.full(grid2.shape, 2.0)), p) == pytest.approx(2.0)
    assert lp_norm(character(grid2, (5, -3)), p) == pytest.approx(1.0)


def test_lp_norm_half_indicator(grid2):
    x = np.zeros(grid2.shape)
    x[: grid2.N // 2] = 1
    assert lp_norm(Field(grid2, x), 2) == pytest.approx(0.5**0.5)


def test_lp_norm_rejects_small_p(grid2):
    with pytest.raises(ParameterError):
        lp_norm(Field.zeros(grid2), 0.5)


@given(st.floats(1.05, 20), st.integers(0, 1000))
def test_holder(p, seed):
    g = PeriodicGrid(2, 16)
    r = np.random.default_rng(seed)
    f, h = random_field(g, r), random_field(g, r)
    q = p / (p - 1)
    assert lp_norm(f * h, 1) <= lp_norm(f, p) * lp_norm(h, q) * (1 + 1e-12)


def test_large_p_does_not_overflow(grid2):
    f = Field(grid2, np.full(grid2.shape, 1e200))
    assert lp_norm(f, 50) == pytest.approx(1e200)


@pytest.mark.parametrize("fmt", ["bin", "csv"])
def test_serialization_round_trip(tmp_path, rng, fmt):
    f = random_field(PeriodicGrid(2, 8), rng)
    path = tmp_path / f"f.{fmt}"
    save_field(path, f, fmt)
    g = load_field(path)
    assert g.grid == f.grid
    assert np.array_equal(g.samples, f.samples)


def test_binary_layout(tmp_path):
    f = Field(PeriodicGrid(1, 8), np.arange(8) + 0.5j)
    path = tmp_path / "f.bin"
    save_field(path, f)
    raw = path.read_bytes()
    assert raw[:4] == b"LPF1"
    assert np.frombuffer(raw[4:12], "<i4").tolist() == [1, 8]
    assert np.frombuffer(raw[12:], "<f8")[:4].tolist() == [0.0, 0.5, 1.0, 0.5]


def test_load_rejects_truncated(tmp_path):
    f = Field(PeriodicGrid(1, 8), np.ones(8))
    path = tmp_path / "f.bin"
    save_field(path, f)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(InvalidInputError):
        load_field(path)
