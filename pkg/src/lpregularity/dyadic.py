"""Littlewood-Paley partition of unity on the periodic lattice.

The partition is generated by one smooth radial profile ``h`` with ``h = 1``
on ``[0, 1]`` and ``h = 0`` on ``[5/3, inf)``.  Band symbols are differences
of dilates,

    phi_j(xi) = h(|xi| / 2**j) - h(|xi| / 2**(j-1)),   1 <= j <= J_max,

and the low symbol is ``h(|xi|)``.  The sum telescopes to
``h(|xi| / 2**J_max)``, which is identically one on the lattice because
``J_max`` is the smallest integer with ``2**J_max >= |xi|_max``.  Band ``j`` is
supported in ``2**(j-1) < |xi| < (5/3) 2**j``.

Index 0 always refers to the low block ``P_{<=0}``; there are no negative
bands on the torus.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft

from .errors import ParameterError, PreconditionError, UndefinedRatioError
from .grid import Field, PeriodicGrid, apply_multiplier, lp_norm

__all__ = [
    "smooth_step",
    "profile",
    "DyadicPartition",
    "DyadicCoefficients",
    "build_partition",
    "project",
    "project_low",
    "project_range",
    "band_norms",
    "sobolev_norm",
    "dyadic_coefficients",
    "bernstein_ratio",
    "lattice_bernstein_bound",
    "random_band_limited",
    "sobolev_ensemble_field",
]


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, monotone in between.

    Built from ``g(t) = exp(-1/t)`` as ``g(t) / (g(t) + g(1 - t))``.
    """
    t = np.asarray(t, dtype=float)
    out = np.where(t >= 1.0, 1.0, 0.0)
    inner = (t > 0.0) & (t < 1.0)
    if np.any(inner):
        ti = t[inner]
        a = np.exp(-1.0 / ti)
        b = np.exp(-1.0 / (1.0 - ti))
        out[inner] = a / (a + b)
    return out


def profile(r):
    """Radial cutoff ``h``: 1 on ``r <= 1``, 0 on ``r >= 5/3``."""
    r = np.asarray(r, dtype=float)
    # (5/3 - r) / (2/3) written to keep h(1) == 1 exactly
    return smooth_step((5.0 - 3.0 * r) / 2.0)


@dataclass(frozen=True, eq=False)
class DyadicPartition:
    """Band symbols in FFT order.

    ``symbols[0]`` is the low symbol, ``symbols[j]`` is ``phi_j`` for
    ``1 <= j <= J_max``.
    """

    grid: PeriodicGrid
    J_max: int
    symbols: tuple

    @property
    def low(self):
        return self.symbols[0]

    def band(self, j):
        if not 1 <= j <= self.J_max:
            raise ParameterError(f"band index must lie in [1, {self.J_max}], got {j}")
        return self.symbols[j]

    @property
    def bands(self):
        return range(1, self.J_max + 1)

    def upper_half(self):
        """Indices of the upper half of the bands."""
        return list(range(self.J_max // 2 + 1, self.J_max + 1))


@lru_cache(maxsize=32)
def build_partition(grid: PeriodicGrid) -> DyadicPartition:
    J = 0
    while 2.0**J < grid.max_frequency:
        J += 1
    mag = grid.frequency_magnitude
    dilates = [profile(mag / 2.0**j) for j in range(J + 1)]
    symbols = [dilates[0]] + [dilates[j] - dilates[j - 1] for j in range(1, J + 1)]
    for s in symbols:
        s.setflags(write=False)
    return DyadicPartition(grid, J, tuple(symbols))


def _partition(f, partition):
    if partition is None:
        return build_partition(f.grid)
    if partition.grid != f.grid:
        raise ParameterError("partition was built for a different grid")
    return partition


def project(f: Field, j: int, partition: DyadicPartition | None = None) -> Field:
    """Littlewood-Paley projection ``P_j f`` for ``1 <= j <= J_max``."""
    part = _partition(f, partition)
    return apply_multiplier(f, part.band(j))


def project_low(f: Field, partition: DyadicPartition | None = None) -> Field:
    """Low-frequency block ``P_{<=0} f``."""
    part = _partition(f, partition)
    return apply_multiplier(f, part.low)


def project_range(f: Field, a: int, b: int, partition: DyadicPartition | None = None) -> Field:
    """``P_{a<.<b} f = sum_{j=a+1}^{b-1} P_j f`` with ``j`` clipped to the bands."""
    if a >= b:
        raise ParameterError(f"project_range needs a < b, got a={a}, b={b}")
    part = _partition(f, partition)
    lo, hi = max(a + 1, 1), min(b - 1, part.J_max)
    if lo > hi:
        return Field.zeros(f.grid)
    symbol = np.sum([part.symbols[j] for j in range(lo, hi + 1)], axis=0)
    return apply_multiplier(f, symbol)


def band_norms(f: Field, partition: DyadicPartition | None = None) -> np.ndarray:
    """``[||P_{<=0} f||_2, ||P_1 f||_2, ..., ||P_J f||_2]`` via Plancherel."""
    part = _partition(f, partition)
    power = np.abs(scipy.fft.fftn(f.samples) / f.grid.size) ** 2
    return np.sqrt([np.sum(sym**2 * power) for sym in part.symbols])


def sobolev_norm(f: Field, s: float, partition: DyadicPartition | None = None) -> float:
    """Dyadic ``H^s`` norm: ``||P_{<=0} f|| + (sum_j 4**(j s) ||P_j f||**2)**0.5``."""
    norms = band_norms(f, partition)
    j = np.arange(1, norms.size)
    return float(norms[0] + np.sqrt(np.sum((2.0 ** (j * s) * norms[1:]) ** 2)))


@dataclass(frozen=True)
class DyadicCoefficients:
    """The sequence ``a_k = 2**(s k) ||P_k u||_2``; ``values[0]`` is the low block."""

    s: float
    values: np.ndarray

    def __len__(self):
        return self.values.size

    def __getitem__(self, k):
        return self.values[k]

    def rows(self):
        return [(k, float(v)) for k, v in enumerate(self.values)]

    def to_csv(self, header=("k", "a_k")):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for k, v in self.rows():
            writer.writerow([k, repr(v)])
        return buf.getvalue()


def dyadic_coefficients(f: Field, s: float, partition: DyadicPartition | None = None) -> DyadicCoefficients:
    norms = band_norms(f, partition)
    weights = 2.0 ** (s * np.arange(norms.size))
    values = weights * norms
    values.setflags(write=False)
    return DyadicCoefficients(float(s), values)


def bernstein_ratio(f: Field, p: float, q: float, j: int, support_tol: float = 1e-12) -> float:
    """``||f||_q / (2**(n j (1/p - 1/q)) ||f||_p)`` for ``supp f_hat`` in ``B_{2^j}``.

    The support condition is checked: the spectral mass outside the closed
    ball, relative to the total, must not exceed ``support_tol``.
    """
    p, q = float(p), float(q)
    if not (1 <= p <= q):
        raise ParameterError(f"need 1 <= p <= q <= inf, got p={p}, q={q}")
    grid = f.grid
    coef = scipy.fft.fftn(f.samples) / grid.size
    total = np.sqrt(np.sum(np.abs(coef) ** 2))
    if total == 0:
        raise UndefinedRatioError("Bernstein ratio is undefined for the zero field")
    outside = grid.frequency_magnitude > 2.0**j
    leak = np.sqrt(np.sum(np.abs(coef[outside]) ** 2)) / total
    if leak > support_tol:
        raise PreconditionError(
            f"spectrum not supported in B_(2^{j}): relative outside mass {leak:.2e}"
        )
    inv = lambda r: 0.0 if r == np.inf else 1.0 / r  # noqa: E731
    scale = 2.0 ** (grid.n * j * (inv(p) - inv(q)))
    return lp_norm(f, q) / (scale * lp_norm(f, p))


def _disc_widths(r2):
    """``2 floor(sqrt(r2)) + 1`` for integer arrays ``r2 >= 0`` (exact)."""
    root = np.floor(np.sqrt(r2)).astype(np.int64)
    root -= root * root > r2
    root += (root + 1) * (root + 1) <= r2
    return 2 * root + 1


def _lattice_count(n, radius):
    """Number of points of ``Z^n`` in the closed ball of the given radius."""
    R2 = int(np.floor(radius**2))
    r = int(np.floor(radius))
    k = np.arange(-r, r + 1, dtype=np.int64)
    if n == 1:
        return 2 * r + 1
    if n == 2:
        return int(_disc_widths(R2 - k**2).sum())
    # n == 3: one slab per first coordinate
    return int(sum(_disc_widths(R2 - x * x - k[np.abs(k) ** 2 <= R2 - x * x] ** 2).sum() for x in k))


@lru_cache(maxsize=None)
def lattice_bernstein_bound(n: int, j_max: int = 12) -> float:
    """``max_j sqrt(#(Z^n cap B_{2^j})) / 2**(n j / 2)`` over ``0 <= j <= j_max``.

    For ``M`` modes, ``||f||_inf <= sqrt(M) ||f||_2`` and
    ``||f||_2 <= sqrt(M) ||f||_1`` on the probability torus, and
    ``||f||_4 <= ||f||_inf**0.5 ||f||_2**0.5``.  Hence this number bounds the
    Bernstein ratio for ``(p, q)`` in ``{(2, inf), (1, 2), (2, 4)}`` at every
    band and every grid.  The terms converge to ``sqrt(vol(B_1))``, so the
    default range already contains the maximum for ``n <= 3``.
    """
    ratios = [
        np.sqrt(_lattice_count(n, 2.0**j)) / 2.0 ** (n * j / 2) for j in range(j_max + 1)
    ]
    return float(max(ratios))


def random_band_limited(grid: PeriodicGrid, radius: float, rng: np.random.Generator) -> Field:
    """Random complex field with Gaussian coefficients on ``|xi| <= radius``."""
    mask = grid.frequency_magnitude <= radius
    coef = np.zeros(grid.shape, dtype=complex)
    m = int(mask.sum())
    coef[mask] = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return Field(grid, scipy.fft.ifftn(coef) * grid.size)


def sobolev_ensemble_field(grid: PeriodicGrid, sigma: float, seed: int, master_size: int = 256) -> Field:
    """Random field with coefficients ``g_xi max(|xi|, 1)**-(sigma + n/2)``.

    The Gaussian ``g_xi`` come from one ``master_size**n`` array per seed, so
    grids of different ``N`` (up to ``master_size``) share every coefficient
    they both resolve.  Band norms then scale like ``2**(-sigma j)``.
    """
    if grid.N > master_size:
        raise ParameterError(f"grid N={grid.N} exceeds the master size {master_size}")
    rng = np.random.default_rng(seed)
    shape = (master_size,) * grid.n
    master = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    idx = grid.wavenumbers.astype(int) % master_size
    coef = master[np.ix_(*([idx] * grid.n))]
    amp = np.maximum(grid.frequency_magnitude, 1.0) ** (-(sigma + grid.n / 2))
    return Field(grid, scipy.fft.ifftn(coef * amp) * grid.size)
