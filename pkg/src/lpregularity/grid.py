"""Periodic grids, fields and the discrete Fourier transform.

Fields live on the torus ``[0, 2*pi)^n`` sampled at ``N`` points per axis.
The torus carries the probability measure, so every sample has quadrature
weight ``N**-n`` and the transform is normalised as

.. math:: \\hat f(\\xi) = N^{-n} \\sum_x f(x) e^{-i\\langle \\xi, x\\rangle}.

With this convention Plancherel holds with constant one and every character
``exp(i<xi, x>)`` has unit norm in every ``L^p``.

Spectral coefficients are stored in *centred* order: along each axis the
frequencies run ``-N/2, ..., N/2 - 1``.  Internally, multipliers are applied
in FFT order, see :func:`apply_multiplier`.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.fft

from .errors import InvalidInputError, ParameterError

__all__ = [
    "PeriodicGrid",
    "Field",
    "SpectralField",
    "forward_transform",
    "inverse_transform",
    "apply_multiplier",
    "lp_norm",
    "character",
    "save_field",
    "load_field",
]


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform grid on the torus ``[0, 2*pi)^n`` with ``N`` points per axis."""

    n: int
    N: int

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and 1 <= self.n <= 3):
            raise ParameterError(f"dimension n must be 1, 2 or 3, got {self.n!r}")
        N = self.N
        if not (isinstance(N, (int, np.integer)) and 8 <= N <= 256 and N & (N - 1) == 0):
            raise ParameterError(f"N must be a power of two in [8, 256], got {N!r}")

    @property
    def shape(self):
        return (self.N,) * self.n

    @property
    def size(self):
        return self.N**self.n

    @property
    def max_frequency(self):
        """Largest ``|xi|`` on the centred lattice, ``(N/2) * sqrt(n)``."""
        return (self.N / 2) * np.sqrt(self.n)

    @cached_property
    def wavenumbers(self):
        """Integer frequencies along one axis, in FFT order."""
        return np.fft.fftfreq(self.N, d=1.0 / self.N)

    @cached_property
    def frequency_magnitude(self):
        """``|xi|`` on the full lattice, FFT order, shape ``grid.shape``."""
        k = self.wavenumbers
        axes = np.meshgrid(*([k] * self.n), indexing="ij", sparse=True)
        mag = np.sqrt(sum(ax**2 for ax in axes))
        mag.setflags(write=False)
        return mag

    @cached_property
    def coordinates(self):
        """Tuple of sample coordinate arrays ``x_m = 2*pi*m/N`` (``ij`` indexing)."""
        x = 2 * np.pi * np.arange(self.N) / self.N
        return tuple(np.meshgrid(*([x] * self.n), indexing="ij"))

    def centered_index(self, xi):
        """Array index of frequency ``xi`` in centred order."""
        xi = tuple(int(c) for c in np.atleast_1d(xi))
        if len(xi) != self.n:
            raise ParameterError(f"frequency must have {self.n} components, got {xi}")
        half = self.N // 2
        if any(c < -half or c >= half for c in xi):
            raise ParameterError(f"frequency {xi} outside the lattice of N={self.N}")
        return tuple(c + half for c in xi)


def _frozen(array):
    array.setflags(write=False)
    return array


class Field:
    """Complex samples of a function on a :class:`PeriodicGrid`.

    ``samples`` may be given flat (row-major, length ``N**n``) or already in
    grid shape.  The stored array is a read-only copy.
    """

    __slots__ = ("grid", "samples")

    def __init__(self, grid: PeriodicGrid, samples):
        arr = np.array(samples, dtype=np.complex128)
        if arr.size != grid.size:
            raise InvalidInputError(
                f"expected {grid.size} samples for {grid}, got {arr.size}"
            )
        arr = arr.reshape(grid.shape)
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError("field samples must be finite")
        self.grid = grid
        self.samples = _frozen(arr)

    @classmethod
    def from_function(cls, grid, func):
        """Sample ``func(*coordinates)`` on the grid."""
        values = np.broadcast_to(func(*grid.coordinates), grid.shape)
        return cls(grid, values)

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.shape))

    @property
    def flat(self):
        return self.samples.reshape(-1)

    def _coerce(self, other):
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise InvalidInputError("fields live on different grids")
            return other.samples
        return other

    def __add__(self, other):
        return Field(self.grid, self.samples + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.grid, self.samples - self._coerce(other))

    def __rsub__(self, other):
        return Field(self.grid, self._coerce(other) - self.samples)

    def __mul__(self, other):
        return Field(self.grid, self.samples * self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return Field(self.grid, self.samples / self._coerce(other))

    def __neg__(self):
        return Field(self.grid, -self.samples)

    def __repr__(self):
        return f"Field(n={self.grid.n}, N={self.grid.N})"


class SpectralField:
    """Fourier coefficients on the centred frequency lattice."""

    __slots__ = ("grid", "coefficients")

    def __init__(self, grid: PeriodicGrid, coefficients):
        arr = np.array(coefficients, dtype=np.complex128)
        if arr.size != grid.size:
            raise InvalidInputError(
                f"expected {grid.size} coefficients for {grid}, got {arr.size}"
            )
        arr = arr.reshape(grid.shape)
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError("spectral coefficients must be finite")
        self.grid = grid
        self.coefficients = _frozen(arr)

    def __getitem__(self, xi):
        return self.coefficients[self.grid.centered_index(xi)]

    def __repr__(self):
        return f"SpectralField(n={self.grid.n}, N={self.grid.N})"


def _fft(samples):
    return scipy.fft.fftn(samples) / samples.size


def _ifft(coefficients):
    return scipy.fft.ifftn(coefficients) * coefficients.size


def forward_transform(f: Field) -> SpectralField:
    """Normalised DFT of ``f`` with coefficients in centred order."""
    return SpectralField(f.grid, np.fft.fftshift(_fft(f.samples)))


def inverse_transform(g: SpectralField) -> Field:
    """Inverse of :func:`forward_transform`."""
    return Field(g.grid, _ifft(np.fft.ifftshift(g.coefficients)))


def apply_multiplier(f: Field, symbol) -> Field:
    """Return the field whose spectrum is ``symbol * f_hat``.

    ``symbol`` is an array in FFT order (same layout as
    :attr:`PeriodicGrid.frequency_magnitude`).
    """
    return Field(f.grid, _ifft(symbol * _fft(f.samples)))


def character(grid: PeriodicGrid, xi) -> Field:
    """The unimodular field ``exp(i<xi, x>)``."""
    xi = np.atleast_1d(xi)
    if xi.size != grid.n:
        raise ParameterError(f"frequency must have {grid.n} components")
    phase = sum(c * x for c, x in zip(xi, grid.coordinates))
    return Field(grid, np.exp(1j * phase))


def lp_norm(f: Field, p) -> float:
    """``(N**-n * sum |f|**p)**(1/p)``, or ``max |f|`` for ``p = inf``."""
    p = float(p)
    if not p >= 1:
        raise ParameterError(f"p must satisfy p >= 1 or p = inf, got {p}")
    mod = np.abs(f.samples)
    peak = mod.max()
    if p == np.inf or peak == 0:
        return float(peak)
    # scale by the peak so large p cannot overflow
    return float(peak * np.mean((mod / peak) ** p) ** (1.0 / p))


# Serialization.
#
# Binary: magic b"LPF1", then little-endian int32 n and int32 N, then N**n
# samples in row-major order, each as two little-endian float64 (re, im).
# CSV: a comment line "# n=<n> N=<N>", a header line "re,im", then one
# sample per line in row-major order.

_MAGIC = b"LPF1"
_HEADER = struct.Struct("<4sii")


def save_field(path, f: Field, format="bin"):
    path = Path(path)
    if format == "bin":
        data = np.empty(2 * f.grid.size, dtype="<f8")
        data[0::2] = f.flat.real
        data[1::2] = f.flat.imag
        with path.open("wb") as fh:
            fh.write(_HEADER.pack(_MAGIC, f.grid.n, f.grid.N))
            fh.write(data.tobytes())
    elif format == "csv":
        with path.open("w", encoding="utf-8") as fh:
            fh.write(f"# n={f.grid.n} N={f.grid.N}\n")
            fh.write("re,im\n")
            for z in f.flat:
                fh.write(f"{float(z.real)!r},{float(z.imag)!r}\n")
    else:
        raise ParameterError(f"unknown field format {format!r}")


def load_field(path) -> Field:
    """Read a field written by :func:`save_field` (format detected from content)."""
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] == _MAGIC:
        _, n, N = _HEADER.unpack_from(raw)
        grid = PeriodicGrid(n, N)
        data = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
        if data.size != 2 * grid.size:
            raise InvalidInputError(f"{path}: truncated field payload")
        return Field(grid, data[0::2] + 1j * data[1::2])
    lines = raw.decode("utf-8").splitlines()
    if not lines or not lines[0].startswith("#"):
        raise InvalidInputError(f"{path}: missing field header")
    meta = dict(tok.split("=") for tok in lines[0][1:].split())
    grid = PeriodicGrid(int(meta["n"]), int(meta["N"]))
    rows = np.loadtxt(lines[2:], delimiter=",", ndmin=2)
    return Field(grid, rows[:, 0] + 1j * rows[:, 1])
