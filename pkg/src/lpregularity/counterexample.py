"""Supercritical power-law solutions of ``Delta u + u**p = 0``.

For ``n >= 3`` and ``p > (n+2)/(n-2)`` the function ``u = A |x|**-a`` with
``a = 2/(p-1)`` solves the equation away from the origin for one amplitude
``A``, lies in ``H^1(B_1)`` and is singular at the origin.  The amplitude is
found here by a residual oracle built on a symbolic radial Laplacian, and
compared against the two candidate closed forms ``(a(n+a-2))**(1/(p-1))``
and ``(a(n-a-2))**(1/(p-1))``.

On the torus the singular profile is represented by its Fourier series
truncated to the lattice: coefficients ``c_{n,a} |xi|**(a-n)``, which is the
periodic Riesz kernel and agrees with ``|x|**-a`` up to a smooth function.
Its dyadic band norms decay like ``2**(-(n/2 - a) k)``, so it belongs to
``H^s`` exactly for ``s < n/2 - a``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft
import scipy.optimize
import scipy.special
import sympy

from .dyadic import band_norms, build_partition
from .errors import InsufficientDataError, ParameterError
from .fracops import SlopeFit, _periodic_distance, cutoff_field, log2_slope
from .grid import Field, PeriodicGrid

__all__ = [
    "SupercriticalFamily",
    "amplitude_plus",
    "amplitude_minus",
    "calibrate_amplitude",
    "compare_amplitudes",
    "radial_residual",
    "h1_membership",
    "riesz_power_field",
    "DecayFit",
    "decay_exponent",
]


def _exponent(p):
    return 2.0 / (p - 1.0)


def _check_supercritical(n, p):
    if n < 3:
        raise ParameterError(f"the supercritical family needs n >= 3, got n={n}")
    if not p > (n + 2) / (n - 2):
        raise ParameterError(
            f"p={p} is not supercritical for n={n}: need p > {(n + 2) / (n - 2):.6g}"
        )


def amplitude_plus(n, p):
    """``(a (n + a - 2))**(1/(p-1))``."""
    a = _exponent(p)
    return (a * (n + a - 2)) ** (1.0 / (p - 1))


def amplitude_minus(n, p):
    """``(a (n - a - 2))**(1/(p-1))``."""
    a = _exponent(p)
    return (a * (n - a - 2)) ** (1.0 / (p - 1))


@lru_cache(maxsize=None)
def _radial_operator():
    r, A, a, n, p = sympy.symbols("r A a n p", positive=True)
    f = A * r ** (-a)
    lap = sympy.diff(f, r, 2) + (n - 1) / r * sympy.diff(f, r)
    return (
        sympy.lambdify((r, A, a, n), lap, "numpy"),
        sympy.lambdify((r, A, a, p), f**p, "numpy"),
    )


def _signed_residuals(A, n, p, r):
    lap, power = _radial_operator()
    a = _exponent(p)
    up = power(r, A, a, p)
    return (lap(r, A, a, n) + up) / up


def _default_radii():
    return np.logspace(np.log10(0.05), np.log10(0.95), 64)


def calibrate_amplitude(n: int, p: float, r_grid=None) -> float:
    """Amplitude annihilating the radial residual of ``Delta u + u**p``.

    The Laplacian ``f'' + (n-1) f'/r`` of ``A r**-a`` is derived symbolically;
    the signed relative residual, averaged over ``r_grid``, is monotone in
    ``A`` and its root is bracketed and polished with Brent's method.
    """
    _check_supercritical(n, p)
    r = _default_radii() if r_grid is None else np.asarray(r_grid, dtype=float)
    g = lambda A: float(np.mean(_signed_residuals(A, n, p, r)))  # noqa: E731
    lo, hi = 1e-6, 1e6
    if g(lo) * g(hi) > 0:
        raise ParameterError(f"no positive amplitude balances the equation for n={n}, p={p}")
    return float(scipy.optimize.brentq(g, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500))


def compare_amplitudes(n: int, p: float, tol: float = 1e-8) -> dict:
    """Oracle amplitude against both closed forms, with the matching one named."""
    A = calibrate_amplitude(n, p)
    candidates = {
        "a(n+a-2)": amplitude_plus(n, p),
        "a(n-a-2)": amplitude_minus(n, p),
    }
    rel = {name: abs(val - A) / A for name, val in candidates.items()}
    matches = [name for name, err in rel.items() if err <= tol]
    return {
        "n": n,
        "p": p,
        "a": _exponent(p),
        "oracle": A,
        "candidates": candidates,
        "relative_error": rel,
        "matches": matches,
    }


@dataclass(frozen=True)
class SupercriticalFamily:
    """``u = A |x|**-a`` with ``a = 2/(p-1)``; ``A`` is calibrated when omitted."""

    n: int
    p: float
    A: float = None

    def __post_init__(self):
        _check_supercritical(self.n, self.p)
        if not self.a < (self.n - 2) / 2:
            raise ParameterError(f"need a < (n-2)/2, got a={self.a}")
        if self.A is None:
            object.__setattr__(self, "A", calibrate_amplitude(self.n, self.p))
        elif not self.A > 0:
            raise ParameterError(f"amplitude must be positive, got {self.A}")

    @property
    def a(self):
        return _exponent(self.p)


def radial_residual(fam: SupercriticalFamily, r_grid) -> float:
    """``max |Delta u + u**p| / |u**p|`` on ``r_grid``.

    Uses ``Delta r**-a = a (a + 2 - n) r**(-a-2)``.
    """
    r = np.asarray(r_grid, dtype=float)
    if np.any(r <= 0):
        raise ParameterError("radii must be positive")
    a, n, A, p = fam.a, fam.n, fam.A, fam.p
    lap = A * a * (a + 2 - n) * r ** (-a - 2)
    up = A**p * r ** (-a * p)
    return float(np.max(np.abs(lap + up) / np.abs(up)))


def h1_membership(fam: SupercriticalFamily):
    """``(a + 1 < n/2, n/2 - a - 1)``: finiteness of ``int_{B_1} |grad u|**2``.

    ``|grad u|**2 ~ r**(-2a-2)`` so the integral converges iff ``n - 2a - 2 > 0``.
    """
    margin = fam.n / 2 - fam.a - 1
    return margin > 0, margin


def _riesz_constant(n, a):
    # (2 pi)^-n times the Fourier transform of |x|^-a on R^n
    return (
        (2 * np.pi) ** -n
        * np.pi ** (n / 2)
        * 2.0 ** (n - a)
        * scipy.special.gamma((n - a) / 2)
        / scipy.special.gamma(a / 2)
    )


def riesz_power_field(grid: PeriodicGrid, a: float, amplitude: float = 1.0, center=None) -> Field:
    """Lattice-truncated Fourier series of ``amplitude * |x - center|**-a``.

    Nonzero modes carry ``c_{n,a} |xi|**(a-n)``; the mean is taken from the
    sampled profile with its centre value capped at half a cell.
    """
    if not 0 < a < grid.n / 2:
        raise ParameterError(f"need 0 < a < n/2 for an L^2 singularity, got a={a}")
    center = np.pi if center is None else center
    mag = grid.frequency_magnitude
    coef = np.zeros(grid.shape, dtype=complex)
    nz = mag > 0
    coef[nz] = _riesz_constant(grid.n, a) * mag[nz] ** (a - grid.n)
    c = np.broadcast_to(np.asarray(center, dtype=float), (grid.n,))
    k = np.meshgrid(*([grid.wavenumbers] * grid.n), indexing="ij", sparse=True)
    coef = coef * np.exp(-1j * sum(kk * cc for kk, cc in zip(k, c)))
    d = _periodic_distance(grid, center)
    coef.flat[0] = np.mean(np.maximum(d, np.pi / grid.N) ** -a)
    return Field(grid, amplitude * scipy.fft.ifftn(coef) * grid.size)


@dataclass(frozen=True)
class DecayFit:
    slope: float
    target: float
    bands: tuple
    band_norms: tuple

    @property
    def deviation(self):
        return abs(self.slope - self.target)


def decay_exponent(fam, grid: PeriodicGrid, rho: float, center=None) -> DecayFit:
    """Slope of ``log2 ||P_k (eta_rho u)||_2`` against ``k``.

    ``fam`` is a :class:`SupercriticalFamily` (its dimension must match the
    grid) or a bare exponent ``a`` for a power law in the grid's dimension.
    The fit uses the upper half of the bands without the top band, which the
    lattice cube truncates.  The target is ``-(n/2 - a)``.
    """
    if isinstance(fam, SupercriticalFamily):
        if fam.n != grid.n:
            raise ParameterError(f"family dimension {fam.n} does not match grid dimension {grid.n}")
        a, amp = fam.a, fam.A
    else:
        a, amp = float(fam), 1.0
    part = build_partition(grid)
    ks = part.upper_half()[:-1]
    if len(ks) < 2:
        raise InsufficientDataError(f"grid with J_max={part.J_max} has too few bands")
    u = riesz_power_field(grid, a, amp, center) * cutoff_field(grid, rho, center)
    norms = band_norms(u, part)
    fit: SlopeFit = log2_slope(ks, norms[ks], floor=1e-13 * norms.max())
    return DecayFit(fit.slope, -(grid.n / 2 - a), fit.bands, tuple(float(x) for x in norms))
