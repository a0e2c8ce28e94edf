"""Fractional Laplacian, smooth cutoffs and the localisation identity.

``Delta^alpha`` acts as the Fourier multiplier ``|xi|**(2 alpha)`` (the
positive operator, value 0 at ``xi = 0``).  Only magnitudes of its band
projections enter the estimates downstream, so the sign convention does not
matter there.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dyadic import DyadicPartition, band_norms, build_partition, smooth_step
from .errors import (
    DegenerateError,
    InsufficientDataError,
    ParameterError,
)
from .grid import Field, PeriodicGrid, apply_multiplier, lp_norm

__all__ = [
    "FracParams",
    "check_admissible",
    "frac_laplacian",
    "cutoff_field",
    "Localization",
    "localize",
    "SlopeFit",
    "log2_slope",
    "commutator_decay_slope",
    "manufacture_potential",
]


def check_admissible(n, alpha, s):
    """Raise :class:`ParameterError` naming the first violated hypothesis.

    The hypotheses are ``0 < 2 alpha < n``, ``0 < 2 s < n`` and the
    restriction ``2 alpha - n/2 < s < 2 alpha``.
    """
    if not 0 < 2 * alpha < n:
        raise ParameterError(f"need 0 < 2*alpha < n, got alpha={alpha}, n={n}")
    if not 0 < 2 * s < n:
        raise ParameterError(f"need 0 < 2*s < n, got s={s}, n={n}")
    if not 2 * alpha - n / 2 < s < 2 * alpha:
        raise ParameterError(
            "s out of range: need 2*alpha - n/2 < s < 2*alpha, "
            f"got {2 * alpha - n / 2} < {s} < {2 * alpha}"
        )


@dataclass(frozen=True)
class FracParams:
    n: int
    alpha: float
    s: float

    def __post_init__(self):
        check_admissible(self.n, self.alpha, self.s)

    @property
    def critical_exponent(self):
        """The integrability exponent ``n / (2 alpha)`` of the potential."""
        return self.n / (2 * self.alpha)


def frac_laplacian(f: Field, alpha: float) -> Field:
    if not alpha > 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    return apply_multiplier(f, f.grid.frequency_magnitude ** (2 * alpha))


def _periodic_distance(grid: PeriodicGrid, center):
    center = np.broadcast_to(np.asarray(center, dtype=float), (grid.n,))
    d2 = 0.0
    for x, c in zip(grid.coordinates, center):
        d = np.abs(x - c) % (2 * np.pi)
        d2 = d2 + np.minimum(d, 2 * np.pi - d) ** 2
    return np.sqrt(d2)


def _bump(grid, rho, center):
    if center is None:
        center = np.pi
    d = _periodic_distance(grid, center)
    return Field(grid, smooth_step((2 * rho - d) / rho))


def cutoff_field(grid: PeriodicGrid, rho: float, center=None) -> Field:
    """Smooth radial bump ``eta_rho``: 1 on ``B_rho``, 0 outside ``B_{2 rho}``.

    ``center`` defaults to ``(pi, ..., pi)``; distances are periodic.
    """
    if not 0 < 2 * rho < np.pi:
        raise ParameterError(f"cutoff radius needs 0 < 2*rho < pi, got rho={rho}")
    return _bump(grid, rho, center)


class Localization(NamedTuple):
    u_loc: Field
    V_loc: Field
    F: Field
    residual: float


def localize(u: Field, V: Field, rho: float, alpha: float, center=None) -> Localization:
    """Cut off ``u`` and ``V`` and form the commutator ``F``.

    ``u_loc = eta_rho u``, ``V_loc = eta_{2 rho} V`` and
    ``F = Delta^alpha(eta_rho u) - eta_rho Delta^alpha u``.  The returned
    residual is the relative defect of ``Delta^alpha u_loc = eta_rho
    Delta^alpha u + F``.  The larger cutoff ``eta_{2 rho}`` is allowed to
    exceed the fundamental domain; it is then periodised.
    """
    eta = cutoff_field(u.grid, rho, center)
    eta2 = _bump(u.grid, 2 * rho, center)
    u_loc = eta * u
    lap_loc = frac_laplacian(u_loc, alpha)
    eta_lap = eta * frac_laplacian(u, alpha)
    F = lap_loc - eta_lap
    scale = lp_norm(lap_loc, 2)
    defect = lp_norm(lap_loc - (eta_lap + F), 2)
    residual = defect / scale if scale > 0 else defect
    return Localization(u_loc, eta2 * V, F, residual)


class SlopeFit(NamedTuple):
    slope: float
    intercept: float
    bands: tuple


def log2_slope(ks, values, floor=0.0) -> SlopeFit:
    """Least-squares slope of ``log2(values)`` against ``ks``.

    Entries not exceeding ``floor`` are dropped; at least two must remain.
    """
    ks = np.asarray(ks, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = values > floor
    if keep.sum() < 2:
        raise InsufficientDataError(
            f"need two bands above {floor:.1e} for a slope fit, got {int(keep.sum())}"
        )
    slope, intercept = np.polyfit(ks[keep], np.log2(values[keep]), 1)
    return SlopeFit(float(slope), float(intercept), tuple(int(k) for k in ks[keep]))


def commutator_decay_slope(
    F: Field, s: float, alpha: float, partition: DyadicPartition | None = None
) -> SlopeFit:
    """Fit the growth rate of ``||P_k F||_2`` over the upper half of the bands.

    The top band is left out: the lattice cube truncates it.  The commutator
    has order ``2 alpha - 1``, so for ``u`` in ``H^s`` the fitted slope should
    not exceed ``2 alpha - s - 1``.  Bands at the level of floating-point
    round-off (``1e-13`` relative to the largest band) do not enter the fit.
    """
    del s, alpha  # the target 2*alpha - s - 1 is for the caller to compare against
    part = partition or build_partition(F.grid)
    if part.J_max < 4:
        raise InsufficientDataError(f"need at least 4 bands, grid has {part.J_max}")
    norms = band_norms(F, part)
    if not np.any(norms > 0):
        raise InsufficientDataError("commutator is zero; decay slope undefined")
    ks = part.upper_half()[:-1]
    return log2_slope(ks, norms[ks], floor=1e-13 * norms.max())


def manufacture_potential(u: Field, alpha: float, floor: float) -> Field:
    """Potential ``V = -Delta^alpha u / u`` making ``u`` an exact solution."""
    if not floor > 0:
        raise ParameterError(f"floor must be positive, got {floor}")
    lo = float(np.abs(u.samples).min())
    if lo < floor:
        raise DegenerateError(f"|u| dips to {lo:.3e}, below the floor {floor:.3e}")
    return -frac_laplacian(u, alpha) / u
