"""Frequency-interaction zones and the four-term splitting of ``P_k(V u)``.

For a target band ``k`` every pair of band indices ``(i, j)`` (``i`` for the
potential, ``j`` for the solution) falls in one of the zones

* ``LL``: ``k-5 <= i, j <= k+7`` and ``min(i, j) <= k+5``
* ``LH``: ``i < k-5`` and ``k-3 <= j <= k+3``
* ``HL``: ``k-3 <= i <= k+3`` and ``j < k-5``
* ``HH``: ``i, j > k+5`` and ``|i - j| <= 3``

or in none of them, in which case ``P_k(P_i V P_j u)`` vanishes by support
arithmetic.  On the grid, band index 0 stands for the whole low block
``P_{<=0}``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from .dyadic import DyadicPartition, build_partition, dyadic_coefficients
from .errors import DegenerateError, ParameterError
from .grid import Field, lp_norm

__all__ = [
    "TERMS",
    "ZONES",
    "Zone",
    "classify",
    "vanishing_check",
    "pair_vanishes",
    "zone_pairs",
    "BandFactors",
    "zone_sum",
    "ZoneDecomposition",
    "decompose",
    "outside_pairs",
    "scan_range",
    "EstimateFit",
    "estimate_rhs",
    "fit_estimate_constant",
]


class Zone(str, enum.Enum):
    LL = "LL"
    LH = "LH"
    HL = "HL"
    HH = "HH"
    OUTSIDE = "OUTSIDE"


ZONES = (Zone.LL, Zone.LH, Zone.HL, Zone.HH)


def classify(i: int, j: int, k: int) -> Zone:
    """Zone of the pair ``(i, j)`` for target band ``k``.

    The four definitions are tested in the order LL, LH, HL, HH so that a
    pair is never claimed twice.
    """
    if k - 5 <= i <= k + 7 and k - 5 <= j <= k + 7 and min(i, j) <= k + 5:
        return Zone.LL
    if i < k - 5 and k - 3 <= j <= k + 3:
        return Zone.LH
    if k - 3 <= i <= k + 3 and j < k - 5:
        return Zone.HL
    if i > k + 5 and j > k + 5 and abs(i - j) <= 3:
        return Zone.HH
    return Zone.OUTSIDE


def _radii(i, low_block=False):
    # band i lives in the annulus 2^(i-1) <= |xi| <= 2^(i+1); the low block in B_2
    if low_block:
        return 0.0, 2.0
    return 2.0 ** (i - 1), 2.0 ** (i + 1)


def _sum_misses(ri, rj, rk):
    lo = max(0.0, ri[0] - rj[1], rj[0] - ri[1])
    hi = ri[1] + rj[1]
    return hi < rk[0] or lo > rk[1]


def vanishing_check(i: int, j: int, k: int) -> bool:
    """True when ``(A_i + A_j) cap A_k`` is empty, ``A_m`` the ``m``-th annulus.

    Interval arithmetic on the radii: ``A_i + A_j`` lies in the shell
    ``[max(0, 2^(i-1) - 2^(j+1), 2^(j-1) - 2^(i+1)), 2^(i+1) + 2^(j+1)]``.
    """
    return _sum_misses(_radii(i), _radii(j), _radii(k))


def pair_vanishes(i: int, j: int, k: int) -> bool:
    """:func:`vanishing_check` in grid indexing, where index 0 is the low block."""
    return _sum_misses(_radii(i, i == 0), _radii(j, j == 0), _radii(k, k == 0))


def zone_pairs(zone: Zone, k: int, J_max: int):
    """All grid index pairs ``(i, j)`` in ``[0, J_max]**2`` classified into ``zone``."""
    zone = Zone(zone)
    return [
        (i, j)
        for i in range(J_max + 1)
        for j in range(J_max + 1)
        if classify(i, j, k) is zone
    ]


@dataclass(eq=False)
class BandFactors:
    """Physical-space band pieces ``P_i V`` and ``P_j u`` (index 0 = low block).

    Computing them once lets every zone and every ``k`` reuse the same FFTs.
    """

    V: Field
    u: Field
    partition: DyadicPartition
    V_bands: list = field(init=False)
    u_bands: list = field(init=False)

    def __post_init__(self):
        if self.V.grid != self.u.grid or self.partition.grid != self.u.grid:
            raise ParameterError("V, u and the partition must share one grid")
        Vh = scipy.fft.fftn(self.V.samples)
        uh = scipy.fft.fftn(self.u.samples)
        self.V_bands = [scipy.fft.ifftn(sym * Vh) for sym in self.partition.symbols]
        self.u_bands = [scipy.fft.ifftn(sym * uh) for sym in self.partition.symbols]

    def product(self, pairs):
        out = np.zeros(self.u.grid.shape, dtype=complex)
        for i, j in pairs:
            out += self.V_bands[i] * self.u_bands[j]
        return out

    def project(self, samples, k):
        return scipy.fft.ifftn(self.partition.band(k) * scipy.fft.fftn(samples))


def _check_k(k, partition):
    if not 1 <= k <= partition.J_max:
        raise ParameterError(f"target band must lie in [1, {partition.J_max}], got {k}")


def _factors(V, u, partition, factors):
    if factors is not None:
        return factors
    return BandFactors(V, u, partition or build_partition(u.grid))


def zone_sum(
    V: Field,
    u: Field,
    k: int,
    zone: Zone,
    partition: DyadicPartition | None = None,
    factors: BandFactors | None = None,
) -> Field:
    """``sum_{(i, j) in zone} P_k(P_i V P_j u)``."""
    zone = Zone(zone)
    if zone is Zone.OUTSIDE:
        raise ParameterError("OUTSIDE is not a summation zone")
    fac = _factors(V, u, partition, factors)
    _check_k(k, fac.partition)
    pairs = zone_pairs(zone, k, fac.partition.J_max)
    if not pairs:
        return Field.zeros(u.grid)
    return Field(u.grid, fac.project(fac.product(pairs), k))


@dataclass(frozen=True)
class ZoneDecomposition:
    k: int
    terms: dict
    residual: float
    reference_norm: float

    @property
    def I(self):  # noqa: E743
        return self.terms[Zone.LL]

    @property
    def II(self):
        return self.terms[Zone.LH]

    @property
    def III(self):
        return self.terms[Zone.HL]

    @property
    def IV(self):
        return self.terms[Zone.HH]

    @property
    def relative_residual(self):
        if self.reference_norm == 0:
            return self.residual
        return self.residual / self.reference_norm

    def within_tolerance(self, rel=1e-8, abs_zero=1e-12):
        if self.reference_norm == 0:
            return self.residual <= abs_zero
        return self.residual <= rel * self.reference_norm


def decompose(
    V: Field,
    u: Field,
    k: int,
    partition: DyadicPartition | None = None,
    factors: BandFactors | None = None,
) -> ZoneDecomposition:
    """Split ``P_k(V u)`` into the four zone sums and report the residual."""
    fac = _factors(V, u, partition, factors)
    _check_k(k, fac.partition)
    terms = {z: zone_sum(V, u, k, z, factors=fac) for z in ZONES}
    reference = Field(u.grid, fac.project(V.samples * u.samples, k))
    total = sum(t.samples for t in terms.values())
    residual = lp_norm(Field(u.grid, reference.samples - total), 2)
    return ZoneDecomposition(k, terms, residual, lp_norm(reference, 2))


def outside_pairs(
    V: Field,
    u: Field,
    k: int,
    partition: DyadicPartition | None = None,
    factors: BandFactors | None = None,
):
    """Every OUTSIDE pair at band ``k`` with its certificate and measured norm.

    Returns a list of ``(i, j, certified, norm)`` where ``certified`` is the
    interval-arithmetic verdict and ``norm = ||P_k(P_i V P_j u)||_2``.
    """
    fac = _factors(V, u, partition, factors)
    _check_k(k, fac.partition)
    rows = []
    for i, j in zone_pairs(Zone.OUTSIDE, k, fac.partition.J_max):
        piece = fac.project(fac.V_bands[i] * fac.u_bands[j], k)
        norm = float(np.sqrt(np.mean(np.abs(piece) ** 2)))
        rows.append((i, j, pair_vanishes(i, j, k), norm))
    return rows


def scan_range(partition: DyadicPartition):
    """Bands ``k >= 10`` when the grid has them, else the upper half of the bands."""
    if partition.J_max >= 10:
        return list(range(10, partition.J_max + 1))
    return partition.upper_half()


TERMS = ("I+II", "III", "IV")


def estimate_rhs(term, k, a, delta, n, alpha, s):
    """Right-hand side of the bound for ``term`` at band ``k``.

    ``a`` holds ``a_j = 2**(s j) ||P_j u||_2`` with ``a[0] = ||P_{<=0} u||_2``;
    terms beyond the last band are zero.  The regime is ``n <= 4 alpha``
    (small) or ``n > 4 alpha`` (big).
    """
    J = len(a) - 1
    small = n <= 4 * alpha
    lead = delta * 2.0 ** ((2 * alpha - s) * k)
    if term == "I+II":
        lo, hi = max(0, k - 5), min(J, k + 7)
        return lead * float(np.sum(a[lo : hi + 1]))
    if term == "III":
        j = np.arange(1, min(k - 5, J) + 1)
        if small:
            low = delta * 2.0 ** ((2 * alpha - n / 2) * k) * a[0]
            tail = np.sum(a[j] * 2.0 ** ((n / 2 - s) * (j - k)))
        else:
            low = delta * a[0]
            tail = np.sum(a[j] * 2.0 ** ((2 * alpha - s) * (j - k)))
        return float(low + lead * tail)
    if term == "IV":
        j = np.arange(k, J + 1)
        rate = n / 2 - 2 * alpha + s if small else s
        return lead * float(np.sum(a[j] * 2.0 ** (rate * (k - j))))
    raise ParameterError(f"unknown estimate term {term!r}; expected one of {TERMS}")


@dataclass(frozen=True)
class EstimateFit:
    term: str
    regime: str
    constant: float
    ks: tuple
    lhs: tuple
    rhs: tuple
    delta: float
    zone_empty: bool

    def as_dict(self):
        return {
            "term": self.term,
            "regime": self.regime,
            "constant": self.constant,
            "ks": list(self.ks),
            "lhs": list(self.lhs),
            "rhs": list(self.rhs),
            "delta": self.delta,
            "zone_empty": self.zone_empty,
        }


def fit_estimate_constant(
    term: str,
    V: Field,
    u: Field,
    s: float,
    alpha: float,
    partition: DyadicPartition | None = None,
    ks=None,
    factors: BandFactors | None = None,
) -> EstimateFit:
    """Smallest ``C`` with ``LHS_k <= C * RHS_k`` for every ``k`` in the scan range.

    ``LHS_k`` is ``||I|| + ||II||``, ``||III||`` or ``||IV||``.  A zero
    left-hand side everywhere gives ``C = 0``.
    """
    if term not in TERMS:
        raise ParameterError(f"unknown estimate term {term!r}; expected one of {TERMS}")
    if not alpha > 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    fac = _factors(V, u, partition, factors)
    part = fac.partition
    n = u.grid.n
    ks = list(ks) if ks is not None else scan_range(part)
    delta = lp_norm(V, n / (2 * alpha))
    a = dyadic_coefficients(u, s, part).values
    zones = {"I+II": (Zone.LL, Zone.LH), "III": (Zone.HL,), "IV": (Zone.HH,)}[term]
    empty = all(not zone_pairs(z, k, part.J_max) for z in zones for k in ks)
    lhs, rhs = [], []
    for k in ks:
        lhs.append(sum(lp_norm(zone_sum(V, u, k, z, factors=fac), 2) for z in zones))
        rhs.append(estimate_rhs(term, k, a, delta, n, alpha, s))
    ratios = []
    for k, left, right in zip(ks, lhs, rhs):
        if left == 0:
            continue
        if right == 0:
            raise DegenerateError(
                f"{term}: nonzero left side {left:.3e} at k={k} against a zero bound"
                + (" (delta = 0)" if delta == 0 else "")
            )
        ratios.append(left / right)
    return EstimateFit(
        term=term,
        regime="n<=4alpha" if n <= 4 * alpha else "n>4alpha",
        constant=float(max(ratios, default=0.0)),
        ks=tuple(ks),
        lhs=tuple(float(x) for x in lhs),
        rhs=tuple(float(x) for x in rhs),
        delta=float(delta),
        zone_empty=empty,
    )
