"""End-to-end regularity bootstrap on manufactured solutions.

A smooth positive ``u`` is drawn, ``V = -Delta^alpha u / u`` makes
``Delta^alpha u + V u = 0`` hold exactly, and the pipeline then

1. localises ``(u, V)`` around one point,
2. fits the paraproduct estimate constants,
3. checks the theta-decay inequality for ``a_k = 2**(s k) ||P_k u_loc||_2``,
4. feeds the normalised ``a_k`` to the iteration lemma, and
5. measures the improved decay ``||P_k u_loc|| <= C 2**(-(s + eps) k)``.

Every stage records either its outputs or the error that stopped it.
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import scipy.fft

from .dyadic import band_norms, build_partition, dyadic_coefficients
from .errors import InsufficientDataError, LPError, ParameterError
from .fracops import (
    FracParams,
    check_admissible,
    commutator_decay_slope,
    localize,
    log2_slope,
    manufacture_potential,
)
from .grid import Field, PeriodicGrid, lp_norm
from .iteration import IterationParams, bound_constant, check_hypotheses, verify_conclusion
from .paraproduct import TERMS, BandFactors, fit_estimate_constant, scan_range

__all__ = [
    "theta",
    "theta_candidates",
    "BootstrapConfig",
    "BootstrapParams",
    "ThetaDecay",
    "GoalEstimate",
    "ExperimentReport",
    "manufactured_solution",
    "theta_decay_check",
    "goal_estimate_check",
    "run_bootstrap",
    "parse_config",
]


def theta_candidates(n, alpha, s) -> dict:
    """Both regime formulas, evaluated regardless of which one applies."""
    return {
        "n<=4alpha": min(1.0, n / 2 - s, n / 2 + s - 2 * alpha),
        "n>4alpha": min(1.0, s, 2 * alpha - s),
    }


def theta(n: int, alpha: float, s: float) -> float:
    """Decay exponent of the theta-decay inequality; positive on admissible parameters."""
    check_admissible(n, alpha, s)
    c = theta_candidates(n, alpha, s)
    return c["n<=4alpha"] if n <= 4 * alpha else c["n>4alpha"]


@dataclass(frozen=True)
class BootstrapConfig:
    n: int = 2
    N: int = 128
    alpha: float = 0.75
    s: float = 0.9
    rho: float = 0.75
    seed: int = 0
    amplitude: float = 0.05
    radius: float = 4.0
    v_scale: float = 1.0
    floor: float = 0.5

    @classmethod
    def from_mapping(cls, values: dict) -> "BootstrapConfig":
        names = {f.name: f.type for f in dataclasses.fields(cls)}
        unknown = set(values) - set(names)
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        casts = {"n": int, "N": int, "seed": int}
        kw = {}
        for key, raw in values.items():
            try:
                kw[key] = casts.get(key, float)(raw)
            except (TypeError, ValueError) as exc:
                raise ParameterError(f"config key {key!r}: cannot parse {raw!r}") from exc
        return cls(**kw)


def parse_config(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ParameterError(f"config line {lineno}: expected key = value")
        out[key.strip()] = value.strip()
    return out


@dataclass(frozen=True)
class BootstrapParams:
    frac: FracParams
    rho: float
    grid: PeriodicGrid
    delta: float

    @property
    def theta(self):
        return theta(self.frac.n, self.frac.alpha, self.frac.s)

    @property
    def epsilon(self):
        return self.theta / 2

    @property
    def threshold(self):
        """Admissible bound for ``C2 * delta``: ``(1 - 2**-eps) / 2``."""
        return (1.0 - 2.0**-self.epsilon) / 2.0


@dataclass(frozen=True)
class ThetaDecay:
    C1: float
    C2: float
    delta: float
    threshold: float
    ks: tuple
    holds: bool

    @property
    def verdict(self):
        return self.C2 * self.delta < self.threshold


@dataclass(frozen=True)
class GoalEstimate:
    C: float
    slope: float | None
    target: float
    bands: tuple

    @property
    def verdict(self):
        return self.slope is None or self.slope <= self.target


def manufactured_solution(grid: PeriodicGrid, amplitude: float, radius: float, rng) -> Field:
    """``1 + amplitude * w`` with ``w`` a real random trigonometric polynomial, ``max|w| = 1``."""
    mask = (grid.frequency_magnitude <= radius) & (grid.frequency_magnitude > 0)
    coef = np.zeros(grid.shape, dtype=complex)
    m = int(mask.sum())
    coef[mask] = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    w = scipy.fft.ifftn(coef).real
    w /= np.abs(w).max()
    return Field(grid, 1.0 + amplitude * w)


def _weights(part, alpha, s):
    # ||P_k g|| <= 2**(-2 alpha (k-1)) ||P_k Delta^alpha g||  on band k
    k = np.arange(part.J_max + 1)
    return 2.0 ** (2 * alpha) * 2.0 ** ((s - 2 * alpha) * k)


def theta_decay_check(u_loc: Field, V_loc: Field, F: Field, params: BootstrapParams, ks=None) -> ThetaDecay:
    """Constants of the theta-decay inequality for ``a_k = 2**(s k) ||P_k u_loc||``.

    ``Delta^alpha u_loc = F - V_loc u_loc`` splits each band into a commutator
    part and a potential part.  ``C1`` is the smallest constant bounding the
    commutator part by ``C1 2**(-theta k)`` (the ``V = 0`` run); ``C2`` is then
    the smallest constant bounding the potential part by
    ``C2 delta sum_j a_j 2**(-theta |j - k|)`` over the scan range.
    """
    grid = u_loc.grid
    part = build_partition(grid)
    ks = list(ks) if ks is not None else scan_range(part)
    if len(ks) < 1:
        raise InsufficientDataError("no bands in the scan range")
    fp, th = params.frac, params.theta
    a = dyadic_coefficients(u_loc, fp.s, part).values
    w = _weights(part, fp.alpha, fp.s)
    comm = w * band_norms(F, part)
    pot = w * band_norms(V_loc * u_loc, part)
    j = np.arange(a.size)
    C1 = max(float(comm[k] * 2.0 ** (th * k)) for k in ks)
    conv = {k: float(np.sum(a * 2.0 ** (-th * np.abs(j - k)))) for k in ks}
    delta = params.delta
    if delta == 0 or not np.any(pot[ks] > 0):
        C2 = 0.0
    else:
        C2 = max(float(pot[k] / (delta * conv[k])) for k in ks if conv[k] > 0)
    tol = 1e-10
    holds = all(a[k] <= (C1 * 2.0 ** (-th * k) + C2 * delta * conv[k]) * (1 + tol) for k in ks)
    return ThetaDecay(C1, C2, float(delta), params.threshold, tuple(ks), bool(holds))


def goal_estimate_check(u_loc: Field, s: float, epsilon: float) -> GoalEstimate:
    """``C = max_k 2**((s + eps) k) ||P_k u_loc||`` and the fitted decay slope.

    The slope is fitted over the upper half of the bands minus the top one;
    the verdict compares it with ``-(s + eps)``.  A field with no energy in
    those bands has no slope and passes trivially.
    """
    part = build_partition(u_loc.grid)
    norms = band_norms(u_loc, part)
    k = np.arange(1, norms.size)
    C = float(np.max(norms[1:] * 2.0 ** ((s + epsilon) * k), initial=0.0))
    target = -(s + epsilon)
    ks = part.upper_half()[:-1]
    if not np.any(norms > 0):
        return GoalEstimate(0.0, None, target, ())
    try:
        fit = log2_slope(ks, norms[ks], floor=1e-13 * norms.max())
    except InsufficientDataError:
        return GoalEstimate(C, None, target, ())
    return GoalEstimate(C, fit.slope, target, fit.bands)


@dataclass
class ExperimentReport:
    name: str
    parameters: dict
    sequences: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)

    def verdict(self, name, value, criterion, tolerance=None):
        self.verdicts[name] = {"pass": bool(value), "criterion": criterion, "tolerance": tolerance}

    @property
    def all_pass(self):
        return not self.errors and bool(self.verdicts) and all(v["pass"] for v in self.verdicts.values())

    def as_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(_clean(self.as_dict()), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


class _Stage:
    """Context manager recording a stage failure in the report instead of raising."""

    def __init__(self, report, name):
        self.report, self.name = report, name
        self.ok = False

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is None:
            self.ok = True
            return False
        if isinstance(exc, LPError):
            self.report.errors[self.name] = f"{type(exc).__name__}: {exc}"
            return True
        return False


def run_bootstrap(config: BootstrapConfig | None = None) -> ExperimentReport:
    """Run every stage on one manufactured solution and collect the report.

    Inadmissible ``(n, alpha, s)`` raise :class:`ParameterError` before any
    work is done.  Later failures are recorded per stage.
    """
    cfg = config or BootstrapConfig()
    frac = FracParams(cfg.n, cfg.alpha, cfg.s)
    grid = PeriodicGrid(cfg.n, cfg.N)
    if not cfg.v_scale >= 0:
        raise ParameterError(f"v_scale must be nonnegative, got {cfg.v_scale}")
    rng = np.random.default_rng(cfg.seed)
    report = ExperimentReport(
        name="bootstrap",
        parameters=dataclasses.asdict(cfg),
        provenance={
            "grid": {"n": grid.n, "N": grid.N},
            "seed": cfg.seed,
            "fft": "scipy.fft",
            "solution": "1 + amplitude * random trigonometric polynomial, V = -Delta^alpha u / u",
        },
    )
    part = build_partition(grid)
    ks = scan_range(part)
    report.provenance["scan_range"] = list(ks)
    report.provenance["scan_range_clipped"] = part.J_max < 10
    th_c = theta_candidates(cfg.n, cfg.alpha, cfg.s)
    th = theta(cfg.n, cfg.alpha, cfg.s)
    report.constants["theta"] = th
    report.constants["theta_candidates"] = th_c
    report.constants["epsilon"] = th / 2

    u = manufactured_solution(grid, cfg.amplitude, cfg.radius, rng)
    V = manufacture_potential(u, cfg.alpha, cfg.floor) * cfg.v_scale
    loc = localize(u, V, cfg.rho, cfg.alpha)
    delta = lp_norm(loc.V_loc, cfg.n / (2 * cfg.alpha))
    params = BootstrapParams(frac, cfg.rho, grid, delta)
    report.constants["delta"] = delta
    report.constants["localization_residual"] = loc.residual
    report.verdict("localization_identity", loc.residual <= 1e-12, "relative defect <= tol", 1e-12)
    a = dyadic_coefficients(loc.u_loc, cfg.s, part)
    report.sequences["a_k"] = a.rows()

    with _Stage(report, "commutator"):
        fit = commutator_decay_slope(loc.F, cfg.s, cfg.alpha, part)
        report.constants["commutator_slope"] = fit.slope
        report.constants["commutator_slope_bound"] = 2 * cfg.alpha - cfg.s - 1

    with _Stage(report, "paraproduct"):
        factors = BandFactors(loc.V_loc, loc.u_loc, part)
        zones = {}
        for term in TERMS:
            est = fit_estimate_constant(term, loc.V_loc, loc.u_loc, cfg.s, cfg.alpha, part, factors=factors)
            zones[term] = est.as_dict()
            report.verdict(
                f"estimate_{term}_finite", math.isfinite(est.constant), "fitted constant is finite"
            )
        report.constants["zone_estimates"] = zones

    td = None
    with _Stage(report, "theta_decay"):
        td = theta_decay_check(loc.u_loc, loc.V_loc, loc.F, params, ks)
        report.constants["C1"] = td.C1
        report.constants["C2"] = td.C2
        report.constants["C2_delta"] = td.C2 * td.delta
        report.constants["theta_threshold"] = td.threshold
        report.verdict("theta_decay_inequality", td.holds, "a_k <= C1 2^-theta k + C2 delta conv_k", 1e-10)
        report.verdict(
            "theta_decay",
            td.verdict,
            f"C2*delta = {td.C2 * td.delta:.6g} < (1 - 2^-eps)/2 = {td.threshold:.6g}",
            td.threshold,
        )

    if td is not None:
        with _Stage(report, "iteration_lemma"):
            report.constants["lemma"] = _apply_lemma(a.values, td, params, report)

    with _Stage(report, "goal_estimate"):
        goal = goal_estimate_check(loc.u_loc, cfg.s, params.epsilon)
        report.constants["goal_C"] = goal.C
        report.constants["goal_slope"] = goal.slope
        report.verdict("goal_estimate", goal.verdict, f"decay slope <= {goal.target:.6g}", goal.target)
        report.sequences["band_norms"] = [
            (k, float(v)) for k, v in enumerate(band_norms(loc.u_loc, part))
        ]
    return report


def _apply_lemma(a, td: ThetaDecay, params: BootstrapParams, report) -> dict:
    """Normalise ``a_k`` by ``max(C1, sup a)`` and run the lemma on it.

    ``S`` is the first index from which the normalised hypotheses hold.
    """
    scale = max(td.C1, float(a.max()))
    if scale == 0:
        raise InsufficientDataError("all dyadic coefficients vanish")
    b = a / scale
    delta_t = td.C2 * td.delta
    eps = params.epsilon
    chosen = None
    for S in range(b.size):
        ip = IterationParams(epsilon=eps, delta=delta_t, S=S, K_max=b.size)
        if check_hypotheses(b, ip):
            chosen = ip
            break
    if chosen is None:
        raise InsufficientDataError("normalised hypotheses fail at every starting index")
    cert = bound_constant(b, chosen)
    ok = verify_conclusion(b, cert, chosen)
    report.verdict("iteration_lemma", ok, "b_k <= M 2^-eps k", 1e-10)
    report.sequences["b_k"] = [(k, float(v)) for k, v in enumerate(b)]
    return {"scale": scale, "delta_tilde": delta_t, "S": chosen.S, **cert.as_dict()}
