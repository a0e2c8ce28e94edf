"""Littlewood-Paley tools for regularity of ``Delta^alpha u + V u = 0`` on the torus."""
from .bootstrap import BootstrapConfig, ExperimentReport, run_bootstrap, theta
from .counterexample import SupercriticalFamily, calibrate_amplitude, decay_exponent
from .dyadic import (
    DyadicPartition,
    band_norms,
    bernstein_ratio,
    build_partition,
    dyadic_coefficients,
    project,
    project_low,
    project_range,
)
from .errors import (
    DegenerateError,
    InsufficientDataError,
    InvalidInputError,
    IterationLimitError,
    LPError,
    ParameterError,
    PreconditionError,
    UndefinedRatioError,
)
from .fracops import FracParams, cutoff_field, frac_laplacian, localize
from .grid import Field, PeriodicGrid, SpectralField, forward_transform, inverse_transform, lp_norm
from .iteration import IterationParams, bound_constant, check_hypotheses, verify_conclusion
from .paraproduct import Zone, classify, decompose, fit_estimate_constant

__version__ = "0.1.0"
