"""Iteration lemma for number sequences.

Hypotheses, for some ``S >= 0``::

    0 <= a_k <= 1                                         (k >= S)
    a_k <= 2**(-eps k) + delta * sum_j a_j 2**(-kappa |k - j|)   (k >= S)

with ``kappa = 2 eps`` by default and ``0 < delta < (1 - 2**-eps) / 2``.
Conclusion: ``a_k <= M 2**(-eps k)`` for every ``k``.

Finite sequences are identified with their extension by zeros, which makes
the truncated sums exact; :func:`truncation_tail` gives the size of the
tail that a non-zero continuation could add.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, IterationLimitError, ParameterError, PreconditionError

__all__ = [
    "IterationParams",
    "BoundCertificate",
    "kernel_constant",
    "check_hypotheses",
    "hypothesis_slack",
    "truncation_tail",
    "bound_constant",
    "verify_conclusion",
    "fixed_point_oracle",
    "partial_bound",
    "induction_step_holds",
    "weighted_kernel_sum",
]


def kernel_constant(epsilon: float, kappa: float | None = None) -> float:
    """Constant ``C`` with ``sum_{j>=S} 2**(-eps j - kappa |j-k|) <= C 2**(-eps k)``.

    For the default ``kappa = 2 eps`` this is ``C_eps = 2 / (1 - 2**-eps)``.
    For other ``kappa > eps`` the two geometric tails are bounded separately,
    and ``C`` also covers ``sum_j 2**(-kappa |j-k|) <= 2 / (1 - 2**-kappa)``.
    """
    if kappa is None or kappa == 2 * epsilon:
        return 2.0 / (1.0 - 2.0**-epsilon)
    if not kappa > epsilon:
        raise ParameterError(f"kernel exponent must exceed eps, got {kappa} <= {epsilon}")
    weighted = 1.0 / (1.0 - 2.0 ** -(kappa - epsilon)) + 1.0 / (1.0 - 2.0 ** -(kappa + epsilon))
    return max(2.0 / (1.0 - 2.0**-kappa), weighted)


@dataclass(frozen=True)
class IterationParams:
    epsilon: float
    delta: float
    S: int = 0
    K_max: int = 64
    kernel_exponent: float | None = None

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ParameterError(f"epsilon must be positive, got {self.epsilon}")
        if self.S < 0 or self.K_max < 1:
            raise ParameterError(f"need S >= 0 and K_max >= 1, got S={self.S}, K_max={self.K_max}")
        if not 0 <= self.delta < self.threshold:
            raise ParameterError(
                f"delta must lie in [0, {self.threshold:.6g}) for eps={self.epsilon}, "
                f"got {self.delta}"
            )

    @property
    def kappa(self):
        return 2 * self.epsilon if self.kernel_exponent is None else self.kernel_exponent

    @property
    def C(self):
        return kernel_constant(self.epsilon, self.kernel_exponent)

    @property
    def threshold(self):
        """Largest admissible delta; ``(1 - 2**-eps) / 2`` for the default kernel."""
        return 1.0 / self.C


@dataclass(frozen=True)
class BoundCertificate:
    A: float
    C_eps: float
    M: float

    def as_dict(self):
        return {"A": self.A, "C_eps": self.C_eps, "M": self.M}


def _as_sequence(a):
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or not np.all(np.isfinite(a)):
        raise InvalidInputError("sequence must be a finite one-dimensional array")
    if np.any(a < 0):
        raise InvalidInputError("sequence entries must be nonnegative")
    return a


def _kernel(K, kappa):
    idx = np.arange(K)
    return 2.0 ** (-kappa * np.abs(idx[:, None] - idx[None, :]))


def _rhs(a, params):
    k = np.arange(a.size)
    return 2.0 ** (-params.epsilon * k) + params.delta * (_kernel(a.size, params.kappa) @ a)


def hypothesis_slack(a, params: IterationParams) -> np.ndarray:
    """``rhs_k - a_k`` for ``k >= S`` (negative entries are violations)."""
    a = _as_sequence(a)[: params.K_max]
    return (_rhs(a, params) - a)[params.S :]


def check_hypotheses(a, params: IterationParams, rtol: float = 1e-10) -> bool:
    """Both lemma hypotheses for ``S <= k < K_max``.

    ``rtol`` absorbs round-off in the right-hand side only.
    """
    a = _as_sequence(a)[: params.K_max]
    tail = a[params.S :]
    if np.any(tail > 1.0 * (1 + rtol)):
        return False
    rhs = _rhs(a, params)[params.S :]
    return bool(np.all(tail <= rhs * (1 + rtol)))


def truncation_tail(a, params: IterationParams) -> np.ndarray:
    """Bound on what entries beyond ``K_max`` (at most ``||a||_inf``) could add.

    ``delta ||a||_inf sum_{j >= K_max} 2**(-kappa (j - k))`` for each ``k < K_max``.
    """
    a = _as_sequence(a)[: params.K_max]
    k = np.arange(a.size)
    q = 2.0**-params.kappa
    return params.delta * a.max(initial=0.0) * q ** (params.K_max - k) / (1 - q)


def bound_constant(a, params: IterationParams) -> BoundCertificate:
    """Explicit ``A``, ``C_eps`` and ``M`` for a sequence meeting the hypotheses.

    The part of the sum with ``j < S`` is absorbed into the leading term:
    ``A = 1 + delta ||a||_inf 2**(kappa S) / (2**kappa - 1)``.
    """
    a = _as_sequence(a)[: params.K_max]
    if not check_hypotheses(a, params):
        raise PreconditionError("sequence does not satisfy the lemma hypotheses")
    kappa, eps, delta, S = params.kappa, params.epsilon, params.delta, params.S
    sup = float(a.max(initial=0.0))
    A = 1.0 + delta * sup * 2.0 ** (kappa * S) / (2.0**kappa - 1.0)
    C = params.C
    M = A / (1.0 - delta * C)
    head = a[:S]
    if head.size:
        M = max(M, float(np.max(head * 2.0 ** (eps * np.arange(head.size)))))
    return BoundCertificate(A=A, C_eps=C, M=M)


def verify_conclusion(a, cert: BoundCertificate, params: IterationParams, rtol: float = 1e-10) -> bool:
    a = _as_sequence(a)[: params.K_max]
    bound = cert.M * 2.0 ** (-params.epsilon * np.arange(a.size))
    return bool(np.all(a <= bound * (1 + rtol)))


def fixed_point_oracle(params: IterationParams, iters: int = 10_000, start=None, tol: float = 1e-12):
    """Iterate ``a <- min(a, 2**(-eps k) + delta K a)`` on ``k >= S`` to a fixed point.

    Starts from ``a = 1`` unless ``start`` is given; entries below ``S`` keep
    their start values.  Iterates decrease monotonically, so the limit meets
    the lemma hypotheses by construction.  Convergence is declared when no
    entry changes by more than ``tol`` relative to its own size.
    """
    if iters < 1:
        raise ParameterError("iters must be at least 1")
    K, S = params.K_max, params.S
    a = np.ones(K) if start is None else _as_sequence(start)[:K].copy()
    if a.size != K:
        raise InvalidInputError(f"start sequence must have length {K}")
    a[S:] = np.minimum(a[S:], 1.0)
    change = math.inf
    for _ in range(iters):
        new = a.copy()
        new[S:] = np.minimum(a[S:], _rhs(a, params)[S:])
        scale = np.where(new > 0, new, 1.0)
        change = float(np.max(np.abs(new - a) / scale))
        a = new
        if change <= tol:
            return a
    raise IterationLimitError(f"oracle did not converge in {iters} iterations", change)


def partial_bound(k, N: int, cert: BoundCertificate, params: IterationParams, delta_C=None):
    """``A 2**(-eps k) (1 + dC + ... + dC**N) + dC**(N+1)`` with ``dC = delta C``."""
    dC = params.delta * cert.C_eps if delta_C is None else delta_C
    geometric = sum(dC**m for m in range(N + 1))
    return cert.A * 2.0 ** (-params.epsilon * np.asarray(k, dtype=float)) * geometric + dC ** (N + 1)


def induction_step_holds(cert: BoundCertificate, params: IterationParams, N: int, k_values=None) -> bool:
    """Substituting the order-``N`` bound into the hypothesis yields the order ``N+1`` bound.

    The sum over ``j >= S`` is evaluated directly up to a cutoff where the
    kernel has fallen below ``2**-60``; the remainder is bounded using the
    monotonicity of the partial bound and added.
    """
    S, eps, kappa, delta = params.S, params.epsilon, params.kappa, params.delta
    ks = np.arange(S, S + params.K_max) if k_values is None else np.asarray(k_values)
    L = int(math.ceil(60.0 / kappa))
    q = 2.0**-kappa
    for k in ks:
        j = np.arange(S, k + L + 1)
        bN = partial_bound(j, N, cert, params)
        total = np.sum(bN * 2.0 ** (-kappa * np.abs(j - k)))
        total += partial_bound(k, N, cert, params) * q ** (L + 1) / (1 - q)
        rhs = cert.A * 2.0 ** (-eps * k) + delta * total
        if rhs > partial_bound(k, N + 1, cert, params) * (1 + 1e-12):
            return False
    return True


def weighted_kernel_sum(epsilon: float, S: int, k: int, kappa: float | None = None) -> float:
    """``sum_{j >= S} 2**(-eps j) 2**(-kappa |j - k|)`` summed directly (tail below 2**-80)."""
    kappa = 2 * epsilon if kappa is None else kappa
    stop = k + int(math.ceil(80.0 / (kappa + epsilon))) + 1
    j = np.arange(S, stop)
    return float(np.sum(2.0 ** (-epsilon * j - kappa * np.abs(j - k))))
