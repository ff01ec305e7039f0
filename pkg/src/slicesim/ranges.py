"""Geometric latency ranges used to group jobs by required service rate.

A job with delay budget D needs a residual rate of 1/D on its VM.  Budgets
are bucketed so that within one bucket the residual-rate requirements differ
by at most a factor (1+epsilon): range j covers budgets in

    ( 1/(mu_bar - lambda_min*(1+eps)^j),  1/(mu_bar - lambda_min*(1+eps)^(j+1)) ]

with range 0 closed on the left at 1/(mu_bar - lambda_min).  Only indices
with lambda_min*(1+eps)^(j+1) < mu_bar are usable.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

from .errors import (
    BudgetAboveScheme,
    BudgetBelowMinimum,
    IndexOutOfScheme,
    NoValidRange,
)

# Relative guard for boundary membership: keeps the right-closed interval
# convention stable when budgets are computed by a different float path than
# the endpoints themselves.
_BOUNDARY_GUARD = 1e-12


@dataclass(frozen=True)
class RangeScheme:
    """An immutable family of latency ranges for one epsilon."""

    epsilon: float
    mu_bar: float
    lambda_min: float
    max_index: int

    @classmethod
    def build(cls, mu_bar: float, lambda_min: float, epsilon: float) -> "RangeScheme":
        return cls(epsilon, mu_bar, lambda_min, scheme_size(mu_bar, lambda_min, epsilon))

    @property
    def min_budget(self) -> float:
        """Left endpoint of range 0 (inclusive)."""
        return 1.0 / (self.mu_bar - self.lambda_min)

    @property
    def max_budget(self) -> float:
        """Right endpoint of the last range (inclusive)."""
        return top_delay(self, self.max_index)


def scheme_size(mu_bar: float, lambda_min: float, epsilon: float) -> int:
    """Largest usable range index, i.e. max j with lambda_min*(1+eps)^(j+1) < mu_bar.

    Raises NoValidRange when even index 0 is unusable
    (lambda_min*(1+epsilon) >= mu_bar).
    """
    if not mu_bar > lambda_min > 0:
        raise NoValidRange(f"need mu_bar > lambda_min > 0, got {mu_bar}, {lambda_min}")
    if epsilon <= 0:
        raise NoValidRange(f"epsilon must be positive, got {epsilon}")
    if lambda_min * (1.0 + epsilon) >= mu_bar:
        raise NoValidRange(
            f"lambda_min*(1+eps) = {lambda_min * (1.0 + epsilon)} >= mu_bar = {mu_bar}"
        )
    j = int(math.floor(math.log(mu_bar / lambda_min) / math.log1p(epsilon))) - 1
    j = max(j, 0)
    # Float fix-up around the boundary.
    while lambda_min * (1.0 + epsilon) ** (j + 2) < mu_bar:
        j += 1
    while j > 0 and lambda_min * (1.0 + epsilon) ** (j + 1) >= mu_bar:
        j -= 1
    return j


def _rate_at(scheme: RangeScheme, j: int) -> float:
    return scheme.lambda_min * (1.0 + scheme.epsilon) ** j


def range_bounds(scheme: RangeScheme, j: int) -> tuple[float, float]:
    """(lower, upper] endpoints of range j; range 0 is closed on the left."""
    if not 0 <= j <= scheme.max_index:
        raise IndexOutOfScheme(f"range index {j} outside [0, {scheme.max_index}]")
    lower = 1.0 / (scheme.mu_bar - _rate_at(scheme, j))
    upper = 1.0 / (scheme.mu_bar - _rate_at(scheme, j + 1))
    return lower, upper


def top_delay(scheme: RangeScheme, j: int) -> float:
    """Upper endpoint of range j: the relaxed delay shared by its top jobs."""
    if not 0 <= j <= scheme.max_index:
        raise IndexOutOfScheme(f"range index {j} outside [0, {scheme.max_index}]")
    return 1.0 / (scheme.mu_bar - _rate_at(scheme, j + 1))


def overflow_index(scheme: RangeScheme) -> int:
    """Synthetic index for budgets looser than every range (no rate floor)."""
    return scheme.max_index + 1


def range_or_overflow(scheme: RangeScheme, delay_budget: float) -> int:
    """Like range_index but maps above-scheme budgets to the overflow index."""
    try:
        return range_index(scheme, delay_budget)
    except BudgetAboveScheme:
        return overflow_index(scheme)


@lru_cache(maxsize=65536)
def _cached_lookup(scheme: RangeScheme, delay_budget: float) -> int:
    try:
        return range_index(scheme, delay_budget)
    except BudgetAboveScheme:
        return overflow_index(scheme)
    except BudgetBelowMinimum:
        return -1


def range_lookup(scheme: RangeScheme, delay_budget: float) -> int:
    """Memoized range_or_overflow for the hot path (budgets repeat heavily)."""
    j = _cached_lookup(scheme, delay_budget)
    if j < 0:
        raise BudgetBelowMinimum(
            f"budget {delay_budget} below tightest representable delay"
        )
    return j


def range_index(scheme: RangeScheme, delay_budget: float, clamp: bool = False) -> int:
    """Index of the range containing the budget.

    Budgets above the last range raise BudgetAboveScheme unless ``clamp`` is
    set, in which case they fall into the loosest range (the job is at least
    as easy as any job there, so feasibility is preserved).
    """
    lo0 = 1.0 / (scheme.mu_bar - scheme.lambda_min)
    if delay_budget < lo0 * (1.0 - _BOUNDARY_GUARD):
        raise BudgetBelowMinimum(
            f"budget {delay_budget} below tightest representable delay {lo0}"
        )
    top = scheme.max_index
    x = (scheme.mu_bar - 1.0 / delay_budget) / scheme.lambda_min
    if x <= 1.0:
        j = 0
    else:
        j = int(math.log(x) / math.log1p(scheme.epsilon))
    j = min(max(j, 0), top)
    # Fix up against the exact endpoints (log arithmetic may be off by one).
    while j > 0 and delay_budget <= top_delay(scheme, j - 1) * (1.0 + _BOUNDARY_GUARD):
        j -= 1
    while delay_budget > top_delay(scheme, j) * (1.0 + _BOUNDARY_GUARD):
        j += 1
        if j > top:
            if clamp:
                return top
            raise BudgetAboveScheme(
                f"budget {delay_budget} above last range endpoint {top_delay(scheme, top)}"
            )
    return j
