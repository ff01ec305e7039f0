"""Exception types shared across the package."""


class SlicesimError(Exception):
    """Base class for all package-specific errors."""


class ScenarioError(SlicesimError):
    """A scenario file is malformed or violates a model invariant."""


class InfeasibleJob(SlicesimError):
    """A single job cannot be served even alone on a full-speed VM."""


class InfeasibleRequest(SlicesimError):
    """A request cannot be deployed at any layer; the scenario is broken."""


class IndexOutOfScheme(SlicesimError):
    """Latency-range index outside [0, max_index]."""


class BudgetBelowMinimum(SlicesimError):
    """Delay budget below the tightest representable range."""


class BudgetAboveScheme(SlicesimError):
    """Delay budget above the loosest range's upper endpoint."""


class NoValidRange(SlicesimError):
    """The (mu_bar, lambda_min, epsilon) combination admits no range at all."""


class UnknownRequest(SlicesimError):
    """Departure or removal of a request the state has never seen."""


class EmptyVm(SlicesimError):
    """Operation requires a VM that hosts at least one job."""


class InstanceTooLarge(SlicesimError):
    """Exhaustive-oracle instance exceeds the enumeration size bound."""


class Infeasible(SlicesimError):
    """No feasible assignment exists for an oracle instance."""


class InvalidPlan(SlicesimError):
    """Workload phase plan is inconsistent (overlaps, negative rates, ...)."""


class ParseError(SlicesimError):
    """Trace file could not be parsed; carries the offending row number."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class LoadBelowMinimum(SlicesimError):
    """A generated or ingested request carries less load than lambda_min."""


class SimInvariantError(SlicesimError):
    """A runtime invariant was violated during a verified simulation run."""
