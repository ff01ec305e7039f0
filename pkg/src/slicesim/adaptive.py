"""Load-adaptive control of the range width epsilon.

The controller watches the shadow ledger's full-VM cost for the current
interval.  When it crosses both a fixed threshold (scaled for the current
epsilon) and the weighted sum of previously archived interval costs, epsilon
is halved and the system load at that moment becomes the revert threshold
for the new level.  When departures pull the load back below the threshold
at which a level was entered, the previous epsilon is restored.  Each
transition starts a new interval with a fresh ledger.
"""

import math
from dataclasses import dataclass, field

from .model import Scenario, node_cost_full


def compute_Z(scenario: Scenario, epsilon_star: float) -> float:
    """Interval-cost scale constant: grows with node count, VNF variety, costs."""
    topo = scenario.topology
    params = scenario.params
    n = topo.max_nodes_per_layer
    sum_kappa = math.fsum(
        node_cost_full(layer, params) * len(layer.node_ids) for layer in topo.layers
    )
    vnf_count = len(scenario.catalog.vnfs)
    return (
        ((2.0 * n + 2.0) * (1.0 + epsilon_star) + 1.0)
        * math.log(params.mu_bar / params.lambda_min)
        * vnf_count
        * sum_kappa
    )


@dataclass
class EpsilonController:
    """Tracks interval costs and drives the halving/restoring epsilon ladder."""

    epsilon_star: float
    Z: float
    level: int = 1                                   # h, current load-level index
    interval: int = 1                                # q, current interval number
    thresholds_T: dict = field(default_factory=dict)  # level -> load threshold
    archived_Y: dict = field(default_factory=dict)    # level -> last full-VM cost

    def __post_init__(self):
        self.thresholds_T.setdefault(1, 0.0)

    def epsilon_at(self, level: int) -> float:
        return self.epsilon_star / (2.0 ** (level - 1))

    @property
    def epsilon(self) -> float:
        return self.epsilon_at(self.level)

    def thresholds(self) -> tuple[float, float]:
        """(C, S) for the current interval; S is 0 at the first level."""
        eps = self.epsilon
        C = self.Z / (eps * math.log1p(eps))
        S = 0.0
        for p in range(1, self.level):
            S += (2.0 + 3.0 * self.epsilon_at(p)) * self.archived_Y[p]
        S /= eps
        return C, S

    def on_event(self, shadow_cost: float, system_load: float) -> str:
        """Decide after one handled event; mutates the controller on transitions.

        ``shadow_cost`` is the current interval's full-VM cost including the
        event just handled; ``system_load`` is the total load of all live
        requests.  Returns "keep", "decrease" (epsilon halved) or "increase"
        (previous epsilon restored).
        """
        C, S = self.thresholds()
        if shadow_cost >= max(C, S):
            self.archived_Y[self.level] = shadow_cost
            self.thresholds_T[self.level + 1] = system_load
            self.level += 1
            self.interval += 1
            return "decrease"
        if system_load < self.thresholds_T[self.level]:
            self.level -= 1
            self.interval += 1
            return "increase"
        return "keep"

    def archived_sum(self) -> float:
        return math.fsum(self.archived_Y.values())
