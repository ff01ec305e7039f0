"""Fractional shadow assignment: the full-VM lower bound on placement cost.

Every job is relaxed to the upper endpoint of its latency range and its load
is poured fractionally into a per-(layer, vnf, range) bucket at the request's
highest feasible layer.  A bucket of capacity ``cap`` filled with load ``w``
accounts for floor(w/cap) VMs pinned at maximum speed; the summed cost of
those full VMs lower-bounds what any placement must pay, and doubles as the
load signal driving the adaptive controller.

The capacity divides by the VNF complexity so a full VM at maximum speed
really meets the range's relaxed delay under the queueing law.
"""

import math
from dataclasses import dataclass, field

from .allocation import DelayPlan
from .errors import UnknownRequest
from .model import Catalog, Request, Scenario, SystemParams, Topology, node_cost_full
from .ranges import RangeScheme, range_lookup


@dataclass
class ShadowLedger:
    """Per-(layer, vnf, range) fractional load totals for one epsilon level."""

    scheme: RangeScheme
    topology: Topology
    params: SystemParams
    catalog: Catalog
    level: int = 1
    buckets: dict = field(default_factory=dict)        # (layer, vnf, j) -> load
    _full: dict = field(default_factory=dict)          # (layer, vnf, j) -> #full VMs
    _log: dict = field(default_factory=dict)           # request_id -> [(key, lam)]
    _caps: dict = field(default_factory=dict)          # (vnf, j) -> capacity
    _jcache: dict = field(default_factory=dict)        # budget -> range index
    phi_full: float = 0.0

    def _cap(self, vnf_id: str, j: int) -> float:
        cap = self._caps.get((vnf_id, j))
        if cap is None:
            if j > self.scheme.max_index:
                # Overflow bucket: budgets looser than every range relax to an
                # unbounded delay, so a full VM is limited only by stability.
                rate = self.params.mu_bar
            else:
                rate = self.params.lambda_min * (1.0 + self.scheme.epsilon) ** (j + 1)
            cap = rate / self.catalog.theta(vnf_id)
            self._caps[(vnf_id, j)] = cap
        return cap

    def _kappa(self, layer: int) -> float:
        return node_cost_full(self.topology.layers[layer], self.params)

    def _update_bucket(self, key: tuple, delta: float):
        buckets = self.buckets
        load = buckets.get(key, 0.0) + delta
        buckets[key] = load
        cap = self._caps.get(key[1:])
        if cap is None:
            cap = self._cap(key[1], key[2])
        full = int(load / cap) if load > 0.0 else 0
        old = self._full.get(key, 0)
        if full != old:
            self._full[key] = full
            self.phi_full += (full - old) * self._kappa(key[0])

    def add(self, request: Request, plan: DelayPlan) -> float:
        """Pour the request's per-job loads into its star-layer buckets."""
        contribs = []
        jcache = self._jcache
        for vnf_id, budget in plan.per_vnf_budget.items():
            j = jcache.get(budget)
            if j is None:
                j = range_lookup(self.scheme, budget)
                jcache[budget] = j
            key = (plan.star_layer, vnf_id, j)
            self._update_bucket(key, request.load)
            contribs.append((key, request.load))
        self._log[request.request_id] = contribs
        return self.phi_full

    def remove(self, request_id: int) -> float:
        contribs = self._log.pop(request_id, None)
        if contribs is None:
            raise UnknownRequest(f"request {request_id} was never added to the ledger")
        for key, lam in contribs:
            self._update_bucket(key, -lam)
        return self.phi_full


def shadow_add(ledger: ShadowLedger, request: Request, plan: DelayPlan) -> float:
    return ledger.add(request, plan)


def shadow_remove(ledger: ShadowLedger, request_id: int) -> float:
    return ledger.remove(request_id)


def shadow_full_cost(ledger: ShadowLedger) -> float:
    """Cost rate of the ledger's full VMs, recomputed from the buckets."""
    total = 0.0
    for (layer, vnf_id, j), load in ledger.buckets.items():
        if load <= 0.0:
            continue
        total += math.floor(load / ledger._cap(vnf_id, j)) * ledger._kappa(layer)
    return total


def ledger_reset(ledger: ShadowLedger, new_level: int, new_scheme: RangeScheme
                 ) -> tuple[float, ShadowLedger]:
    """Archive the ledger's cost and start a fresh one for a new level."""
    archived = ledger.phi_full
    fresh = ShadowLedger(
        scheme=new_scheme,
        topology=ledger.topology,
        params=ledger.params,
        catalog=ledger.catalog,
        level=new_level,
    )
    return archived, fresh


def ledger_for(scenario: Scenario, epsilon: float, level: int = 1) -> ShadowLedger:
    return ShadowLedger(
        scheme=RangeScheme.build(scenario.params.mu_bar, scenario.params.lambda_min, epsilon),
        topology=scenario.topology,
        params=scenario.params,
        catalog=scenario.catalog,
        level=level,
    )
