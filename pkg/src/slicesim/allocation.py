"""Per-request feasibility, layer choice, and the fair delay split.

A request is feasible at layer L if serving every VNF of its chain alone on
a full-speed VM would still meet the end-to-end target after the forwarding
latency of L.  The highest such layer is preferred (it is the cheapest), and
the remaining latency budget is split across the chain proportionally to
each VNF's full-speed solo latency, so jobs with heavier processing get a
proportionally larger share.
"""

import math
from dataclasses import dataclass

from .errors import InfeasibleJob, InfeasibleRequest
from .model import Request, ServiceSpec, SystemParams, Topology, VnfSpec


@dataclass(frozen=True)
class DelayPlan:
    """Outcome of admitting one request: target layer plus per-job budgets."""

    request_id: int
    star_layer: int
    slack: float                            # target minus forwarding at star layer, ms
    per_vnf_budget: dict[str, float]        # ms
    per_vnf_solo_latency: dict[str, float]  # ms, full-speed solo latency


def solo_latency(vnf: VnfSpec, load: float, params: SystemParams) -> float:
    """Latency of serving the job alone on a VM at maximum speed."""
    rate = params.mu_bar - vnf.theta * load
    if rate <= 0:
        raise InfeasibleJob(
            f"vnf {vnf.vnf_id}: theta*load = {vnf.theta * load} >= mu_bar = {params.mu_bar}"
        )
    return 1.0 / rate


def _chain_solo_latencies(
    request: Request, service: ServiceSpec, catalog_vnfs: dict[str, VnfSpec], params: SystemParams
) -> dict[str, float]:
    return {
        vid: solo_latency(catalog_vnfs[vid], request.load, params)
        for vid in service.vnf_ids
    }


def star_layer(
    request: Request,
    service: ServiceSpec,
    topology: Topology,
    params: SystemParams,
    catalog_vnfs: dict[str, VnfSpec],
) -> int:
    """Highest layer at which the whole chain fits at full VM speed.

    Feasibility is monotone in the layer index (forwarding latency strictly
    increases), so a binary search over layers is valid.
    """
    solo = _chain_solo_latencies(request, service, catalog_vnfs, params)
    total = math.fsum(solo.values())
    ds = service.target_delay

    def feasible(layer: int) -> bool:
        return total <= ds - topology.layers[layer].d

    if not feasible(0):
        raise InfeasibleRequest(
            f"request {request.request_id} infeasible even at layer 0: "
            f"solo latencies sum to {total} ms vs budget {ds - topology.layers[0].d} ms"
        )
    lo, hi = 0, topology.num_layers - 1
    while lo < hi:  # invariant: feasible(lo); find the last feasible layer
        mid = (lo + hi + 1) // 2
        if feasible(mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


def fair_allocation(
    request: Request,
    service: ServiceSpec,
    star: int,
    topology: Topology,
    params: SystemParams,
    catalog_vnfs: dict[str, VnfSpec],
) -> DelayPlan:
    """Split the processing budget across the chain proportionally to solo latency."""
    solo = _chain_solo_latencies(request, service, catalog_vnfs, params)
    total = math.fsum(solo.values())
    slack = service.target_delay - topology.layers[star].d
    scale = slack / total
    budgets = {vid: m * scale for vid, m in solo.items()}
    return DelayPlan(
        request_id=request.request_id,
        star_layer=star,
        slack=slack,
        per_vnf_budget=budgets,
        per_vnf_solo_latency=solo,
    )


def plan_request(
    request: Request,
    service: ServiceSpec,
    topology: Topology,
    params: SystemParams,
    catalog_vnfs: dict[str, VnfSpec],
) -> DelayPlan:
    """Convenience: star layer plus fair allocation in one call."""
    star = star_layer(request, service, topology, params, catalog_vnfs)
    return fair_allocation(request, service, star, topology, params, catalog_vnfs)
