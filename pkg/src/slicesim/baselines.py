"""Comparison strategies: an exhaustive optimum for tiny instances and a
greedy marginal-cost benchmark.

The oracle enumerates, per (VNF, layer), every set partition of the jobs
into VMs, prices each VM at the cheapest feasible speed, and returns the
minimum total instantaneous cost.  It is exponential and guarded by a size
bound; it exists to validate the shadow lower bound and the packing
engine's cost bounds on small instances.

The greedy benchmark ("relax-sota" on the command line) is a documented
stand-in for relaxation-based placement schemes: each job independently
goes wherever the marginal instantaneous cost is smallest, existing VMs may
be reused across latency ranges, and jobs of one request may land at
different layers.
"""

import itertools
import math
from dataclasses import dataclass

from . import kernels
from .allocation import DelayPlan, plan_request
from .engine import PlacementState
from .errors import Infeasible, InstanceTooLarge
from .model import Request, Scenario, SystemParams, Topology


@dataclass(frozen=True)
class OracleJob:
    request_id: int
    vnf_id: str
    theta: float
    load: float
    budget: float     # ms
    max_layer: int    # highest layer this job's request may use


@dataclass
class OracleInstance:
    jobs: list[OracleJob]
    topology: Topology
    params: SystemParams
    single_layer_per_request: bool = True
    max_jobs: int = 6


def instance_from_requests(scenario: Scenario, requests: list[Request],
                           plans: dict[int, DelayPlan] | None = None,
                           max_jobs: int = 6,
                           single_layer_per_request: bool = True) -> OracleInstance:
    """Freeze requests (with their fair budgets) into an oracle instance."""
    jobs = []
    for req in requests:
        service = scenario.catalog.services[req.service_id]
        plan = plans[req.request_id] if plans else plan_request(
            req, service, scenario.topology, scenario.params, scenario.catalog.vnfs
        )
        for vnf_id in service.vnf_ids:
            jobs.append(OracleJob(
                request_id=req.request_id,
                vnf_id=vnf_id,
                theta=scenario.catalog.theta(vnf_id),
                load=req.load,
                budget=plan.per_vnf_budget[vnf_id],
                max_layer=plan.star_layer,
            ))
    return OracleInstance(jobs, scenario.topology, scenario.params,
                          single_layer_per_request=single_layer_per_request,
                          max_jobs=max_jobs)


def _vm_cost(block: list[OracleJob], layer, mu_bar: float) -> float | None:
    """Cheapest feasible cost of one VM hosting the block, or None."""
    load = math.fsum(j.load for j in block)
    theta = block[0].theta
    mu = theta * load + 1.0 / min(j.budget for j in block)
    if mu > mu_bar:
        return None
    return layer.kappa_f + layer.kappa_p * mu


def _min_partition_cost(jobs: tuple[OracleJob, ...], layer, mu_bar: float) -> float:
    """Minimum total VM cost over all set partitions of same-VNF jobs."""
    best = math.inf

    def rec(i: int, blocks: list[list[OracleJob]], costs: list[float], total: float):
        nonlocal best
        if total >= best:
            return
        if i == len(jobs):
            best = total
            return
        job = jobs[i]
        for k in range(len(blocks)):
            blocks[k].append(job)
            c = _vm_cost(blocks[k], layer, mu_bar)
            if c is not None:
                old = costs[k]
                costs[k] = c
                rec(i + 1, blocks, costs, total - old + c)
                costs[k] = old
            blocks[k].pop()
        c = _vm_cost([job], layer, mu_bar)
        if c is not None:
            blocks.append([job])
            costs.append(c)
            rec(i + 1, blocks, costs, total + c)
            blocks.pop()
            costs.pop()

    rec(0, [], [], 0.0)
    return best


def count_partitions(n: int) -> int:
    """Number of set partitions of n items (sanity check for the enumerator)."""
    if n == 0:
        return 1
    count = 0

    def rec(i: int, nblocks: int, sizes: list[int]):
        nonlocal count
        if i == n:
            count += 1
            return
        for k in range(nblocks):
            sizes[k] += 1
            rec(i + 1, nblocks, sizes)
            sizes[k] -= 1
        sizes.append(1)
        rec(i + 1, nblocks + 1, sizes)
        sizes.pop()

    rec(0, 0, [])
    return count


def oracle_optimal_cost(instance: OracleInstance) -> tuple[float, list[dict]]:
    """Exhaustive minimum instantaneous cost and one optimal assignment."""
    jobs = instance.jobs
    if len(jobs) > instance.max_jobs:
        raise InstanceTooLarge(f"{len(jobs)} jobs exceeds bound {instance.max_jobs}")
    if not jobs:
        return 0.0, []
    topo = instance.topology
    mu_bar = instance.params.mu_bar
    group_cache: dict[tuple, float] = {}

    def group_cost(group: tuple[int, ...], layer_idx: int) -> float:
        key = (group, layer_idx)
        cached = group_cache.get(key)
        if cached is None:
            cached = _min_partition_cost(
                tuple(jobs[i] for i in group), topo.layers[layer_idx], mu_bar
            )
            group_cache[key] = cached
        return cached

    if instance.single_layer_per_request:
        rids = sorted({j.request_id for j in jobs})
        by_rid = {rid: [i for i, j in enumerate(jobs) if j.request_id == rid] for rid in rids}
        choice_sets = [range(min(jobs[i].max_layer for i in by_rid[rid]) + 1) for rid in rids]

        def layer_of(assignment, i):
            return assignment[rids.index(jobs[i].request_id)]
    else:
        choice_sets = [range(j.max_layer + 1) for j in jobs]

        def layer_of(assignment, i):
            return assignment[i]

    best = math.inf
    best_groups = None
    for assignment in itertools.product(*choice_sets):
        groups: dict[tuple, list[int]] = {}
        for i, job in enumerate(jobs):
            groups.setdefault((job.vnf_id, layer_of(assignment, i)), []).append(i)
        total = 0.0
        for (_vnf, layer_idx), idxs in groups.items():
            total += group_cost(tuple(idxs), layer_idx)
            if total >= best:
                break
        if total < best:
            best = total
            best_groups = groups
    if not math.isfinite(best):
        raise Infeasible("no feasible assignment for the instance")

    # Re-derive one optimal partition per group for reporting.
    vms = []
    for (vnf_id, layer_idx), idxs in best_groups.items():
        vms.extend(_best_partition_blocks(
            tuple(jobs[i] for i in idxs), topo.layers[layer_idx], mu_bar, vnf_id, layer_idx
        ))
    return best, vms


def _best_partition_blocks(group_jobs, layer, mu_bar, vnf_id, layer_idx) -> list[dict]:
    best = [math.inf, None]

    def rec(i, blocks, costs, total):
        if total >= best[0]:
            return
        if i == len(group_jobs):
            best[0] = total
            best[1] = [list(b) for b in blocks]
            return
        job = group_jobs[i]
        for k in range(len(blocks)):
            blocks[k].append(job)
            c = _vm_cost(blocks[k], layer, mu_bar)
            if c is not None:
                old = costs[k]
                costs[k] = c
                rec(i + 1, blocks, costs, total - old + c)
                costs[k] = old
            blocks[k].pop()
        c = _vm_cost([job], layer, mu_bar)
        if c is not None:
            blocks.append([job])
            costs.append(c)
            rec(i + 1, blocks, costs, total + c)
            blocks.pop()
            costs.pop()

    rec(0, [], [], 0.0)
    out = []
    for block in best[1] or []:
        speed = block[0].theta * math.fsum(j.load for j in block) + 1.0 / min(
            j.budget for j in block
        )
        out.append({
            "layer": layer_idx,
            "vnf": vnf_id,
            "speed": speed,
            "jobs": [(j.request_id, j.vnf_id) for j in block],
        })
    return out


class GreedyMarginalEngine:
    """Per-job cheapest-increment placement with unrestricted VM sharing."""

    def __init__(self, scenario: Scenario, verify: bool = True,
                 state: PlacementState | None = None):
        self.scenario = scenario
        self.state = state if state is not None else PlacementState(scenario, verify=verify)

    def place_request(self, request: Request, plan: DelayPlan | None = None) -> DelayPlan:
        scenario = self.scenario
        topo = scenario.topology
        service = scenario.catalog.services[request.service_id]
        if plan is None:
            plan = plan_request(request, service, topo, scenario.params, scenario.catalog.vnfs)
        star = plan.star_layer
        state = self.state
        ridx = state.register_request(request, limit=plan.slack, star=star)
        lam = request.load
        used_layers = []
        for vnf_id in service.vnf_ids:
            budget = plan.per_vnf_budget[vnf_id]
            theta = scenario.catalog.theta(vnf_id)
            best = None
            for layer_idx in range(star + 1):
                spec = topo.layers[layer_idx]
                nodes = topo.reachable(request.leaf, layer_idx)
                for node in nodes:
                    bucket = state.buckets.get((node, vnf_id))
                    if not bucket or bucket[1] == 0:
                        continue
                    slot, marginal = kernels.greedy_pick(
                        state.vm_load, state.vm_min_d, state.vm_mu,
                        bucket[0], bucket[1], lam, budget, theta,
                        state.mu_bar, spec.kappa_p,
                    )
                    if slot >= 0:
                        cand = (marginal, 0, int(state.vm_uid[slot]), 0, slot, layer_idx)
                        if best is None or cand < best:
                            best = cand
                fresh_node = min(nodes, key=lambda nd: (state.node_load.get(nd, 0.0), nd))
                fresh_cost = spec.kappa_f + spec.kappa_p * (theta * lam + 1.0 / budget)
                cand = (fresh_cost, 1, layer_idx, fresh_node, -1, layer_idx)
                if best is None or cand < best:
                    best = cand
            _cost, kind, _a, _b, slot, layer_idx = best
            if kind == 0:
                state.add_job(slot, ridx, lam, budget)
            else:
                node = _b
                state.open_vm(node, layer_idx, vnf_id, theta, (node, vnf_id),
                              level=0, range_j=-1, ridx=ridx, lam=lam, budget=budget)
            used_layers.append(layer_idx)
        d_fwd = max(topo.layers[l].d for l in used_layers)
        state.set_request_limit(ridx, service.target_delay - d_fwd)
        return plan

    def remove_request(self, request_id: int) -> float:
        phi_before = self.state.phi
        rec = self.state.release_request(request_id)
        ridx = rec["ridx"]
        for _vnf, slot in rec["jobs"]:
            self.state.remove_job(slot, ridx)
        self.state.free_request_slot(ridx)
        return phi_before - self.state.phi
