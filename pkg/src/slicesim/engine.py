"""Online placement engine: stateful VM store plus best-fit range packing.

``PlacementState`` is a single-owner mutable store of live VMs and the
requests they serve, kept in flat slot arrays so the per-event hot path
(candidate scan, budget bookkeeping) can run through the compiled kernels.
``RangePackingEngine`` is the placement policy: every request lands whole in
one node at its highest feasible layer, and each job is packed best-fit into
a VM that only hosts jobs of the same latency range.

Speeds are kept exact at all times: a VM runs at theta*load + 1/min_budget,
the cheapest speed meeting every resident deadline, and is destroyed the
moment it empties.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .allocation import DelayPlan, plan_request
from .errors import EmptyVm, SimInvariantError, UnknownRequest
from .model import Request, Scenario
from .ranges import RangeScheme, range_lookup

# Relative tolerance for every runtime invariant check.
REL_TOL = 1e-9


@dataclass(frozen=True)
class VmView:
    """Read-only snapshot of one live VM."""

    vm_id: int
    node: int
    layer: int
    vnf_id: str
    level: int
    range_j: int
    speed: float
    load: float
    theta: float
    min_budget: float
    max_budget: float
    njobs: int


class PlacementState:
    """All live VMs plus indices for best-fit lookup; owned by one strategy.

    ``verify`` turns on continuous invariant checking: per-request latency
    sums are maintained incrementally and compared against their budgets on
    every change, speeds are checked against the cap, and ``audit()``
    recomputes everything from scratch.
    """

    def __init__(self, scenario: Scenario, verify: bool = True):
        self.scenario = scenario
        self.topology = scenario.topology
        self.params = scenario.params
        self.catalog = scenario.catalog
        self.verify = verify
        self.mu_bar = scenario.params.mu_bar

        cap = 256
        self._vm_cap = cap
        self.vm_load = np.zeros(cap)
        self.vm_mu = np.zeros(cap)
        self.vm_min_d = np.zeros(cap)
        self.vm_max_d = np.zeros(cap)
        self.vm_delay = np.zeros(cap)
        self.vm_theta = np.zeros(cap)
        self.vm_phi = np.zeros(cap)
        self.vm_pod = np.zeros(cap)
        self.vm_node = np.zeros(cap, dtype=np.int64)
        self.vm_layer = np.zeros(cap, dtype=np.int64)
        self.vm_uid = np.zeros(cap, dtype=np.int64)
        self.vm_njobs: list[int] = [0] * cap
        self.vm_level = np.zeros(cap, dtype=np.int64)
        self.vm_range_j = np.zeros(cap, dtype=np.int64)
        self.vm_alive = np.zeros(cap, dtype=bool)
        self.vm_vnf: list[str | None] = [None] * cap
        self.vm_jobs: list[dict | None] = [None] * cap
        self.vm_key: list[tuple | None] = [None] * cap
        self._vm_budget_count: list[dict | None] = [None] * cap
        self._vm_reqs: list[np.ndarray | None] = [None] * cap
        self._vm_reqn: list[int] = [0] * cap
        self._vm_reqpos: list[dict | None] = [None] * cap
        self._vm_free: list[int] = list(range(cap - 1, -1, -1))
        self._next_uid = 0

        rcap = 256
        self._req_cap = rcap
        self.req_sum = np.zeros(rcap)
        self.req_limit = np.zeros(rcap)
        self._req_free: list[int] = list(range(rcap - 1, -1, -1))
        self.req_index: dict[int, int] = {}
        self.req_records: dict[int, dict] = {}

        self.buckets: dict[tuple, list] = {}       # key -> [np.int64 array, count]
        self.bucket_load: dict[tuple, float] = {}
        self.bucket_meta: dict[tuple, tuple] = {}  # key -> (theta, rate_floor)

        self.phi = 0.0
        self.total_mu = 0.0
        self.total_pod = 0.0
        self.vm_count = 0
        self.system_load = 0.0
        self.node_load: dict[int, float] = {}
        self.level_phi: dict[int, float] = {}

        # Packing-density bound: asserted on arrival-only prefixes, tracked
        # as a metric afterwards.
        self.bound_assert = verify
        self.max_bound_ratio = 0.0

        self._kf = [l.kappa_f for l in self.topology.layers]
        self._kp = [l.kappa_p for l in self.topology.layers]

    # -- slot management ---------------------------------------------------

    def _grow_vms(self):
        old = self._vm_cap
        new = old * 2
        for name in ("vm_load", "vm_mu", "vm_min_d", "vm_max_d", "vm_delay",
                     "vm_theta", "vm_phi", "vm_pod"):
            arr = np.zeros(new)
            arr[:old] = getattr(self, name)
            setattr(self, name, arr)
        for name in ("vm_node", "vm_layer", "vm_uid", "vm_level", "vm_range_j"):
            arr = np.zeros(new, dtype=np.int64)
            arr[:old] = getattr(self, name)
            setattr(self, name, arr)
        self.vm_njobs.extend([0] * old)
        self._vm_reqn.extend([0] * old)
        alive = np.zeros(new, dtype=bool)
        alive[:old] = self.vm_alive
        self.vm_alive = alive
        for name in ("vm_vnf", "vm_jobs", "vm_key",
                     "_vm_budget_count", "_vm_reqs", "_vm_reqpos"):
            getattr(self, name).extend([None] * old)
        self._vm_free = list(range(new - 1, old - 1, -1))
        self._vm_cap = new

    def _grow_reqs(self):
        old = self._req_cap
        new = old * 2
        for name in ("req_sum", "req_limit"):
            arr = np.zeros(new)
            arr[:old] = getattr(self, name)
            setattr(self, name, arr)
        self._req_free = list(range(new - 1, old - 1, -1))
        self._req_cap = new

    # -- request registry --------------------------------------------------

    def register_request(self, request: Request, limit: float, star: int) -> int:
        if request.request_id in self.req_index:
            raise SimInvariantError(f"request {request.request_id} already active")
        if not self._req_free:
            self._grow_reqs()
        ridx = self._req_free.pop()
        self.req_index[request.request_id] = ridx
        self.req_sum[ridx] = 0.0
        self.req_limit[ridx] = limit
        self.req_records[ridx] = {
            "request": request,
            "star": star,
            "jobs": [],  # (vnf_id, slot)
        }
        self.system_load += request.load
        return ridx

    def set_request_limit(self, ridx: int, limit: float):
        self.req_limit[ridx] = limit
        if self.verify and self.req_sum[ridx] > limit * (1.0 + REL_TOL):
            rec = self.req_records[ridx]
            raise SimInvariantError(
                f"request {rec['request'].request_id}: latency sum {self.req_sum[ridx]} "
                f"exceeds budget {limit}"
            )

    def release_request(self, request_id: int) -> dict:
        """Unregister a request; its slot is recycled by ``free_request_slot``."""
        ridx = self.req_index.pop(request_id, None)
        if ridx is None:
            raise UnknownRequest(f"request {request_id} is not active")
        rec = self.req_records.pop(ridx)
        self.system_load -= rec["request"].load
        rec["ridx"] = ridx
        return rec

    def free_request_slot(self, ridx: int):
        self.req_sum[ridx] = 0.0
        self._req_free.append(ridx)

    # -- bucket helpers ------------------------------------------------------

    def _bucket_append(self, key: tuple, slot: int):
        b = self.buckets.get(key)
        if b is None:
            b = [np.zeros(8, dtype=np.int64), 0]
            self.buckets[key] = b
            self.bucket_load[key] = 0.0
        arr, n = b
        if n == arr.shape[0]:
            arr = np.resize(arr, n * 2)
            b[0] = arr
        arr[n] = slot
        b[1] = n + 1

    def _bucket_remove(self, key: tuple, slot: int):
        arr, n = self.buckets[key]
        for i in range(n):
            if arr[i] == slot:
                arr[i:n - 1] = arr[i + 1:n].copy()
                self.buckets[key][1] = n - 1
                return
        raise SimInvariantError(f"slot {slot} missing from bucket {key}")

    def _check_bucket_bound(self, key: tuple):
        meta = self.bucket_meta.get(key)
        if meta is None:
            return
        theta, rate_floor = meta
        n = self.buckets[key][1]
        if n <= 1:
            return
        bound = 2.0 * theta * self.bucket_load[key] / rate_floor + 1.0
        ratio = n / bound
        if ratio > self.max_bound_ratio:
            self.max_bound_ratio = ratio
        if self.bound_assert and ratio > 1.0 + REL_TOL:
            raise SimInvariantError(
                f"bucket {key}: {n} VMs exceeds packing bound {bound}"
            )

    # -- VM mutation ---------------------------------------------------------

    def _refresh_vm(self, slot: int):
        rated = self.vm_theta[slot] * self.vm_load[slot]
        mu = rated + 1.0 / self.vm_min_d[slot]
        margin = mu - rated
        layer = self.vm_layer[slot]
        phi = self._kf[layer] + self._kp[layer] * mu
        pod = margin - 1.0 / self.vm_max_d[slot]
        phi_delta = phi - self.vm_phi[slot]
        self.phi += phi_delta
        self.total_mu += mu - self.vm_mu[slot]
        self.total_pod += pod - self.vm_pod[slot]
        lvl = int(self.vm_level[slot])
        self.level_phi[lvl] = self.level_phi.get(lvl, 0.0) + phi_delta
        self.vm_mu[slot] = mu
        self.vm_delay[slot] = 1.0 / margin
        self.vm_phi[slot] = phi
        self.vm_pod[slot] = pod
        if self.verify and mu > self.mu_bar * (1.0 + REL_TOL):
            raise SimInvariantError(
                f"vm {self.vm_uid[slot]}: speed {mu} exceeds cap {self.mu_bar}"
            )

    def _raise_budget_breach(self, ridx: int):
        rec = self.req_records[ridx]
        raise SimInvariantError(
            f"request {rec['request'].request_id}: latency sum {self.req_sum[ridx]} "
            f"exceeds budget {self.req_limit[ridx]}"
        )

    def find_best_fit(self, key: tuple, lam: float, budget: float, theta: float) -> int:
        b = self.buckets.get(key)
        if b is None or b[1] == 0:
            return -1
        return kernels.best_fit_pick(
            self.vm_load, self.vm_min_d, b[0], b[1], lam, budget, theta, self.mu_bar
        )

    def open_vm(self, node: int, layer: int, vnf_id: str, theta: float, key: tuple,
                level: int, range_j: int, ridx: int, lam: float, budget: float,
                rate_floor: float | None = None) -> int:
        """Create a VM holding its first job."""
        if not self._vm_free:
            self._grow_vms()
        slot = self._vm_free.pop()
        self.vm_alive[slot] = True
        self.vm_node[slot] = node
        self.vm_layer[slot] = layer
        self.vm_theta[slot] = theta
        self.vm_uid[slot] = self._next_uid
        self._next_uid += 1
        self.vm_level[slot] = level
        self.vm_range_j[slot] = range_j
        self.vm_vnf[slot] = vnf_id
        self.vm_key[slot] = key
        self.vm_jobs[slot] = {}
        self._vm_budget_count[slot] = {}
        self._vm_reqs[slot] = np.zeros(4, dtype=np.int64)
        self._vm_reqn[slot] = 0
        self._vm_reqpos[slot] = {}
        self.vm_load[slot] = 0.0
        self.vm_njobs[slot] = 0
        self.vm_min_d[slot] = math.inf
        self.vm_max_d[slot] = 0.0
        self.vm_mu[slot] = 0.0
        self.vm_delay[slot] = 0.0
        self.vm_phi[slot] = 0.0
        self.vm_pod[slot] = 0.0
        self.vm_count += 1
        if rate_floor is not None and key not in self.bucket_meta:
            self.bucket_meta[key] = (theta, rate_floor)
        self._bucket_append(key, slot)
        self.add_job(slot, ridx, lam, budget, _new_vm=True)
        return slot

    def add_job(self, slot: int, ridx: int, lam: float, budget: float,
                _new_vm: bool = False):
        self.vm_jobs[slot][ridx] = (lam, budget)
        counts = self._vm_budget_count[slot]
        counts[budget] = counts.get(budget, 0) + 1
        vm_min_d = self.vm_min_d
        vm_max_d = self.vm_max_d
        min_d = vm_min_d[slot]
        max_d = vm_max_d[slot]
        if budget < min_d:
            vm_min_d[slot] = min_d = budget
        if budget > max_d:
            vm_max_d[slot] = max_d = budget
        vm_load = self.vm_load
        load = vm_load[slot] + lam
        vm_load[slot] = load
        self.vm_njobs[slot] += 1
        key = self.vm_key[slot]
        self.bucket_load[key] += lam
        node = int(self.vm_node[slot])
        theta = self.vm_theta[slot]
        self.node_load[node] = self.node_load.get(node, 0.0) + theta * lam

        reqs = self._vm_reqs[slot]
        n = self._vm_reqn[slot]
        if n == reqs.shape[0]:
            reqs = np.resize(reqs, n * 2)
            self._vm_reqs[slot] = reqs
        reqs[n] = ridx
        self._vm_reqpos[slot][ridx] = n
        self._vm_reqn[slot] = n + 1

        # speed exactness: cheapest speed meeting every resident deadline
        rated = theta * load
        mu = rated + 1.0 / min_d
        margin = mu - rated
        delay = 1.0 / margin
        phi = self._kf[self.vm_layer[slot]] + self._kp[self.vm_layer[slot]] * mu
        pod = margin - 1.0 / max_d
        phi_delta = phi - self.vm_phi[slot]
        self.phi += phi_delta
        self.total_mu += mu - self.vm_mu[slot]
        self.total_pod += pod - self.vm_pod[slot]
        lvl = int(self.vm_level[slot])
        self.level_phi[lvl] = self.level_phi.get(lvl, 0.0) + phi_delta
        self.vm_mu[slot] = mu
        d_old = self.vm_delay[slot]
        self.vm_delay[slot] = delay
        self.vm_phi[slot] = phi
        self.vm_pod[slot] = pod

        if self.verify:
            if mu > self.mu_bar * (1.0 + REL_TOL):
                raise SimInvariantError(
                    f"vm {self.vm_uid[slot]}: speed {mu} exceeds cap {self.mu_bar}"
                )
            req_sum = self.req_sum
            req_limit = self.req_limit
            if not _new_vm and n > 0:
                bad = kernels.add_and_check(
                    req_sum, req_limit, reqs, n, delay - d_old, REL_TOL
                )
                if bad >= 0:
                    self._raise_budget_breach(int(bad))
            req_sum[ridx] += delay
            if req_sum[ridx] > req_limit[ridx] * (1.0 + REL_TOL):
                self._raise_budget_breach(ridx)
            if key in self.bucket_meta:
                self._check_bucket_bound(key)
        self.req_records[ridx]["jobs"].append((self.vm_vnf[slot], slot))

    def remove_job(self, slot: int, ridx: int) -> bool:
        """Remove one request's job from a VM; True if the VM was destroyed."""
        lam, budget = self.vm_jobs[slot].pop(ridx)
        d_old = self.vm_delay[slot]
        if self.verify:
            self.req_sum[ridx] -= d_old
        counts = self._vm_budget_count[slot]
        left = counts[budget] - 1
        if left:
            counts[budget] = left
        else:
            del counts[budget]
        self.vm_load[slot] -= lam
        self.vm_njobs[slot] -= 1
        key = self.vm_key[slot]
        self.bucket_load[key] -= lam
        node = int(self.vm_node[slot])
        self.node_load[node] -= self.vm_theta[slot] * lam

        reqs = self._vm_reqs[slot]
        pos = self._vm_reqpos[slot].pop(ridx)
        n = int(self._vm_reqn[slot]) - 1
        if pos != n:
            moved = reqs[n]
            reqs[pos] = moved
            self._vm_reqpos[slot][int(moved)] = pos
        self._vm_reqn[slot] = n

        if self.vm_njobs[slot] == 0:
            self._destroy_vm(slot)
            return True
        if not left:
            # the departing budget was the last of its value: min/max may move
            if budget <= self.vm_min_d[slot]:
                self.vm_min_d[slot] = min(counts)
            if budget >= self.vm_max_d[slot]:
                self.vm_max_d[slot] = max(counts)
        rated = self.vm_theta[slot] * self.vm_load[slot]
        mu = rated + 1.0 / self.vm_min_d[slot]
        margin = mu - rated
        delay = 1.0 / margin
        phi = self._kf[self.vm_layer[slot]] + self._kp[self.vm_layer[slot]] * mu
        pod = margin - 1.0 / self.vm_max_d[slot]
        phi_delta = phi - self.vm_phi[slot]
        self.phi += phi_delta
        self.total_mu += mu - self.vm_mu[slot]
        self.total_pod += pod - self.vm_pod[slot]
        lvl = int(self.vm_level[slot])
        self.level_phi[lvl] = self.level_phi.get(lvl, 0.0) + phi_delta
        self.vm_mu[slot] = mu
        self.vm_delay[slot] = delay
        self.vm_phi[slot] = phi
        self.vm_pod[slot] = pod
        if self.verify and n > 0:
            bad = kernels.add_and_check(
                self.req_sum, self.req_limit, reqs, n, delay - d_old, REL_TOL
            )
            if bad >= 0:
                self._raise_budget_breach(int(bad))
        return False

    def _destroy_vm(self, slot: int):
        self.phi -= self.vm_phi[slot]
        self.total_mu -= self.vm_mu[slot]
        self.total_pod -= self.vm_pod[slot]
        lvl = int(self.vm_level[slot])
        self.level_phi[lvl] = self.level_phi.get(lvl, 0.0) - self.vm_phi[slot]
        self.vm_count -= 1
        self._bucket_remove(self.vm_key[slot], slot)
        self.vm_alive[slot] = False
        self.vm_jobs[slot] = None
        self.vm_key[slot] = None
        self.vm_vnf[slot] = None
        self._vm_budget_count[slot] = None
        self._vm_reqs[slot] = None
        self._vm_reqpos[slot] = None
        self._vm_reqn[slot] = 0
        self._vm_free.append(slot)

    # -- introspection -------------------------------------------------------

    def vm_view(self, slot: int) -> VmView:
        if not self.vm_alive[slot] or self.vm_njobs[slot] == 0:
            raise EmptyVm(f"slot {slot} holds no jobs")
        return VmView(
            vm_id=int(self.vm_uid[slot]),
            node=int(self.vm_node[slot]),
            layer=int(self.vm_layer[slot]),
            vnf_id=self.vm_vnf[slot],
            level=int(self.vm_level[slot]),
            range_j=int(self.vm_range_j[slot]),
            speed=float(self.vm_mu[slot]),
            load=float(self.vm_load[slot]),
            theta=float(self.vm_theta[slot]),
            min_budget=float(self.vm_min_d[slot]),
            max_budget=float(self.vm_max_d[slot]),
            njobs=int(self.vm_njobs[slot]),
        )

    def iter_vms(self):
        slots = np.nonzero(self.vm_alive)[0]
        for slot in sorted(slots, key=lambda s: self.vm_uid[s]):
            yield self.vm_view(int(slot))

    def phi_recomputed(self) -> float:
        return float(np.sum(self.vm_phi[self.vm_alive]))

    # -- full cross-check ----------------------------------------------------

    def audit(self):
        """Recompute every maintained quantity from scratch and compare."""

        def close(a, b, what):
            scale = max(abs(a), abs(b), 1e-30)
            if abs(a - b) > REL_TOL * scale and abs(a - b) > 1e-12:
                raise SimInvariantError(f"{what}: incremental {a} vs recomputed {b}")

        sums = np.zeros_like(self.req_sum)
        phi = mu = pod = 0.0
        node_load: dict[int, float] = {}
        bucket_load: dict[tuple, float] = {}
        for slot in np.nonzero(self.vm_alive)[0]:
            slot = int(slot)
            jobs = self.vm_jobs[slot]
            if not jobs:
                raise SimInvariantError(f"alive vm in slot {slot} has no jobs")
            load = math.fsum(lam for lam, _ in jobs.values())
            budgets = [b for _, b in jobs.values()]
            close(self.vm_load[slot], load, f"vm {slot} load")
            close(self.vm_min_d[slot], min(budgets), f"vm {slot} min budget")
            close(self.vm_max_d[slot], max(budgets), f"vm {slot} max budget")
            theta = self.vm_theta[slot]
            mu_b = theta * load + 1.0 / min(budgets)
            close(self.vm_mu[slot], mu_b, f"vm {slot} speed")
            if mu_b > self.mu_bar * (1.0 + REL_TOL):
                raise SimInvariantError(f"vm {slot} over speed cap: {mu_b}")
            if not load < mu_b / theta:
                raise SimInvariantError(f"vm {slot} unstable: load {load} speed {mu_b}")
            layer = int(self.vm_layer[slot])
            phi += self._kf[layer] + self._kp[layer] * self.vm_mu[slot]
            mu += self.vm_mu[slot]
            pod += self.vm_pod[slot]
            node = int(self.vm_node[slot])
            node_load[node] = node_load.get(node, 0.0) + theta * load
            key = self.vm_key[slot]
            bucket_load[key] = bucket_load.get(key, 0.0) + load
            for ridx in jobs:
                sums[ridx] += self.vm_delay[slot]
        close(self.phi, phi, "phi")
        close(self.total_mu, mu, "total speed")
        close(self.total_pod, pod, "total pod")
        for node, val in node_load.items():
            close(self.node_load.get(node, 0.0), val, f"node {node} load")
        for key, val in bucket_load.items():
            close(self.bucket_load.get(key, 0.0), val, f"bucket {key} load")
        sys_load = math.fsum(r["request"].load for r in self.req_records.values())
        close(self.system_load, sys_load, "system load")
        for rid, ridx in self.req_index.items():
            close(self.req_sum[ridx], sums[ridx], f"request {rid} latency sum")
            if sums[ridx] > self.req_limit[ridx] * (1.0 + REL_TOL):
                raise SimInvariantError(
                    f"request {rid}: latency {sums[ridx]} over budget {self.req_limit[ridx]}"
                )


class RangePackingEngine:
    """Fixed-policy placement: whole request at one node, best-fit per range."""

    def __init__(self, scenario: Scenario, epsilon: float, verify: bool = True,
                 state: PlacementState | None = None):
        self.scenario = scenario
        self.state = state if state is not None else PlacementState(scenario, verify=verify)
        self.level = 1
        self.scheme = RangeScheme.build(
            scenario.params.mu_bar, scenario.params.lambda_min, epsilon
        )
        self._rate_floor_cache: dict[int, float] = {}
        self._j_cache: dict[float, int] = {}

    @property
    def epsilon(self) -> float:
        return self.scheme.epsilon

    def set_scheme(self, level: int, scheme: RangeScheme):
        """Switch the active range family; existing VMs keep running."""
        self.level = level
        self.scheme = scheme
        self._rate_floor_cache = {}
        self._j_cache = {}

    def _rate_floor(self, j: int) -> float:
        rf = self._rate_floor_cache.get(j)
        if rf is None:
            rf = self.scenario.params.lambda_min * (1.0 + self.scheme.epsilon) ** j
            self._rate_floor_cache[j] = rf
        return rf

    def pick_node(self, leaf: int, layer: int) -> int:
        nodes = self.scenario.topology.reachable(leaf, layer)
        node_load = self.state.node_load
        return min(nodes, key=lambda nd: (node_load.get(nd, 0.0), nd))

    def place_request(self, request: Request, plan: DelayPlan | None = None) -> DelayPlan:
        scenario = self.scenario
        service = scenario.catalog.services[request.service_id]
        if plan is None:
            plan = plan_request(
                request, service, scenario.topology, scenario.params, scenario.catalog.vnfs
            )
        star = plan.star_layer
        node = self.pick_node(request.leaf, star)
        ridx = self.state.register_request(request, limit=plan.slack, star=star)
        for vnf_id in service.vnf_ids:
            budget = plan.per_vnf_budget[vnf_id]
            self.assign_job(node, star, vnf_id, ridx, request.load, budget)
        return plan

    def assign_job(self, node: int, layer: int, vnf_id: str, ridx: int,
                   lam: float, budget: float) -> int:
        j = self._j_cache.get(budget)
        if j is None:
            j = min(range_lookup(self.scheme, budget), self.scheme.max_index)
            self._j_cache[budget] = j
        theta = self.scenario.catalog.theta(vnf_id)
        key = (node, vnf_id, self.level, j)
        slot = self.state.find_best_fit(key, lam, budget, theta)
        if slot >= 0:
            self.state.add_job(slot, ridx, lam, budget)
        else:
            slot = self.state.open_vm(
                node, layer, vnf_id, theta, key, self.level, j, ridx, lam, budget,
                rate_floor=self._rate_floor(j),
            )
        return slot

    def remove_request(self, request_id: int) -> float:
        """Drop every job of the request; returns the freed cost rate."""
        phi_before = self.state.phi
        rec = self.state.release_request(request_id)
        ridx = rec["ridx"]
        for _vnf, slot in rec["jobs"]:
            self.state.remove_job(slot, ridx)
        self.state.free_request_slot(ridx)
        return phi_before - self.state.phi
