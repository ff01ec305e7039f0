"""Event loop: drives one strategy over a request stream and records metrics.

Cost is integrated as a piecewise-constant function of time (the cost rate
only changes at events).  In verified runs the engine cross-checks every
mutation and the whole state is re-derived from scratch at a fixed cadence
and at the end of the run; any breach aborts with a diagnostic.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .adaptive import EpsilonController, compute_Z
from .baselines import GreedyMarginalEngine
from .engine import RangePackingEngine, VmView
from .errors import EmptyVm, ScenarioError, SimInvariantError, UnknownRequest
from .model import Scenario
from .ranges import RangeScheme
from .shadow import ledger_for, ledger_reset
from .workload import ARRIVAL, Event

CSV_COLUMNS = (
    "time", "active_requests", "system_load", "phi", "cumulative_cost",
    "shadow_phi", "vm_count", "pod_fraction", "epsilon", "transition",
)

AUDIT_EVERY = 512


def pod_of_vm(vm: VmView) -> float:
    """Capacity margin beyond what the loosest resident deadline requires."""
    if vm.njobs < 1:
        raise EmptyVm("PoD is undefined for an empty VM")
    return (vm.speed - vm.theta * vm.load) - 1.0 / vm.max_budget


def pod_fraction(state) -> float:
    """Share of allocated speed wasted on deadline dissimilarity."""
    total_mu = 0.0
    total_pod = 0.0
    for vm in state.iter_vms():
        total_mu += vm.speed
        total_pod += pod_of_vm(vm)
    return total_pod / total_mu if total_mu > 0.0 else 0.0


# -- strategies --------------------------------------------------------------


class FixedEpsilonStrategy:
    """Best-fit range packing with a constant range width."""

    def __init__(self, scenario: Scenario, epsilon: float, verify: bool = True):
        self.name = f"c-reshare:{epsilon:g}"
        self.engine = RangePackingEngine(scenario, epsilon, verify=verify)
        self.ledger = ledger_for(scenario, epsilon)
        self.transitions: list[dict] = []
        self.last_transition = ""

    @property
    def state(self):
        return self.engine.state

    @property
    def epsilon(self) -> float:
        return self.engine.epsilon

    def on_arrival(self, t: float, request):
        plan = self.engine.place_request(request)
        self.ledger.add(request, plan)

    def on_departure(self, t: float, request_id: int):
        self.engine.remove_request(request_id)
        self.ledger.remove(request_id)

    def shadow_phi(self) -> float:
        return self.ledger.phi_full

    def audit(self):
        self.state.audit()


class AdaptiveStrategy:
    """Range packing with the load-adaptive epsilon controller on top."""

    def __init__(self, scenario: Scenario, epsilon_star: float = 1.0, verify: bool = True):
        self.name = "reshare"
        self.scenario = scenario
        self.engine = RangePackingEngine(scenario, epsilon_star, verify=verify)
        self.ledger = ledger_for(scenario, epsilon_star)
        self.controller = EpsilonController(epsilon_star, compute_Z(scenario, epsilon_star))
        self._schemes: dict[int, RangeScheme] = {1: self.engine.scheme}
        self.transitions: list[dict] = []
        self.last_transition = ""

    @property
    def state(self):
        return self.engine.state

    @property
    def epsilon(self) -> float:
        return self.controller.epsilon

    def _scheme_for(self, level: int) -> RangeScheme:
        scheme = self._schemes.get(level)
        if scheme is None:
            params = self.scenario.params
            scheme = RangeScheme.build(
                params.mu_bar, params.lambda_min, self.controller.epsilon_at(level)
            )
            self._schemes[level] = scheme
        return scheme

    def _controller_step(self, t: float):
        ctl = self.controller
        eps_before = ctl.epsilon
        decision = ctl.on_event(self.ledger.phi_full, self.state.system_load)
        self.last_transition = ""
        if decision == "keep":
            return
        level = ctl.level
        scheme = self._scheme_for(level)
        record = {
            "time": float(t),
            "direction": decision,
            "from": float(eps_before),
            "to": float(ctl.epsilon),
            "engine_phi": float(self.state.phi),
            "archived_shadow_sum": float(ctl.archived_sum()),
        }
        self.transitions.append(record)
        self.last_transition = decision
        _, self.ledger = ledger_reset(self.ledger, level, scheme)
        self.engine.set_scheme(level, scheme)

    def on_arrival(self, t: float, request):
        plan = self.engine.place_request(request)
        self.ledger.add(request, plan)
        self._controller_step(t)

    def on_departure(self, t: float, request_id: int):
        self.engine.remove_request(request_id)
        try:
            self.ledger.remove(request_id)
        except UnknownRequest:
            # The request arrived under an earlier interval; that interval's
            # ledger cost was archived as a frozen snapshot, so the current
            # interval's books are untouched by this departure.
            pass
        self._controller_step(t)

    def shadow_phi(self) -> float:
        return self.ledger.phi_full

    def audit(self):
        self.state.audit()


class GreedyMarginalStrategy:
    """The relaxation-style benchmark: per-job cheapest marginal cost."""

    def __init__(self, scenario: Scenario, epsilon: float = 1.0, verify: bool = True):
        self.name = "relax-sota"
        self.engine = GreedyMarginalEngine(scenario, verify=verify)
        self.ledger = ledger_for(scenario, epsilon)
        self.transitions: list[dict] = []
        self.last_transition = ""
        self.epsilon = epsilon

    @property
    def state(self):
        return self.engine.state

    def on_arrival(self, t: float, request):
        plan = self.engine.place_request(request)
        self.ledger.add(request, plan)

    def on_departure(self, t: float, request_id: int):
        self.engine.remove_request(request_id)
        self.ledger.remove(request_id)

    def shadow_phi(self) -> float:
        return self.ledger.phi_full

    def audit(self):
        self.state.audit()


class ShadowOnlyStrategy:
    """No real placement: the fractional lower bound is the reported cost."""

    def __init__(self, scenario: Scenario, epsilon: float = 1.0, verify: bool = True):
        self.name = "shadow-only"
        self.scenario = scenario
        self.ledger = ledger_for(scenario, epsilon)
        self.state = None
        self.transitions: list[dict] = []
        self.last_transition = ""
        self.epsilon = epsilon
        self.system_load = 0.0
        self._loads: dict[int, float] = {}

    def on_arrival(self, t: float, request):
        from .allocation import plan_request

        service = self.scenario.catalog.services[request.service_id]
        plan = plan_request(request, service, self.scenario.topology,
                            self.scenario.params, self.scenario.catalog.vnfs)
        self.ledger.add(request, plan)
        self.system_load += request.load
        self._loads[request.request_id] = request.load

    def on_departure(self, t: float, request_id: int):
        self.ledger.remove(request_id)
        self.system_load -= self._loads.pop(request_id)

    def shadow_phi(self) -> float:
        return self.ledger.phi_full

    def audit(self):
        pass


def parse_strategy(spec: str, default_epsilon: float = 1.0) -> tuple[str, float]:
    """Split a selector like "c-reshare:0.5" into (name, epsilon)."""
    name, _, arg = spec.partition(":")
    name = name.strip()
    eps = default_epsilon
    if arg:
        try:
            eps = float(arg)
        except ValueError:
            raise ScenarioError(f"bad epsilon in strategy selector {spec!r}")
    if eps <= 0:
        raise ScenarioError(f"epsilon must be positive, got {eps}")
    if name not in ("reshare", "c-reshare", "relax-sota", "shadow-only"):
        raise ScenarioError(f"unknown strategy {name!r}")
    return name, eps


def make_strategy(scenario: Scenario, spec: str, verify: bool = True,
                  epsilon: float | None = None):
    default_eps = float(scenario.strategy.get("epsilon", 1.0))
    name, eps = parse_strategy(spec, default_epsilon=default_eps)
    if epsilon is not None:
        eps = epsilon
    if name == "reshare":
        return AdaptiveStrategy(scenario, eps, verify=verify)
    if name == "c-reshare":
        return FixedEpsilonStrategy(scenario, eps, verify=verify)
    if name == "relax-sota":
        return GreedyMarginalStrategy(scenario, eps, verify=verify)
    return ShadowOnlyStrategy(scenario, eps, verify=verify)


# -- the loop -----------------------------------------------------------------


@dataclass
class RunResult:
    strategy: str
    records: list[tuple]
    summary: dict
    transitions: list[dict] = field(default_factory=list)


def run(scenario: Scenario, strategy_spec: str, events: list[Event],
        verify: bool = True, seed: int | None = None,
        epsilon: float | None = None, audit_every: int = AUDIT_EVERY,
        final_audit: bool = True) -> RunResult:
    strategy = make_strategy(scenario, strategy_spec, verify=verify, epsilon=epsilon)
    state = strategy.state

    horizon = float(scenario.output.get("horizon", 0.0))
    records: list[tuple] = []
    t_prev = 0.0
    cum = 0.0
    active = 0
    arrivals = departures = 0
    peak_pod = 0.0
    peak_load = 0.0
    peak_vms = 0
    phi = 0.0

    def current_phi() -> float:
        if state is not None:
            return state.phi
        return strategy.shadow_phi()

    for i, ev in enumerate(events):
        if ev.time < t_prev:
            raise SimInvariantError("events out of order")
        cum += phi * (ev.time - t_prev)
        t_prev = ev.time
        if ev.kind == ARRIVAL:
            strategy.on_arrival(ev.time, ev.request)
            active += 1
            arrivals += 1
        else:
            if state is not None:
                state.bound_assert = False  # packing bound only binds arrival-only prefixes
            strategy.on_departure(ev.time, ev.request.request_id)
            active -= 1
            departures += 1
        phi = current_phi()
        if state is not None:
            load = state.system_load
            vms = state.vm_count
            pod = state.total_pod / state.total_mu if state.total_mu > 0.0 else 0.0
            if pod < 0.0:
                pod = 0.0
        else:
            load = strategy.system_load
            vms = 0
            pod = 0.0
        peak_pod = max(peak_pod, pod)
        peak_load = max(peak_load, load)
        peak_vms = max(peak_vms, vms)
        records.append((
            ev.time, active, load, phi, cum, strategy.shadow_phi(), vms, pod,
            strategy.epsilon, strategy.last_transition,
        ))
        if verify and state is not None and (i + 1) % audit_every == 0:
            strategy.audit()

    if verify and final_audit:
        strategy.audit()
    end = max(horizon, t_prev)
    cum += phi * (end - t_prev)

    pod_at_peak = 0.0
    if records and peak_load > 0.0:
        pod_at_peak = max(
            row[7] for row in records if row[2] >= 0.999 * peak_load
        )

    summary = {
        "scenario": scenario.name,
        "strategy": strategy.name,
        "seed": seed,
        "events": len(events),
        "arrivals": arrivals,
        "departures": departures,
        "horizon": float(end),
        "cumulative_cost": float(cum),
        "final_phi": float(phi),
        "final_shadow_phi": float(strategy.shadow_phi()),
        "final_active_requests": active,
        "peak_pod_fraction": float(peak_pod),
        "pod_at_peak_load": float(pod_at_peak),
        "peak_system_load": float(peak_load),
        "peak_vm_count": int(peak_vms),
        "epsilon_transitions": strategy.transitions,
        "max_bucket_bound_ratio": (
            float(state.max_bound_ratio) if state is not None else None
        ),
        "verified": verify,
    }
    return RunResult(strategy.name, records, summary, strategy.transitions)


# -- deterministic output ------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(float(x))  # shortest round-trip form, numpy scalars included
    return str(x)


def write_metrics_csv(records: list[tuple], path: str | Path):
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for row in records:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def write_summary_json(summary: dict, path: str | Path):
    Path(path).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
