"""Static system model: layered topology, service catalog, request vocabulary.

Everything here is immutable after scenario load and safe to share across
runs.  Units are fixed globally: simulation clock in seconds, latencies in
milliseconds, loads in packets/ms, costs are rates per second (integrated
over simulated seconds by the event loop).
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ScenarioError


@dataclass(frozen=True)
class LayerSpec:
    """One layer of the hierarchy: its nodes, forwarding latency, VM costs."""

    index: int
    node_ids: tuple[int, ...]
    d: float          # forwarding latency from a leaf, ms
    kappa_f: float    # fixed VM cost rate
    kappa_p: float    # cost rate per unit of allocated speed


@dataclass(frozen=True)
class Topology:
    """Layered node graph with leaf-to-layer reachability.

    ``reachability`` is either "full" (every leaf reaches every node of every
    layer) or "tree" (one ancestor per layer, leaves grouped contiguously).
    """

    layers: tuple[LayerSpec, ...]
    reachability: str = "full"

    @property
    def leaves(self) -> tuple[int, ...]:
        return self.layers[0].node_ids

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    @property
    def num_nodes(self) -> int:
        return sum(len(l.node_ids) for l in self.layers)

    @property
    def max_nodes_per_layer(self) -> int:
        return max(len(l.node_ids) for l in self.layers)

    def layer_of_node(self, node: int) -> int:
        for spec in self.layers:
            if node in spec.node_ids:
                return spec.index
        raise ScenarioError(f"unknown node id {node}")

    def reachable(self, leaf: int, layer: int) -> tuple[int, ...]:
        """Node ids at ``layer`` that traffic entering at ``leaf`` can reach."""
        spec = self.layers[layer]
        if self.reachability == "full":
            return spec.node_ids
        # tree mode: contiguous grouping of leaves under one ancestor per layer
        leaves = self.leaves
        pos = leaves.index(leaf)
        k = len(spec.node_ids)
        return (spec.node_ids[pos * k // len(leaves)],)


@dataclass(frozen=True)
class VnfSpec:
    vnf_id: str
    theta: float  # computing units needed per unit of traffic


@dataclass(frozen=True)
class ServiceSpec:
    service_id: str
    vnf_ids: tuple[str, ...]   # the chain, in order
    target_delay: float        # end-to-end delay target, ms


@dataclass(frozen=True)
class SystemParams:
    mu_bar: float       # maximum VM speed, packets/ms
    lambda_min: float   # smallest request load the scenario may produce


@dataclass(frozen=True)
class Catalog:
    """The service/VNF dictionary of a scenario."""

    vnfs: dict[str, VnfSpec]
    services: dict[str, ServiceSpec]

    def theta(self, vnf_id: str) -> float:
        return self.vnfs[vnf_id].theta

    def chain(self, service_id: str) -> tuple[str, ...]:
        return self.services[service_id].vnf_ids


@dataclass(frozen=True)
class Request:
    """A service-instance request as it enters the system."""

    request_id: int
    service_id: str
    arrival: float            # s
    duration: float | None    # s; None = unbounded
    load: float               # packets/ms
    leaf: int                 # leaf node id


@dataclass
class Job:
    """The unit of work 'run one VNF for one request'."""

    request_id: int
    vnf_id: str
    load: float
    delay_budget: float | None = None  # ms, filled by the allocation step


def node_cost_full(layer: LayerSpec, params: SystemParams) -> float:
    """Cost rate of one VM running at maximum speed at this layer."""
    return layer.kappa_f + layer.kappa_p * params.mu_bar


def validate_scenario(topology: Topology, catalog: Catalog, params: SystemParams) -> list[str]:
    """Report every model-invariant violation; an empty list means usable."""
    v: list[str] = []
    layers = topology.layers
    if not layers:
        return ["topology has no layers"]
    for i, spec in enumerate(layers):
        if spec.index != i:
            v.append(f"layer indices not contiguous from 0 (position {i} has index {spec.index})")
        if not spec.node_ids:
            v.append(f"layer {i} has no nodes")
        if spec.d < 0:
            v.append(f"layer {i}: forwarding latency must be >= 0, got {spec.d}")
        if spec.kappa_f <= 0:
            v.append(f"layer {i}: kappa_f must be positive, got {spec.kappa_f}")
        if spec.kappa_p < 0:
            v.append(f"layer {i}: kappa_p must be >= 0, got {spec.kappa_p}")
    for lo, hi in zip(layers, layers[1:]):
        if not hi.d > lo.d:
            v.append(f"latency not strictly increasing between layers {lo.index} and {hi.index}")
        if not hi.kappa_f < lo.kappa_f:
            v.append(f"kappa_f not strictly decreasing between layers {lo.index} and {hi.index}")
        if not hi.kappa_p < lo.kappa_p:
            v.append(f"kappa_p not strictly decreasing between layers {lo.index} and {hi.index}")
    seen: set[int] = set()
    for spec in layers:
        dup = seen.intersection(spec.node_ids)
        if dup:
            v.append(f"node ids reused across layers: {sorted(dup)}")
        seen.update(spec.node_ids)
    if topology.reachability not in ("full", "tree"):
        v.append(f"unknown reachability mode {topology.reachability!r}")
    else:
        for leaf in topology.leaves:
            for spec in layers:
                if len(topology.reachable(leaf, spec.index)) < 1:
                    v.append(f"leaf {leaf} reaches no node at layer {spec.index}")
    for vnf in catalog.vnfs.values():
        if vnf.theta <= 0:
            v.append(f"vnf {vnf.vnf_id}: theta must be positive, got {vnf.theta}")
    for svc in catalog.services.values():
        if not svc.vnf_ids:
            v.append(f"service {svc.service_id}: empty VNF chain")
        if len(set(svc.vnf_ids)) != len(svc.vnf_ids):
            v.append(f"service {svc.service_id}: duplicate vnf in chain")
        for vid in svc.vnf_ids:
            if vid not in catalog.vnfs:
                v.append(f"service {svc.service_id}: unknown vnf {vid!r}")
        if svc.target_delay <= 0:
            v.append(f"service {svc.service_id}: target delay must be positive")
    if not params.mu_bar > params.lambda_min > 0:
        v.append(f"need mu_bar > lambda_min > 0, got {params.mu_bar}, {params.lambda_min}")
    return v


@dataclass(frozen=True)
class Scenario:
    """A fully parsed scenario file."""

    topology: Topology
    params: SystemParams
    catalog: Catalog
    workload: dict = field(default_factory=dict)
    strategy: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    name: str = "scenario"

    def validate(self) -> list[str]:
        report = validate_scenario(self.topology, self.catalog, self.params)
        wl = self.workload
        lo = None
        if wl.get("kind", "phases") == "phases":
            for i, ph in enumerate(wl.get("phases", [])):
                load = ph.get("load", {})
                if "low" in load:
                    lo = load["low"] if lo is None else min(lo, load["low"])
                if ph.get("rate", 0) < 0:
                    report.append(f"phase {i}: negative arrival rate")
        if lo is not None and lo < self.params.lambda_min:
            report.append(
                f"workload may draw loads down to {lo} < lambda_min {self.params.lambda_min}"
            )
        return report


def _build_topology(raw: dict) -> Topology:
    layers = []
    next_id = 0
    for i, lr in enumerate(raw.get("layers", [])):
        nodes = lr.get("nodes", 1)
        if isinstance(nodes, int):
            ids = tuple(range(next_id, next_id + nodes))
            next_id += nodes
        else:
            ids = tuple(int(n) for n in nodes)
            next_id = max(next_id, max(ids, default=-1) + 1)
        layers.append(
            LayerSpec(
                index=i,
                node_ids=ids,
                d=float(lr["d"]),
                kappa_f=float(lr["kappa_f"]),
                kappa_p=float(lr["kappa_p"]),
            )
        )
    return Topology(layers=tuple(layers), reachability=raw.get("reachability", "full"))


def scenario_from_dict(raw: dict, name: str = "scenario") -> Scenario:
    try:
        topology = _build_topology(raw["topology"])
        params = SystemParams(
            mu_bar=float(raw["params"]["mu_bar"]),
            lambda_min=float(raw["params"]["lambda_min"]),
        )
        vnfs = {k: VnfSpec(k, float(t)) for k, t in raw.get("vnfs", {}).items()}
        services = {
            k: ServiceSpec(k, tuple(s["vnfs"]), float(s["target_delay"]))
            for k, s in raw.get("services", {}).items()
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"malformed scenario: {exc!r}") from exc
    return Scenario(
        topology=topology,
        params=params,
        catalog=Catalog(vnfs=vnfs, services=services),
        workload=raw.get("workload", {}),
        strategy=raw.get("strategy", {}),
        output=raw.get("output", {}),
        name=name,
    )


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return scenario_from_dict(raw, name=path.stem)
