"""Online embedding of multi-VNF services onto layered infrastructure.

A discrete-event simulator plus the algorithm family around best-fit range
packing: a fixed-width packing engine, a fractional full-VM lower bound, a
load-adaptive range-width controller, a greedy relaxation-style benchmark,
and an exhaustive oracle for tiny instances.
"""

from .allocation import DelayPlan, fair_allocation, plan_request, solo_latency, star_layer
from .engine import PlacementState, RangePackingEngine, VmView
from .kernels import BACKEND as KERNEL_BACKEND
from .model import (
    Catalog,
    LayerSpec,
    Request,
    Scenario,
    ServiceSpec,
    SystemParams,
    Topology,
    VnfSpec,
    load_scenario,
    node_cost_full,
    validate_scenario,
)
from .ranges import RangeScheme, range_bounds, range_index, scheme_size, top_delay
from .shadow import ShadowLedger, ledger_for, shadow_full_cost

__version__ = "0.1.0"

__all__ = [
    "Catalog", "DelayPlan", "KERNEL_BACKEND", "LayerSpec", "PlacementState",
    "RangePackingEngine", "RangeScheme", "Request", "Scenario", "ServiceSpec",
    "ShadowLedger", "SystemParams", "Topology", "VmView", "VnfSpec",
    "fair_allocation", "ledger_for", "load_scenario", "node_cost_full",
    "plan_request", "range_bounds", "range_index", "scheme_size",
    "shadow_full_cost", "solo_latency", "star_layer", "validate_scenario",
]
