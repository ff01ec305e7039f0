import math

import numpy as np
import pytest

from slicesim.baselines import (
    GreedyMarginalEngine,
    OracleInstance,
    OracleJob,
    count_partitions,
    instance_from_requests,
    oracle_optimal_cost,
)
from slicesim.engine import RangePackingEngine
from slicesim.errors import InstanceTooLarge
from slicesim.model import Request
from slicesim.shadow import ledger_for
from slicesim.allocation import plan_request
from slicesim.workload import quantize_load
from tests.conftest import small_scenario

BELL = [1, 1, 2, 5, 15, 52, 203, 877]


def test_partition_count_matches_bell_numbers():
    for n in range(7):
        assert count_partitions(n) == BELL[n]


def oracle_scenario():
    return small_scenario(
        layers=[
            {"d": 0.0, "kappa_f": 7.5, "kappa_p": 0.075, "nodes": 1},
            {"d": 15.0, "kappa_f": 1.0, "kappa_p": 0.01, "nodes": 1},
        ],
    )


def test_single_job_closed_form():
    sc = oracle_scenario()
    instance = OracleInstance(
        jobs=[OracleJob(0, "f1", theta=1.0, load=10.0, budget=0.1, max_layer=0)],
        topology=sc.topology, params=sc.params,
    )
    cost, assignment = oracle_optimal_cost(instance)
    # kappa_f + kappa_p * (theta*load + 1/D) at the only allowed layer
    assert cost == pytest.approx(7.5 + 0.075 * 20.0)
    assert len(assignment) == 1
    assert assignment[0]["speed"] == pytest.approx(20.0)


def test_single_job_prefers_cheap_layer():
    sc = oracle_scenario()
    instance = OracleInstance(
        jobs=[OracleJob(0, "f1", 1.0, 10.0, 0.1, max_layer=1)],
        topology=sc.topology, params=sc.params,
    )
    cost, _ = oracle_optimal_cost(instance)
    assert cost == pytest.approx(1.0 + 0.01 * 20.0)  # 1.2 at the top layer


def test_merging_identical_jobs_is_cheaper():
    sc = oracle_scenario()
    jobs = [
        OracleJob(0, "f1", 1.0, 10.0, 0.1, 0),
        OracleJob(1, "f1", 1.0, 10.0, 0.1, 0),
    ]
    instance = OracleInstance(jobs, sc.topology, sc.params)
    cost, assignment = oracle_optimal_cost(instance)
    merged = 7.5 + 0.075 * (20.0 + 10.0)
    split = 2 * (7.5 + 0.075 * 20.0)
    assert merged < split
    assert cost == pytest.approx(merged)
    assert len(assignment) == 1


def test_zero_jobs():
    sc = oracle_scenario()
    assert oracle_optimal_cost(OracleInstance([], sc.topology, sc.params)) == (0.0, [])


def test_instance_too_large():
    sc = oracle_scenario()
    jobs = [OracleJob(i, "f1", 1.0, 1.0, 0.5, 0) for i in range(7)]
    with pytest.raises(InstanceTooLarge):
        oracle_optimal_cost(OracleInstance(jobs, sc.topology, sc.params))


def test_capacity_forces_split():
    sc = oracle_scenario()
    jobs = [
        OracleJob(0, "f1", 1.0, 60.0, 1.0, 0),
        OracleJob(1, "f1", 1.0, 50.0, 1.0, 0),
    ]
    cost, assignment = oracle_optimal_cost(OracleInstance(jobs, sc.topology, sc.params))
    assert len(assignment) == 2  # 110 + 1/D > mu_bar on one VM


def test_single_layer_flag_couples_request_jobs():
    sc = small_scenario(
        layers=[
            {"d": 0.0, "kappa_f": 7.5, "kappa_p": 0.075, "nodes": 1},
            {"d": 15.0, "kappa_f": 1.0, "kappa_p": 0.01, "nodes": 1},
        ],
        vnfs={"f1": 1, "f2": 1},
    )
    # two jobs of one request; one is top-layer-capable, the other is not
    jobs = [
        OracleJob(0, "f1", 1.0, 10.0, 0.5, max_layer=1),
        OracleJob(0, "f2", 1.0, 10.0, 0.5, max_layer=0),
    ]
    coupled = OracleInstance(jobs, sc.topology, sc.params, single_layer_per_request=True)
    free = OracleInstance(jobs, sc.topology, sc.params, single_layer_per_request=False)
    cost_coupled, _ = oracle_optimal_cost(coupled)
    cost_free, _ = oracle_optimal_cost(free)
    assert cost_coupled == pytest.approx(2 * (7.5 + 0.075 * 12.0))
    assert cost_free == pytest.approx((7.5 + 0.075 * 12.0) + (1.0 + 0.01 * 12.0))
    assert cost_free < cost_coupled


def test_oracle_never_below_shadow_bound():
    rng = np.random.default_rng(11)
    sc = small_scenario(
        layers=[
            {"d": 0.0, "kappa_f": 7.5, "kappa_p": 0.075, "nodes": 1},
            {"d": 15.0, "kappa_f": 1.0, "kappa_p": 0.01, "nodes": 1},
        ],
        vnfs={"f1": 1, "f2": 2},
        services={
            "solo": {"vnfs": ["f1"], "target_delay": 16.0},
            "duo": {"vnfs": ["f1", "f2"], "target_delay": 40.0},
        },
    )
    for trial in range(40):
        reqs = []
        nreq = int(rng.integers(1, 4))
        for rid in range(nreq):
            service = ["solo", "duo"][int(rng.integers(2))]
            lam = quantize_load(float(rng.uniform(1.0, 45.0)))
            reqs.append(Request(rid, service, 0.0, None, lam, 0))
        instance = instance_from_requests(sc, reqs)
        if len(instance.jobs) > 6:
            continue
        cost, _ = oracle_optimal_cost(instance)
        ledger = ledger_for(sc, epsilon=1.0)
        for req in reqs:
            service = sc.catalog.services[req.service_id]
            plan = plan_request(req, service, sc.topology, sc.params, sc.catalog.vnfs)
            ledger.add(req, plan)
        assert ledger.phi_full <= cost * (1 + 1e-9)


def test_greedy_engine_respects_budgets_and_star():
    sc = small_scenario()
    eng = GreedyMarginalEngine(sc, verify=True)
    rng = np.random.default_rng(5)
    for rid in range(120):
        service = ["solo", "duo"][int(rng.integers(2))]
        lam = quantize_load(float(rng.uniform(1.0, 25.0)))
        eng.place_request(Request(rid, service, 0.0, None, lam, 0))
    eng.state.audit()
    for rid in range(0, 120, 2):
        eng.remove_request(rid)
    eng.state.audit()


def test_greedy_engine_mixes_ranges():
    # tight and loose jobs of the same vnf share a VM under the greedy
    # benchmark while the range engine separates them
    sc = small_scenario(
        layers=[{"d": 0.0, "kappa_f": 7.5, "kappa_p": 0.075, "nodes": 1}],
        vnfs={"f1": 1},
        services={
            "tight": {"vnfs": ["f1"], "target_delay": 1.0 / 60.0},
            "loose": {"vnfs": ["f1"], "target_delay": 100.0},
        },
    )
    greedy = GreedyMarginalEngine(sc, verify=True)
    ranged = RangePackingEngine(sc, epsilon=0.25, verify=True)
    for eng in (greedy, ranged):
        eng.place_request(Request(0, "loose", 0.0, None, 10.0, 0))
        eng.place_request(Request(1, "tight", 0.0, None, 10.0, 0))
    assert greedy.state.vm_count == 1
    assert ranged.state.vm_count == 2
