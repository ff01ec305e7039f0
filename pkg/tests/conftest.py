import json
from pathlib import Path

import pytest

from slicesim.model import Scenario, load_scenario, scenario_from_dict

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "src" / "slicesim" / "scenarios"


def bundled(name: str) -> Scenario:
    return load_scenario(SCENARIO_DIR / f"{name}.json")


@pytest.fixture
def tiny_scenario() -> Scenario:
    return bundled("tiny-oracle")


@pytest.fixture
def vehicular() -> Scenario:
    return bundled("vehicular")


def small_scenario(mu_bar=100.0, lambda_min=1.0, layers=None, vnfs=None,
                   services=None) -> Scenario:
    """A compact hand-built scenario for unit tests."""
    raw = {
        "topology": {
            "reachability": "full",
            "layers": layers or [
                {"d": 0.0, "kappa_f": 7.5, "kappa_p": 0.075, "nodes": 2},
                {"d": 15.0, "kappa_f": 2.5, "kappa_p": 0.025, "nodes": 2},
                {"d": 30.0, "kappa_f": 1.0, "kappa_p": 0.01, "nodes": 1},
            ],
        },
        "params": {"mu_bar": mu_bar, "lambda_min": lambda_min},
        "vnfs": vnfs or {"f1": 1, "f2": 2},
        "services": services or {
            "solo": {"vnfs": ["f1"], "target_delay": 20.0},
            "duo": {"vnfs": ["f1", "f2"], "target_delay": 40.0},
        },
        "workload": {"kind": "phases", "phases": []},
        "strategy": {"name": "c-reshare", "epsilon": 1.0},
        "output": {"horizon": 100.0},
    }
    return scenario_from_dict(raw, name="unit")
