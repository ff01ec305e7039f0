"""Command-line front end.

Subcommands: ``validate`` a scenario file, ``run`` one simulation (or a
sweep over strategies), ``compare`` strategies on one scenario, and
``oracle`` for exhaustive verification of tiny instances.

Exit codes: 0 success, 1 scenario error, 2 runtime invariant breach, 3 I/O.
"""

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from . import sim
from .baselines import instance_from_requests, oracle_optimal_cost
from .errors import (
    InstanceTooLarge,
    InvalidPlan,
    LoadBelowMinimum,
    ParseError,
    ScenarioError,
    SimInvariantError,
    SlicesimError,
)
from .model import Scenario, load_scenario
from .workload import ARRIVAL, events_for_scenario

EXIT_OK = 0
EXIT_SCENARIO = 1
EXIT_INVARIANT = 2
EXIT_IO = 3

DEFAULT_SWEEP = ["reshare", "c-reshare:1", "c-reshare:0.5", "c-reshare:0.25",
                 "c-reshare:0.125", "relax-sota", "shadow-only"]


def resolve_scenario(spec: str) -> Path:
    """A filesystem path, or the bare name of a bundled scenario file."""
    p = Path(spec)
    if p.exists():
        return p
    if "/" not in spec and "\\" not in spec:
        name = spec if spec.endswith(".json") else spec + ".json"
        ref = resources.files("slicesim").joinpath("scenarios", name)
        if ref.is_file():
            return Path(str(ref))
    raise FileNotFoundError(spec)


def _load(spec: str) -> Scenario:
    return load_scenario(resolve_scenario(spec))


def cmd_validate(args) -> int:
    scenario = _load(args.scenario)
    report = scenario.validate()
    for line in report:
        print(f"violation: {line}")
    if report:
        print(f"{len(report)} violation(s)")
        return EXIT_SCENARIO
    print("ok")
    return EXIT_OK


def _run_one(scenario: Scenario, strategy: str, seed: int, outdir: Path,
             verify: bool, epsilon: float | None) -> dict:
    events = events_for_scenario(scenario, seed)
    result = sim.run(scenario, strategy, events, verify=verify, seed=seed,
                     epsilon=epsilon)
    outdir.mkdir(parents=True, exist_ok=True)
    sim.write_metrics_csv(result.records, outdir / "metrics.csv")
    sim.write_summary_json(result.summary, outdir / "summary.json")
    return result.summary


def cmd_run(args) -> int:
    scenario = _load(args.scenario)
    report = scenario.validate()
    if report:
        for line in report:
            print(f"violation: {line}", file=sys.stderr)
        return EXIT_SCENARIO
    out = Path(args.out)
    if args.sweep:
        strategies = args.strategy.split(",") if args.strategy else DEFAULT_SWEEP
        for spec in strategies:
            sub = out / spec.replace(":", "-")
            summary = _run_one(scenario, spec, args.seed, sub, args.verify, args.epsilon)
            print(f"{spec}: cumulative_cost={summary['cumulative_cost']:.6g} -> {sub}")
        return EXIT_OK
    strategy = args.strategy or scenario.strategy.get("name", "reshare")
    if strategy == "oracle":
        return cmd_oracle(args)
    summary = _run_one(scenario, strategy, args.seed, out, args.verify, args.epsilon)
    print(f"{strategy}: cumulative_cost={summary['cumulative_cost']:.6g} -> {out}")
    return EXIT_OK


def cmd_compare(args) -> int:
    scenario = _load(args.scenario)
    strategies = [s for s in args.strategy.split(",") if s] if args.strategy else []
    if len(strategies) < 2:
        print("compare needs at least two strategies (--strategy a,b,...)", file=sys.stderr)
        return EXIT_SCENARIO
    events = events_for_scenario(scenario, args.seed)
    costs = {}
    for spec in strategies:
        result = sim.run(scenario, spec, events, verify=args.verify, seed=args.seed,
                         epsilon=args.epsilon)
        costs[result.strategy] = result.summary["cumulative_cost"]
    names = list(costs)
    subject = names[0]
    comparison = {
        "scenario": scenario.name,
        "seed": args.seed,
        "cumulative_cost": costs,
        "subject": subject,
        "savings_pct_vs": {
            other: 100.0 * (costs[other] - costs[subject]) / costs[other]
            for other in names[1:]
            if costs[other] > 0
        },
    }
    if "shadow-only" in costs and costs["shadow-only"] > 0:
        comparison["normalized_to_shadow"] = {
            name: costs[name] / costs["shadow-only"] for name in names
        }
    text = json.dumps(comparison, indent=2, sort_keys=True)
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "comparison.json").write_text(text + "\n")
    print(text)
    return EXIT_OK


def cmd_oracle(args) -> int:
    scenario = _load(args.scenario)
    events = events_for_scenario(scenario, args.seed)
    live = {}
    for ev in events:
        if ev.kind == ARRIVAL:
            live[ev.request.request_id] = ev.request
        else:
            live.pop(ev.request.request_id, None)
    requests = [live[k] for k in sorted(live)]
    instance = instance_from_requests(scenario, requests, max_jobs=args.max_jobs)
    cost, assignment = oracle_optimal_cost(instance)
    out = {
        "scenario": scenario.name,
        "jobs": len(instance.jobs),
        "optimal_cost": cost,
        "assignment": assignment,
    }
    text = json.dumps(out, indent=2, sort_keys=True)
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "oracle.json").write_text(text + "\n")
    print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slicesim",
        description="Online multi-VNF service embedding simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_strategy=True):
        p.add_argument("--scenario", required=True,
                       help="scenario file path or bundled scenario name")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default="out")
        if with_strategy:
            p.add_argument("--strategy", default=None,
                           help="reshare | c-reshare[:eps] | relax-sota | shadow-only"
                                " (comma-separated for sweep/compare)")
            p.add_argument("--epsilon", type=float, default=None,
                           help="override the strategy's epsilon")
        p.add_argument("--verify", dest="verify", action="store_true", default=True)
        p.add_argument("--no-verify", dest="verify", action="store_false")

    p = sub.add_parser("validate", help="check a scenario file")
    p.add_argument("--scenario", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="run one simulation")
    common(p)
    p.add_argument("--sweep", action="store_true",
                   help="run several strategies, one subdirectory each")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="run strategies and report cost ratios")
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("oracle", help="exhaustive optimum of a tiny scenario")
    common(p, with_strategy=False)
    p.add_argument("--max-jobs", type=int, default=6)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: cannot open {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SimInvariantError as exc:
        print(f"invariant breach: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ScenarioError, InvalidPlan, ParseError, LoadBelowMinimum,
            InstanceTooLarge, SlicesimError) as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO


if __name__ == "__main__":
    sys.exit(main())
