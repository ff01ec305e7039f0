"""Request stream generation: synthetic phase plans and CSV trace ingestion.

Loads are snapped to a fixed binary grid (multiples of 1/1024 packets/ms) so
that load sums add and subtract exactly; removing a request then restores
every accumulator to its prior value bit for bit.
"""

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidPlan, LoadBelowMinimum, ParseError
from .model import Request, SystemParams, Topology

LOAD_GRID = 4096.0

ARRIVAL = "arrival"
DEPARTURE = "departure"


@dataclass(frozen=True)
class Event:
    time: float       # s
    kind: str         # ARRIVAL | DEPARTURE
    request: Request

    @property
    def sort_key(self):
        return (self.time, 0 if self.kind == ARRIVAL else 1, self.request.request_id)


@dataclass(frozen=True)
class TraceSpec:
    """How to read a request stream out of a CSV file."""

    path: str
    columns: dict[str, str]   # arrival/duration/load/service[/leaf] -> column name
    time_scale: float = 1.0
    load_scale: float = 1.0


def quantize_load(x: float) -> float:
    return round(x * LOAD_GRID) / LOAD_GRID


def _grid_floor_load(lambda_min: float) -> float:
    return math.ceil(lambda_min * LOAD_GRID) / LOAD_GRID


def _validate_phases(phases: list[dict], lambda_min: float):
    if not phases:
        return
    prev_end = -math.inf
    for i, ph in enumerate(phases):
        start, end = float(ph["start"]), float(ph["end"])
        if end < start:
            raise InvalidPlan(f"phase {i}: end {end} before start {start}")
        if start < prev_end:
            raise InvalidPlan(f"phase {i}: overlaps previous phase")
        prev_end = end
        if float(ph.get("rate", 0.0)) < 0:
            raise InvalidPlan(f"phase {i}: negative arrival rate")
        dur = ph.get("duration")
        if dur is not None and float(dur) <= 0:
            raise InvalidPlan(f"phase {i}: non-positive duration")
        specs = [ph.get("load", {})]
        for entry in (ph.get("mix") or {}).values():
            if isinstance(entry, dict) and "load" in entry:
                specs.append(entry["load"])
        for load in specs:
            for low, high, _w in _load_components(load, lambda_min):
                if low > high:
                    raise InvalidPlan(f"phase {i}: load low {low} > high {high}")
                if low < lambda_min:
                    raise InvalidPlan(f"phase {i}: load low {low} below lambda_min {lambda_min}")


def _load_components(load_spec: dict, lambda_min: float) -> list[tuple[float, float, float]]:
    """Normalize a load distribution to weighted uniform components."""
    dist = load_spec.get("dist", "uniform")
    if dist == "uniform":
        low = float(load_spec.get("low", lambda_min))
        high = float(load_spec.get("high", 2.0 * lambda_min))
        return [(low, high, 1.0)]
    if dist == "mixture":
        comps = [
            (float(c["low"]), float(c["high"]), float(c.get("weight", 1.0)))
            for c in load_spec["components"]
        ]
        if not comps:
            raise InvalidPlan("mixture load distribution has no components")
        return comps
    raise InvalidPlan(f"unknown load distribution {dist!r}")


def generate_events(workload: dict, topology: Topology, params: SystemParams,
                    seed: int, default_mix: dict | None = None) -> list[Event]:
    """Expand a phase plan into a chronologically sorted event list."""
    phases = workload.get("phases", [])
    _validate_phases(phases, params.lambda_min)
    rng = np.random.default_rng(seed)
    leaves = topology.leaves
    floor_load = _grid_floor_load(params.lambda_min)

    events: list[Event] = []
    rid = 0
    leaf_cursor = 0
    for ph in phases:
        start, end = float(ph["start"]), float(ph["end"])
        rate = float(ph.get("rate", 0.0))
        if rate <= 0:
            continue
        n = int(round((end - start) * rate))
        duration = ph.get("duration")
        duration = None if duration is None else float(duration)
        mix = ph.get("mix") or default_mix
        if not mix:
            raise InvalidPlan("phase has no service mix and no default")
        names = sorted(mix)
        phase_load = ph.get("load", {})
        weights = []
        entry_load: list[dict] = []
        services = []
        for name in names:
            entry = mix[name]
            if isinstance(entry, dict):
                weights.append(float(entry.get("weight", 1.0)))
                entry_load.append(entry.get("load", phase_load))
            else:
                weights.append(float(entry))
                entry_load.append(phase_load)
            # "name" or "name@variant": several mix entries may share a service
            services.append(name.split("@")[0])
        weights = np.array(weights)
        if weights.sum() <= 0:
            raise InvalidPlan("service mix weights sum to zero")
        weights = weights / weights.sum()
        comps_per_entry = [
            _load_components(spec, params.lambda_min) for spec in entry_load
        ]
        cw_per_entry = []
        for comps in comps_per_entry:
            cw = np.array([c[2] for c in comps])
            cw_per_entry.append(cw / cw.sum())
        for k in range(n):
            t = start + k / rate
            pick = int(rng.choice(len(names), p=weights))
            service = services[pick]
            comps = comps_per_entry[pick]
            low, high, _ = comps[int(rng.choice(len(comps), p=cw_per_entry[pick]))]
            lam = quantize_load(float(rng.uniform(low, high)))
            if lam < params.lambda_min:
                lam = floor_load
            req = Request(
                request_id=rid,
                service_id=service,
                arrival=t,
                duration=duration,
                load=lam,
                leaf=leaves[leaf_cursor % len(leaves)],
            )
            rid += 1
            leaf_cursor += 1
            events.append(Event(t, ARRIVAL, req))
            if duration is not None:
                events.append(Event(t + duration, DEPARTURE, req))
    events.sort(key=lambda e: e.sort_key)
    return events


def ingest_trace(spec: TraceSpec, topology: Topology, params: SystemParams) -> list[Event]:
    """One request per CSV row, scaled, validated, and sorted."""
    cols = spec.columns
    for required in ("arrival", "duration", "load", "service"):
        if required not in cols:
            raise ParseError(f"column mapping lacks {required!r}")
    path = Path(spec.path)
    leaves = topology.leaves
    events: list[Event] = []
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ParseError("trace file has no header row")
        for name in cols.values():
            if name not in reader.fieldnames:
                raise ParseError(f"mapped column {name!r} not in header")
        rid = 0
        for rownum, row in enumerate(reader, start=2):
            try:
                arrival = float(row[cols["arrival"]]) * spec.time_scale
                raw_dur = row[cols["duration"]].strip()
                if raw_dur in ("", "inf"):
                    duration = None
                else:
                    duration = float(raw_dur) * spec.time_scale
                load = float(row[cols["load"]]) * spec.load_scale
                service = row[cols["service"]].strip()
            except (ValueError, KeyError) as exc:
                raise ParseError(f"unparseable field ({exc})", row=rownum) from exc
            if arrival < 0:
                raise ParseError(f"negative arrival {arrival}", row=rownum)
            if duration is not None and duration <= 0:
                raise ParseError(f"non-positive duration {duration}", row=rownum)
            lam = quantize_load(load)
            if lam < params.lambda_min:
                raise LoadBelowMinimum(
                    f"row {rownum}: load {load} below lambda_min {params.lambda_min}"
                )
            if "leaf" in cols and row[cols["leaf"]].strip():
                leaf = int(row[cols["leaf"]])
            else:
                leaf = leaves[rid % len(leaves)]
            req = Request(rid, service, arrival, duration, lam, leaf)
            rid += 1
            events.append(Event(arrival, ARRIVAL, req))
            if duration is not None:
                events.append(Event(arrival + duration, DEPARTURE, req))
    events.sort(key=lambda e: e.sort_key)
    return events


def events_for_scenario(scenario, seed: int) -> list[Event]:
    """Build the event list a scenario's workload section describes."""
    wl = scenario.workload
    kind = wl.get("kind", "phases")
    if kind == "phases":
        return generate_events(wl, scenario.topology, scenario.params, seed)
    if kind == "trace":
        spec = TraceSpec(
            path=wl["path"],
            columns=wl["columns"],
            time_scale=float(wl.get("time_scale", 1.0)),
            load_scale=float(wl.get("load_scale", 1.0)),
        )
        return ingest_trace(spec, scenario.topology, scenario.params)
    raise InvalidPlan(f"unknown workload kind {kind!r}")
