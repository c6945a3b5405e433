"""Replay planned tours on the time-dependent network.

Each leg between consecutive stops is rerouted with a time-dependent
shortest path at the instant the vehicle actually leaves. Link entries are
counted per hour and vehicle type; tours that start at a hub yield the
departure records the shuttle stage plans against.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .network import Network, shortest_path, travel_time
from .vrp import Activity, Tour

LinkLoads = Counter  # (link_id, hour, vehicle_type) -> vehicles entering


class ExecutionError(RuntimeError):
    pass


@dataclass(frozen=True)
class Traversal:
    link_id: str
    entry: float
    exit: float


@dataclass(frozen=True)
class TourExecution:
    tour_id: str
    vehicle_type: str
    mode: str
    start_node: str
    start_s: float
    end_s: float
    total_m: float
    traversals: tuple[Traversal, ...]
    activities: tuple[Activity, ...]
    initial_load: int
    capacity: int

    @property
    def total_s(self) -> float:
        return self.end_s - self.start_s

    @property
    def late_s(self) -> float:
        return sum(max(0.0, a.begin - a.window.latest) for a in self.activities
                   if a.window is not None)


@dataclass(frozen=True)
class DepartureRecord:
    hub_id: str
    tour_id: str
    departure_s: float
    parcels: int


def execute_tour(tour: Tour, network: Network) -> TourExecution:
    """Drive one tour from its planned start.

    The vehicle waits at a stop whose window has not opened yet; service
    durations are taken from the plan. Late arrivals are kept as they are.

    Raises:
        ExecutionError: a leg has no path in the vehicle's mode.
    """
    mode = tour.vehicle.type.mode
    acts = tour.activities
    t = acts[0].departure
    realized = [acts[0]]
    traversals: list[Traversal] = []
    meters = 0.0
    for k in range(1, len(acts)):
        prev, cur = acts[k - 1], acts[k]
        if prev.node != cur.node:
            path = shortest_path(network, prev.node, cur.node, t, mode, time_dependent=True)
            if not path.reachable:
                raise ExecutionError(
                    f"tour {tour.id}: leg {k} {prev.node} -> {cur.node} unreachable in {mode} mode")
            for lid in path.links:
                dt = travel_time(network, lid, t)
                traversals.append(Traversal(lid, t, t + dt))
                t += dt
                meters += network.links[lid].length
        arrival = t
        begin = arrival
        if cur.window is not None and begin < cur.window.earliest:
            begin = cur.window.earliest
        t = begin + (cur.departure - cur.begin)
        realized.append(Activity(cur.kind, cur.job_id, cur.node, arrival, begin, t, cur.load, cur.window))
    return TourExecution(tour.id, tour.vehicle.type.name, mode, tour.vehicle.start, acts[0].departure,
                         realized[-1].arrival, meters, tuple(traversals), tuple(realized),
                         tour.initial_load, tour.vehicle.type.capacity)


def link_loads(executions: Iterable[TourExecution]) -> LinkLoads:
    loads: LinkLoads = Counter()
    for ex in executions:
        for tr in ex.traversals:
            loads[(tr.link_id, int(tr.entry // 3600) % 24, ex.vehicle_type)] += 1
    return loads


def execute(tours: Sequence[Tour], network: Network,
            hubs: Mapping[str, str] | None = None):
    """Execute ``tours`` (sorted by id) and collect loads and hub departures.

    Args:
        hubs: hub id -> node; tours starting at one of these nodes produce a
            departure record.

    Returns:
        (executions, link loads, departure records)
    """
    executions = [execute_tour(t, network) for t in sorted(tours, key=lambda t: t.id)]
    deps = extract_departures(executions, hubs or {})
    return executions, link_loads(executions), deps


def extract_departures(executions: Iterable[TourExecution],
                       hubs: Mapping[str, str]) -> list[DepartureRecord]:
    """One record per tour that starts at a hub node."""
    by_node = {}
    for hid in sorted(hubs):
        by_node.setdefault(hubs[hid], hid)
    out = []
    for ex in executions:
        hid = by_node.get(ex.start_node)
        if hid is not None:
            out.append(DepartureRecord(hid, ex.tour_id, ex.start_s, ex.initial_load))
    return sorted(out, key=lambda r: (r.tour_id, r.hub_id))


def diff_link_loads(base: Mapping, variant: Mapping) -> dict:
    """Signed ``variant - base`` per key; keys missing on one side count as zero."""
    out = {}
    for key in sorted(set(base) | set(variant)):
        out[key] = variant.get(key, 0) - base.get(key, 0)
    return out


def loads_by_link_hour(loads: Mapping, vehicle_types: Iterable[str] | None = None) -> Counter:
    """Collapse (link, hour, type) counts to (link, hour), optionally for some types only."""
    keep = None if vehicle_types is None else set(vehicle_types)
    out: Counter = Counter()
    for (lid, hour, vtype), n in loads.items():
        if keep is None or vtype in keep:
            out[(lid, hour)] += n
    return out


# -- persistence -------------------------------------------------------------

EXECUTION_COLUMNS = ["tour_id", "vehicle_type", "start_s", "end_s", "total_m", "total_s"]


def _fmt(x: float) -> str:
    return repr(float(x))


def write_executions(executions: Sequence[TourExecution], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EXECUTION_COLUMNS)
        for ex in executions:
            w.writerow([ex.tour_id, ex.vehicle_type, _fmt(ex.start_s), _fmt(ex.end_s),
                        _fmt(ex.total_m), _fmt(ex.total_s)])


def write_link_loads(loads: Mapping, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["link_id", "hour", "vehicle_type", "count"])
        for (lid, hour, vtype) in sorted(loads):
            w.writerow([lid, hour, vtype, loads[(lid, hour, vtype)]])


def read_link_loads(path: Path) -> Counter:
    out: Counter = Counter()
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out[(row["link_id"], int(row["hour"]), row["vehicle_type"])] += int(row["count"])
    return out


def write_departures(records: Sequence[DepartureRecord], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["hub_id", "tour_id", "departure_s", "parcels"])
        for r in records:
            w.writerow([r.hub_id, r.tour_id, _fmt(r.departure_s), r.parcels])


def read_departures(path: Path) -> list[DepartureRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [DepartureRecord(r["hub_id"], r["tour_id"], float(r["departure_s"]), int(r["parcels"]))
                for r in csv.DictReader(fh)]
