"""Tunnel shuttle planning from last-mile hub departures and facility supply.

Parcels for a tour leaving a micro-hub at instant ``d`` must reach the hub
no earlier than one hour and no later than fifteen minutes before ``d``.
They enter the tunnel at the portal nearest the depot they came from.
"""

from __future__ import annotations

import csv
import logging
import math
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .demand import DemandSet, SupplyJob
from .network import FreeFlowTable, Network, travel_time_matrix
from .scenario import ScenarioKind
from .sim import DepartureRecord, TourExecution, execute
from .vrp import (FREIGHT_SHUTTLE, Shipment, Solution, SolverParams, TimeWindow, Vehicle,
                  VehicleType, check_feasibility, solve)

log = logging.getLogger(__name__)

EARLIEST_BEFORE = 3600.0
LATEST_BEFORE = 900.0
DAY_WINDOW = TimeWindow(0.0, 86_400.0)


@dataclass(frozen=True)
class ShuttleShipment:
    id: str
    pickup: str  # tunnel portal node
    delivery: str  # hub or facility node
    size: int
    window: TimeWindow
    destination: str  # hub or facility id
    source: str  # departing tour id or supply job id

    def __post_init__(self):
        if self.size < 1:
            raise ValueError(f"shuttle shipment {self.id}: size must be at least 1")

    def as_job(self) -> Shipment:
        return Shipment(self.id, self.pickup, self.delivery, self.size, delivery_window=self.window,
                        allowed_types=frozenset({FREIGHT_SHUTTLE.name}))


@dataclass
class TunnelLayout:
    """Where shuttle freight enters the tunnel and where it goes."""

    portals: tuple[str, ...]
    hub_nodes: Mapping[str, str]  # hub id -> node
    facility_nodes: Mapping[str, str]  # tunnel-connected facility id -> node
    depot_portal: Mapping[str, str]  # depot node -> nearest portal

    @classmethod
    def from_demand(cls, demand: DemandSet, network: Network) -> "TunnelLayout":
        if not demand.portals:
            raise ValueError("no tunnel portals configured")
        portals = tuple(sorted(demand.portals))
        nearest = {}
        for c in sorted(demand.carriers, key=lambda c: c.id):
            nearest[c.depot] = min(portals, key=lambda p: (network.distance(c.depot, p), p))
        return cls(portals, {h.id: h.node for h in demand.hubs},
                   {f.id: f.node for f in demand.facilities if f.tunnel_connected}, nearest)


def _pieces(total: int, capacity: int) -> list[int]:
    full, rest = divmod(total, capacity)
    return [capacity] * full + ([rest] if rest else [])


def departure_window(d: float) -> TimeWindow:
    return TimeWindow(d - EARLIEST_BEFORE, d - LATEST_BEFORE)


def departure_key(hub_id: str, departure_s: float) -> str:
    """Name of a hub departure; the instant is rounded to whole seconds."""
    return f"{hub_id}@{round(departure_s)}"


def derive_shipments(departures: Sequence[DepartureRecord], supply_jobs: Sequence[SupplyJob],
                     kind: ScenarioKind | str, layout: TunnelLayout,
                     origins: Optional[Mapping[str, Mapping[str, int]]] = None,
                     capacity: int = FREIGHT_SHUTTLE.capacity) -> list[ShuttleShipment]:
    """Turn hub departures and tunnel-bound supply into shuttle shipments.

    Args:
        origins: tour id -> {depot node: parcels}. Tours without an entry are
            fed from the first portal.

    Tours that leave the same hub at the same instant form one departure.

    Raises:
        ValueError: in the basecase, or when origins disagree with a record.
    """
    kind = ScenarioKind(kind)
    if kind is ScenarioKind.BC:
        raise ValueError("the basecase has no shuttle stage")
    out: list[ShuttleShipment] = []
    origins = origins or {}
    # tours leaving one hub at the same instant share a departure and its shipments
    grouped: dict[tuple[float, str], dict[str, int]] = {}
    for rec in sorted(departures, key=lambda r: (r.departure_s, r.hub_id, r.tour_id)):
        if rec.parcels <= 0:
            log.warning("departure %s from %s carries no parcels, skipped", rec.tour_id, rec.hub_id)
            continue
        by_portal = grouped.setdefault((rec.departure_s, rec.hub_id), {})
        split = origins.get(rec.tour_id)
        if split is None:
            split = {None: rec.parcels}
        elif sum(split.values()) != rec.parcels:
            raise ValueError(f"tour {rec.tour_id}: origin counts do not add up to {rec.parcels}")
        for depot, n in split.items():
            portal = layout.portals[0] if depot is None else layout.depot_portal[depot]
            by_portal[portal] = by_portal.get(portal, 0) + n
    for (d, hub), by_portal in grouped.items():
        node = layout.hub_nodes[hub]
        win = departure_window(d)
        key = departure_key(hub, d)
        k = 0
        for portal in sorted(by_portal):
            for size in _pieces(by_portal[portal], capacity):
                out.append(ShuttleShipment(f"{key}#{k}", portal, node, size, win, hub, key))
                k += 1
    for job in sorted(supply_jobs, key=lambda s: s.id):
        if job.target == "facility":
            if job.destination not in layout.facility_nodes:
                continue  # stays on the road
            node = layout.facility_nodes[job.destination]
        else:
            continue  # hub supply is replaced by the departure-driven stream
        portal = layout.depot_portal[job.origin]
        for k, size in enumerate(_pieces(job.size, capacity)):
            out.append(ShuttleShipment(f"{job.id}#{k}", portal, node, size, DAY_WINDOW,
                                       job.destination, job.id))
    return out


def partition_carriers(shipments: Sequence[ShuttleShipment], k: int) -> list[list[ShuttleShipment]]:
    """Deal shipments round-robin, ordered by window start then id."""
    if k <= 0:
        raise ValueError("shuttle carrier count must be at least 1")
    parts: list[list[ShuttleShipment]] = [[] for _ in range(k)]
    ordered = sorted(shipments, key=lambda s: (s.window.earliest, s.id))
    for i, s in enumerate(ordered):
        parts[i % k].append(s)
    return parts


@dataclass(frozen=True)
class ShuttleViolation:
    shipment_id: str
    seconds: float  # positive when late, negative when early
    penalty: float


def shuttle_fleet(part: Sequence[ShuttleShipment], carrier: int,
                  vtype: VehicleType = FREIGHT_SHUTTLE, slack: int = 2) -> list[Vehicle]:
    """Per portal, enough shuttles to carry everything one piece at a time, plus slack."""
    by_portal: dict[str, int] = {}
    for s in part:
        by_portal[s.pickup] = by_portal.get(s.pickup, 0) + s.size
    fleet = []
    for portal in sorted(by_portal):
        n = math.ceil(by_portal[portal] / vtype.capacity) + slack
        fleet.extend(Vehicle(f"shuttle{carrier}:{portal}:{i:03d}", vtype, portal, 0.0) for i in range(n))
    return fleet


def partition_seed(seed: int, carrier: int) -> int:
    return zlib.crc32(f"{seed}:shuttle{carrier}".encode())


def plan_and_execute(partitions: Sequence[Sequence[ShuttleShipment]], network: Network,
                     params: SolverParams = SolverParams(), table: FreeFlowTable | None = None):
    """Solve each partition as a pickup-and-delivery problem and run it in the tunnel.

    Returns:
        (solutions, executions, violations); violations come from the planned
        schedules and carry the window penalty they cost.
    """
    table = table or FreeFlowTable(network)
    solutions: list[Solution] = []
    executions: list[TourExecution] = []
    violations: list[ShuttleViolation] = []
    for i, part in enumerate(partitions):
        if not part:
            solutions.append(Solution())
            continue
        fleet = shuttle_fleet(part, i)
        locs = sorted({v.start for v in fleet} | {s.pickup for s in part} | {s.delivery for s in part})
        try:
            matrix = travel_time_matrix(network, locs, "tunnel", table)
        except KeyError as exc:
            raise ValueError(f"shuttle carrier {i}: {exc}") from None
        p = SolverParams(partition_seed(params.seed, i), params.iterations, params.ruin_fraction,
                         params.window_penalty, params.unassigned_penalty)
        sol = solve([s.as_job() for s in part], fleet, matrix, p)
        solutions.append(sol)
        ex, _, _ = execute(sol.tours, network)
        executions.extend(ex)
        for v in check_feasibility(sol):
            if v.kind == "window_late":
                violations.append(ShuttleViolation(v.job_id, v.amount, v.amount * params.window_penalty))
            elif v.kind == "window_early":
                violations.append(ShuttleViolation(v.job_id, -v.amount, 0.0))
    return solutions, executions, sorted(violations, key=lambda v: v.shipment_id)


SHIPMENT_COLUMNS = ["id", "pickup_node", "delivery_node", "size", "window_start_s", "window_end_s"]


def write_shipments(shipments: Sequence[ShuttleShipment], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SHIPMENT_COLUMNS)
        for s in shipments:
            w.writerow([s.id, s.pickup, s.delivery, s.size, repr(s.window.earliest),
                        repr(s.window.latest)])


def read_shipments(path: Path, layout: TunnelLayout) -> list[ShuttleShipment]:
    """Read shipments back; destination ids are recovered from the layout."""
    by_node = {n: h for h, n in sorted(layout.facility_nodes.items())}
    by_node.update({n: h for h, n in sorted(layout.hub_nodes.items())})
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for r in csv.DictReader(fh):
            out.append(ShuttleShipment(r["id"], r["pickup_node"], r["delivery_node"], int(r["size"]),
                                       TimeWindow(float(r["window_start_s"]), float(r["window_end_s"])),
                                       by_node[r["delivery_node"]], r["id"].rsplit("#", 1)[0]))
    return out


def write_violations(violations: Sequence[ShuttleViolation], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["shipment_id", "seconds_late_or_early", "penalty"])
        for v in violations:
            w.writerow([v.shipment_id, repr(v.seconds), repr(v.penalty)])


__all__ = [
    "DAY_WINDOW", "EARLIEST_BEFORE", "LATEST_BEFORE", "ShuttleShipment", "ShuttleViolation",
    "TunnelLayout", "departure_key", "departure_window", "derive_shipments", "partition_carriers",
    "plan_and_execute", "read_shipments", "shuttle_fleet", "write_shipments", "write_violations",
]
