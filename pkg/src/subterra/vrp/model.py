"""Routing data model, schedule rules and cost accounting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

from ..network import TravelMatrix


@dataclass(frozen=True)
class VehicleType:
    name: str
    cost_per_meter: float
    cost_per_second: float
    fixed_cost: float
    capacity: int
    mode: str = "road"

    def __post_init__(self):
        if min(self.cost_per_meter, self.cost_per_second, self.fixed_cost) < 0:
            raise ValueError(f"{self.name}: costs must be non-negative")
        if self.capacity < 1:
            raise ValueError(f"{self.name}: capacity must be at least 1")


CEP_VEHICLE = VehicleType("CEP-Vehicle", 0.00037, 0.0063, 48.8, 230, "road")
CARGO_BIKE = VehicleType("CEP-Cargo-Bike", 0.000103, 0.0033, 3.27, 23, "bike")
SUPPLY_TRUCK = VehicleType("Supply-Truck", 0.00086, 0.008, 140.0, 800, "road")
FREIGHT_SHUTTLE = VehicleType("Freight Shuttle", 0.00035, 0.002, 30.0, 140, "tunnel")

VEHICLE_TYPES: dict[str, VehicleType] = {
    t.name: t for t in (CEP_VEHICLE, CARGO_BIKE, SUPPLY_TRUCK, FREIGHT_SHUTTLE)
}


@dataclass(frozen=True)
class TimeWindow:
    earliest: float
    latest: float

    def __post_init__(self):
        if self.earliest > self.latest:
            raise ValueError(f"time window earliest {self.earliest} > latest {self.latest}")


@dataclass(frozen=True)
class Service:
    """Delivery at one location; goods board at tour start."""

    id: str
    location: str
    size: int
    window: Optional[TimeWindow] = None
    duration: float = 0.0
    allowed_types: Optional[frozenset[str]] = None

    def __post_init__(self):
        if self.size < 1:
            raise ValueError(f"service {self.id}: size must be at least 1")


@dataclass(frozen=True)
class Shipment:
    """Pickup at one node and delivery at another, same vehicle."""

    id: str
    pickup: str
    delivery: str
    size: int
    delivery_window: Optional[TimeWindow] = None
    pickup_window: Optional[TimeWindow] = None
    pickup_duration: float = 0.0
    delivery_duration: float = 0.0
    allowed_types: Optional[frozenset[str]] = None

    def __post_init__(self):
        if self.size < 1:
            raise ValueError(f"shipment {self.id}: size must be at least 1")
        if self.pickup == self.delivery:
            raise ValueError(f"shipment {self.id}: pickup equals delivery")


Job = Union[Service, Shipment]


@dataclass(frozen=True)
class Vehicle:
    id: str
    type: VehicleType
    start: str
    earliest_start: float = 0.0


@dataclass(frozen=True)
class Activity:
    kind: str  # start | service | pickup | delivery | end
    job_id: Optional[str]
    node: str
    arrival: float
    begin: float
    departure: float
    load: int  # on board after the activity
    window: Optional[TimeWindow] = None


@dataclass(frozen=True)
class Tour:
    id: str
    vehicle: Vehicle
    activities: tuple[Activity, ...]

    @property
    def start_time(self) -> float:
        return self.activities[0].departure

    @property
    def end_time(self) -> float:
        return self.activities[-1].arrival

    @property
    def initial_load(self) -> int:
        return self.activities[0].load

    def job_ids(self) -> list[str]:
        return list(dict.fromkeys(a.job_id for a in self.activities if a.job_id is not None))


@dataclass
class Solution:
    tours: list[Tour] = field(default_factory=list)
    unassigned: dict[str, str] = field(default_factory=dict)
    total_cost: float = 0.0
    penalty_cost: float = 0.0

    @property
    def operating_cost(self) -> float:
        return self.total_cost - self.penalty_cost


@dataclass(frozen=True)
class SolverParams:
    seed: int = 0
    iterations: int = 2000
    ruin_fraction: float = 0.2
    window_penalty: float = 10.0
    unassigned_penalty: float = 10_000.0

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if not 0 < self.ruin_fraction < 1:
            raise ValueError("ruin_fraction must lie in (0, 1)")


Matrices = Union[TravelMatrix, Mapping[str, TravelMatrix]]


def matrix_for(matrix: Matrices, mode: str) -> TravelMatrix:
    if isinstance(matrix, TravelMatrix):
        return matrix
    try:
        return matrix[mode]
    except KeyError:
        raise KeyError(f"no travel matrix for mode {mode!r}") from None


def timeline(earliest_start: float, travel: Sequence[float], earliest: Sequence[float],
             latest: Sequence[float], duration: Sequence[float]):
    """Schedule a fixed activity sequence.

    ``travel`` has one more entry than the activity lists (the return leg).
    The vehicle waits when it arrives before a window opens. Departure from
    the start location is pushed as late as possible without making any
    windowed activity later than it would be otherwise, or ending later.

    Returns:
        (departure, arrivals, begins, end, lateness) where lateness sums the
        seconds each activity begins after its window closes.
    """
    m = len(earliest)
    t = earliest_start
    waited = 0.0
    shift = math.inf
    for k in range(m):
        t += travel[k]
        if t < earliest[k]:
            waited += earliest[k] - t
            t = earliest[k]
        if latest[k] != math.inf:
            shift = min(shift, waited + max(0.0, latest[k] - t))
        t += duration[k]
    shift = min(shift, waited)

    t0 = earliest_start + shift
    t = t0
    arrivals, begins = [], []
    late = 0.0
    for k in range(m):
        t += travel[k]
        arrivals.append(t)
        if t < earliest[k]:
            t = earliest[k]
        begins.append(t)
        if t > latest[k]:
            late += t - latest[k]
        t += duration[k]
    end = t + travel[m]
    return t0, arrivals, begins, end, late


def route_cost(solution: Solution, matrix: Matrices,
               params: SolverParams = SolverParams()) -> tuple[float, list[dict]]:
    """Recompute the cost of ``solution`` from the travel matrix.

    Per used vehicle: fixed cost + meters x rate + seconds x rate, where the
    seconds run from tour start to tour end, plus lateness penalties. Each
    unassigned job adds the unassigned penalty.
    """
    total = 0.0
    rows = []
    for tour in solution.tours:
        vt = tour.vehicle.type
        mat = matrix_for(matrix, vt.mode)
        acts = tour.activities[1:-1]
        nodes = [tour.vehicle.start] + [a.node for a in acts] + [tour.vehicle.start]
        for n in nodes:
            if n not in mat.index:
                raise KeyError(f"location {n!r} of tour {tour.id} missing from matrix")
        travel = [mat.time(a, b) for a, b in zip(nodes, nodes[1:])]
        meters = sum(mat.dist(a, b) for a, b in zip(nodes, nodes[1:]))
        inf = math.inf
        earliest = [a.window.earliest if a.window else -inf for a in acts]
        latest = [a.window.latest if a.window else inf for a in acts]
        duration = [a.departure - a.begin for a in acts]
        t0, _, _, end, late = timeline(tour.vehicle.earliest_start, travel, earliest, latest, duration)
        row = {
            "tour_id": tour.id,
            "vehicle_type": vt.name,
            "meters": meters,
            "seconds": end - t0,
            "fixed": vt.fixed_cost,
            "distance_cost": meters * vt.cost_per_meter,
            "time_cost": (end - t0) * vt.cost_per_second,
            "penalty": late * params.window_penalty,
        }
        row["total"] = row["fixed"] + row["distance_cost"] + row["time_cost"] + row["penalty"]
        total += row["total"]
        rows.append(row)
    total += params.unassigned_penalty * len(solution.unassigned)
    return total, rows


@dataclass(frozen=True)
class Violation:
    tour_id: str
    kind: str  # capacity | precedence | window_late | window_early | timing
    job_id: Optional[str]
    amount: float


def check_feasibility(solution: Solution, matrix: Matrices | None = None) -> list[Violation]:
    """List every hard-constraint breach and every missed time window.

    Capacity violations report the overload in parcels, window violations the
    seconds early or late. With a matrix, planned times that are faster than
    the matrix allows are reported as ``timing`` violations.
    """
    out: list[Violation] = []
    for tour in solution.tours:
        cap = tour.vehicle.type.capacity
        picked: set[str] = set()
        delivered: set[str] = set()
        for a in tour.activities:
            if a.load > cap:
                out.append(Violation(tour.id, "capacity", a.job_id, a.load - cap))
            elif a.load < 0:
                out.append(Violation(tour.id, "capacity", a.job_id, -a.load))
            if a.kind == "pickup":
                picked.add(a.job_id)
            elif a.kind == "delivery":
                if a.job_id not in picked:
                    out.append(Violation(tour.id, "precedence", a.job_id, 0.0))
                delivered.add(a.job_id)
            if a.window is not None and a.kind not in ("start", "end"):
                if a.begin > a.window.latest:
                    out.append(Violation(tour.id, "window_late", a.job_id, a.begin - a.window.latest))
                elif a.begin < a.window.earliest:
                    out.append(Violation(tour.id, "window_early", a.job_id, a.window.earliest - a.begin))
        for jid in sorted(picked - delivered):
            out.append(Violation(tour.id, "precedence", jid, 0.0))
        if matrix is not None:
            mat = matrix_for(matrix, tour.vehicle.type.mode)
            for prev, cur in zip(tour.activities, tour.activities[1:]):
                need = mat.time(prev.node, cur.node)
                gap = cur.arrival - prev.departure
                if gap < need - 1e-6:
                    out.append(Violation(tour.id, "timing", cur.job_id, need - gap))
    return out
