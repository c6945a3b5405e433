"""Scenario definitions: hub allocation and per-carrier plans.

BC delivers everything from carrier depots and trucks supply into hubs and
facilities. SHU gives every connected carrier its own hub allotment, WHU
pools connected demand at the hubs under one white-label operator, and
WHU_B adds cargo bikes at the hubs for nearby customers.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .demand import DemandSet, ParcelJob, connected_carriers
from .network import FreeFlowTable, Network
from .vrp import CARGO_BIKE, CEP_VEHICLE, SUPPLY_TRUCK, Service, Vehicle, VehicleType

SHU_CAPACITY = 800

HubAllocation = dict  # parcel job id -> hub id


class ScenarioKind(str, enum.Enum):
    BC = "BC"
    SHU = "SHU"
    WHU = "WHU"
    WHU_B = "WHU_B"

    @classmethod
    def parse(cls, text: str) -> "ScenarioKind":
        key = text.strip().upper().replace("-", "_")
        try:
            return cls[key]
        except KeyError:
            raise ValueError(f"unknown scenario {text!r}") from None

    @property
    def slug(self) -> str:
        return self.value.lower().replace("_", "-")

    @property
    def has_shuttle(self) -> bool:
        return self is not ScenarioKind.BC


@dataclass(frozen=True)
class FleetEntry:
    """``count`` vehicles of one type at one start, departing in waves."""

    type: VehicleType
    count: int
    start: str
    first_departure: float = 0.0
    wave_gap: float = 0.0
    waves: int = 1


@dataclass
class PlanParams:
    bike_radius_m: float = 3000.0
    stop_parcels: int = 23
    fleet_slack: int = 2
    cep_first_departure: float = 7 * 3600.0
    cep_wave_gap: float = 1800.0
    cep_waves: int = 4
    truck_departure: float = 5 * 3600.0
    shu_capacity: int = SHU_CAPACITY
    hub_capacity: Optional[int] = None  # overrides per-hub daily_capacity


@dataclass
class CarrierPlan:
    id: str
    carrier: str
    starts: tuple[str, ...]
    fleet: list[FleetEntry]
    jobs: list[Service]
    parcels: dict[str, tuple[str, ...]] = field(default_factory=dict)
    supply: dict[str, str] = field(default_factory=dict)
    hub: Optional[str] = None

    def vehicles(self) -> list[Vehicle]:
        out = []
        for entry in self.fleet:
            tag = {"CEP-Vehicle": "cep", "CEP-Cargo-Bike": "bike", "Supply-Truck": "truck",
                   "Freight Shuttle": "shuttle"}.get(entry.type.name, entry.type.name)
            for i in range(entry.count):
                dep = entry.first_departure + (i % entry.waves) * entry.wave_gap
                out.append(Vehicle(f"{self.id}:{tag}{i:03d}", entry.type, entry.start, dep))
        return out

    @property
    def parcel_count(self) -> int:
        return sum(s.size for s in self.jobs if s.id in self.parcels)


def _nearest_hub(demand: DemandSet, network: Network, table: FreeFlowTable):
    """Map customer node -> (meters, hub id) of its closest hub by free-flow road distance."""
    customers = sorted({j.customer for j in demand.parcel_jobs})
    out = {}
    trees = {h.id: table.tree(h.node, "road") for h in demand.hubs}
    for node in customers:
        best = None
        for h in sorted(demand.hubs, key=lambda h: h.id):
            _, meters = trees[h.id]
            if node not in meters:
                continue
            cand = (meters[node], h.id)
            if best is None or cand < best:
                best = cand
        if best is not None:
            out[node] = best
    return out


def allocate_shu(demand: DemandSet, network: Network, table: FreeFlowTable | None = None,
                 capacity: int = SHU_CAPACITY) -> HubAllocation:
    """Per connected carrier, fill each hub with its nearest parcels up to ``capacity``.

    A parcel is only considered for its closest hub; parcels that do not fit
    stay with the carrier depot.
    """
    if not demand.hubs:
        return {}
    table = table or FreeFlowTable(network)
    nearest = _nearest_hub(demand, network, table)
    alloc: HubAllocation = {}
    for carrier in connected_carriers(demand.carriers):
        ranked = sorted(
            (nearest[j.customer][0], nearest[j.customer][1], j.id, j.size)
            for j in demand.parcel_jobs if j.carrier == carrier.id and j.customer in nearest)
        used: dict[str, int] = {}
        for _, hub, jid, size in ranked:
            if used.get(hub, 0) + size <= capacity:
                used[hub] = used.get(hub, 0) + size
                alloc[jid] = hub
    return alloc


def allocate_whu(demand: DemandSet, network: Network, table: FreeFlowTable | None = None,
                 capacity: int | None = None) -> HubAllocation:
    """Pool connected carriers' parcels and assign each to its closest hub until full."""
    if not demand.hubs:
        return {}
    table = table or FreeFlowTable(network)
    nearest = _nearest_hub(demand, network, table)
    caps = {h.id: capacity if capacity is not None else h.daily_capacity for h in demand.hubs}
    connected = {c.id for c in demand.carriers if c.hub_connected}
    ranked = sorted(
        (nearest[j.customer][0], nearest[j.customer][1], j.id, j.size)
        for j in demand.parcel_jobs if j.carrier in connected and j.customer in nearest)
    used: dict[str, int] = {}
    alloc: HubAllocation = {}
    for _, hub, jid, size in ranked:
        if used.get(hub, 0) + size <= caps[hub]:
            used[hub] = used.get(hub, 0) + size
            alloc[jid] = hub
    return alloc


def allocate(kind: ScenarioKind, demand: DemandSet, network: Network,
             table: FreeFlowTable | None = None, params: PlanParams | None = None) -> HubAllocation:
    params = params or PlanParams()
    if kind is ScenarioKind.BC:
        return {}
    if kind is ScenarioKind.SHU:
        return allocate_shu(demand, network, table, params.shu_capacity)
    return allocate_whu(demand, network, table, params.hub_capacity)


def _services(plan_id: str, jobs: list[ParcelJob], chunk: int,
              allowed: Mapping[str, frozenset[str]]):
    """Consolidate co-located parcels into stops of at most ``chunk`` parcels."""
    by_node: dict[str, list[ParcelJob]] = {}
    for j in sorted(jobs, key=lambda j: j.id):
        by_node.setdefault(j.customer, []).append(j)
    services, members = [], {}
    for node in sorted(by_node):
        batch: list[ParcelJob] = []
        load = 0
        k = 0

        def flush():
            nonlocal k
            sid = f"{plan_id}:{node}:{k}"
            k += 1
            services.append(Service(sid, node, sum(p.size for p in batch),
                                    allowed_types=allowed.get(node, frozenset({CEP_VEHICLE.name}))))
            members[sid] = tuple(p.id for p in batch)

        for p in by_node[node]:
            if batch and load + p.size > chunk:
                flush()
                batch, load = [], 0
            batch.append(p)
            load += p.size
        if batch:
            flush()
    return services, members


def _bound(parcels: int, capacity: int, slack: int) -> int:
    return math.ceil(parcels / capacity) + slack


def _cep(params: PlanParams, vtype: VehicleType, parcels: int, start: str) -> FleetEntry:
    return FleetEntry(vtype, _bound(parcels, vtype.capacity, params.fleet_slack), start,
                      params.cep_first_departure, params.cep_wave_gap, params.cep_waves)


def _make_plan(plan_id, carrier, start, parcel_jobs, supply_jobs, params, hub=None,
               bike_nodes: frozenset[str] = frozenset()) -> CarrierPlan | None:
    if not parcel_jobs and not supply_jobs:
        return None
    allowed = {n: frozenset({CEP_VEHICLE.name, CARGO_BIKE.name}) for n in bike_nodes}
    services, members = _services(plan_id, parcel_jobs, params.stop_parcels, allowed)
    fleet = []
    parcels = sum(j.size for j in parcel_jobs)
    if parcel_jobs:
        fleet.append(_cep(params, CEP_VEHICLE, parcels, start))
        eligible = sum(j.size for j in parcel_jobs if j.customer in bike_nodes)
        if eligible:
            fleet.append(_cep(params, CARGO_BIKE, eligible, start))
    supply = {}
    if supply_jobs:
        for s in sorted(supply_jobs, key=lambda s: s.id):
            services.append(Service(s.id, s.destination_node, s.size,
                                    allowed_types=frozenset({SUPPLY_TRUCK.name})))
            supply[s.id] = s.id
        load = sum(s.size for s in supply_jobs)
        fleet.append(FleetEntry(SUPPLY_TRUCK, _bound(load, SUPPLY_TRUCK.capacity, params.fleet_slack),
                                start, params.truck_departure))
    return CarrierPlan(plan_id, carrier, (start,), fleet, services, members, supply, hub)


def bike_eligible_nodes(demand: DemandSet, hub_node: str, customers, network: Network,
                        table: FreeFlowTable, radius: float) -> frozenset[str]:
    """Customers within ``radius`` road meters of the hub that the bike network reaches."""
    _, road_m = table.tree(hub_node, "road")
    bike_t, _ = table.tree(hub_node, "bike")
    out = set()
    for node in customers:
        if road_m.get(node, math.inf) <= radius and node in bike_t:
            back, _ = table.tree(node, "bike")
            if hub_node in back:
                out.add(node)
    return frozenset(out)


def build_carrier_plans(kind: ScenarioKind, demand: DemandSet, allocation: HubAllocation,
                        network: Network | None = None, params: PlanParams | None = None,
                        table: FreeFlowTable | None = None) -> list[CarrierPlan]:
    """Turn demand plus hub allocation into one plan per routing problem.

    Raises:
        ValueError: allocation names an unknown hub or job, or is not empty in BC.
    """
    params = params or PlanParams()
    kind = ScenarioKind(kind)
    hubs = {h.id: h for h in demand.hubs}
    jobs = {j.id: j for j in demand.parcel_jobs}
    for jid, hid in allocation.items():
        if jid not in jobs:
            raise ValueError(f"allocation references unknown job {jid!r}")
        if hid not in hubs:
            raise ValueError(f"allocation references unknown hub {hid!r}")
    if kind is ScenarioKind.BC and allocation:
        raise ValueError("basecase takes an empty allocation")
    connected = {c.id for c in demand.carriers if c.hub_connected}
    for jid in allocation:
        if jobs[jid].carrier not in connected:
            raise ValueError(f"job {jid} belongs to a carrier without hub access")

    if kind is ScenarioKind.BC:
        trucked = list(demand.supply_jobs)
    else:
        trucked = [s for s in demand.supply_jobs
                   if s.target == "facility" and not _facility(demand, s.destination).tunnel_connected]

    plans: list[CarrierPlan] = []
    for c in sorted(demand.carriers, key=lambda c: c.id):
        own = [j for j in demand.parcel_jobs if j.carrier == c.id and j.id not in allocation]
        supply = [s for s in trucked if s.carrier == c.id]
        plan = _make_plan(f"{c.id}@depot", c.id, c.depot, own, supply, params)
        if plan is not None or kind is ScenarioKind.BC:
            plans.append(plan or CarrierPlan(f"{c.id}@depot", c.id, (c.depot,), [], []))

    if kind is ScenarioKind.SHU:
        for c in sorted(demand.carriers, key=lambda c: c.id):
            for h in sorted(demand.hubs, key=lambda h: h.id):
                mine = [j for j in demand.parcel_jobs
                        if allocation.get(j.id) == h.id and j.carrier == c.id]
                plan = _make_plan(f"{c.id}@{h.id}", c.id, h.node, mine, [], params, hub=h.id)
                if plan is not None:
                    plans.append(plan)
    elif kind in (ScenarioKind.WHU, ScenarioKind.WHU_B):
        for h in sorted(demand.hubs, key=lambda h: h.id):
            pooled = [j for j in demand.parcel_jobs if allocation.get(j.id) == h.id]
            bikes = frozenset()
            if kind is ScenarioKind.WHU_B and pooled:
                if network is None:
                    raise ValueError("WHU_B needs the network to find bike-eligible customers")
                bikes = bike_eligible_nodes(demand, h.node, {j.customer for j in pooled}, network,
                                            table or FreeFlowTable(network), params.bike_radius_m)
            plan = _make_plan(f"white-label@{h.id}", "white-label", h.node, pooled, [], params,
                              hub=h.id, bike_nodes=bikes)
            if plan is not None:
                plans.append(plan)
    return plans


def _facility(demand: DemandSet, fid: str):
    for f in demand.facilities:
        if f.id == fid:
            return f
    raise KeyError(fid)
