"""Seeded synthetic parcel demand, carrier market and supply jobs."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

TRUCKLOAD = 800
HUB_CAPACITY = 4000


class DemandError(ValueError):
    pass


@dataclass(frozen=True)
class Zone:
    id: str
    centroid: str
    weight: float


@dataclass(frozen=True)
class Carrier:
    id: str
    depot: str
    market_share: float
    hub_connected: bool = False


@dataclass(frozen=True)
class Hub:
    id: str
    node: str
    daily_capacity: int = HUB_CAPACITY


@dataclass(frozen=True)
class Facility:
    id: str
    node: str
    kind: str  # industry | retail_center
    daily_supply: int
    tunnel_connected: bool = False
    supplier: Optional[str] = None  # carrier whose depot ships the supply

    def __post_init__(self):
        if self.kind not in ("industry", "retail_center"):
            raise DemandError(f"facility {self.id}: unknown kind {self.kind!r}")
        if self.kind == "industry" and not self.tunnel_connected:
            raise DemandError(f"industry facility {self.id} must be tunnel-connected")


@dataclass(frozen=True)
class ParcelJob:
    id: str
    customer: str
    size: int
    carrier: str


@dataclass(frozen=True)
class SupplyJob:
    id: str
    destination: str  # hub or facility id
    destination_node: str
    size: int
    origin: str  # depot node
    carrier: str
    target: str = "hub"  # hub | facility

    def __post_init__(self):
        if not 1 <= self.size <= TRUCKLOAD:
            raise DemandError(f"supply job {self.id}: size must lie in [1, {TRUCKLOAD}]")


@dataclass
class DemandConfig:
    total_parcels: int
    zones: list[Zone]
    carriers: list[Carrier]
    hubs: list[Hub] = field(default_factory=list)
    facilities: list[Facility] = field(default_factory=list)
    portals: list[str] = field(default_factory=list)
    parcel_size: int = 1


@dataclass
class DemandSet:
    zones: list[Zone]
    carriers: list[Carrier]
    hubs: list[Hub]
    facilities: list[Facility]
    portals: list[str]
    parcel_jobs: list[ParcelJob]
    supply_jobs: list[SupplyJob] = field(default_factory=list)

    def carrier(self, cid: str) -> Carrier:
        for c in self.carriers:
            if c.id == cid:
                return c
        raise KeyError(cid)

    @property
    def total_parcels(self) -> int:
        return sum(j.size for j in self.parcel_jobs)


def radial_weights(points: Sequence[tuple[float, float]], center: tuple[float, float],
                   sigma: float, floor: float = 0.0) -> list[float]:
    """Gaussian density around ``center``, plus a constant ``floor``."""
    cx, cy = center
    return [math.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2 * sigma ** 2)) + floor
            for x, y in points]


def _validate(config: DemandConfig) -> None:
    if config.total_parcels <= 0:
        raise DemandError("total_parcels must be positive")
    if config.parcel_size < 1:
        raise DemandError("parcel_size must be at least 1")
    if not config.zones:
        raise DemandError("no zones configured")
    if any(z.weight < 0 for z in config.zones):
        raise DemandError("zone weights must be non-negative")
    if sum(z.weight for z in config.zones) <= 0:
        raise DemandError("zone weights sum to zero")
    if not config.carriers:
        raise DemandError("carrier list is empty")
    shares = sum(c.market_share for c in config.carriers)
    if abs(shares - 1.0) > 1e-9:
        raise DemandError(f"market shares sum to {shares}, expected 1")
    if any(not 0 <= c.market_share <= 1 for c in config.carriers):
        raise DemandError("market shares must lie in [0, 1]")
    for label, ids in (("zone", [z.id for z in config.zones]),
                       ("carrier", [c.id for c in config.carriers]),
                       ("hub", [h.id for h in config.hubs]),
                       ("facility", [f.id for f in config.facilities])):
        if len(set(ids)) != len(ids):
            raise DemandError(f"duplicate {label} id")


def generate_demand(config: DemandConfig, seed: int) -> DemandSet:
    """Draw parcel jobs for ``config``.

    Parcel counts per zone follow a multinomial over zone weights; within a
    zone, parcels go to carriers by a multinomial over market shares. Parcel
    totals are exact: the last job absorbs any remainder of ``parcel_size``.
    """
    _validate(config)
    rng = np.random.default_rng(seed)
    size = config.parcel_size
    n_jobs, rest = divmod(config.total_parcels, size)
    if rest:
        n_jobs += 1
    w = np.array([z.weight for z in config.zones], dtype=float)
    per_zone = rng.multinomial(n_jobs, w / w.sum())
    shares = np.array([c.market_share for c in config.carriers], dtype=float)
    shares = shares / shares.sum()

    jobs: list[ParcelJob] = []
    for zone, count in zip(config.zones, per_zone):
        if count == 0:
            continue
        split = rng.multinomial(int(count), shares)
        for carrier, k in zip(config.carriers, split):
            for _ in range(int(k)):
                jobs.append(ParcelJob(f"p{len(jobs):06d}", zone.centroid, size, carrier.id))
    if rest:
        last = jobs[-1]
        jobs[-1] = ParcelJob(last.id, last.customer, rest, last.carrier)

    demand = DemandSet(list(config.zones), list(config.carriers), list(config.hubs),
                       list(config.facilities), list(config.portals), jobs)
    demand.supply_jobs = build_supply_jobs(demand)
    return demand


def build_supply_jobs(demand: DemandSet) -> list[SupplyJob]:
    """Truckload supply runs: one per (hub, connected carrier), plus facility supply."""
    out = []
    connected = sorted((c for c in demand.carriers if c.hub_connected), key=lambda c: c.id)
    for hub in sorted(demand.hubs, key=lambda h: h.id):
        for c in connected:
            out.append(SupplyJob(f"s-{hub.id}-{c.id}", hub.id, hub.node, TRUCKLOAD, c.depot, c.id, "hub"))
    by_id = {c.id: c for c in demand.carriers}
    for fac in sorted(demand.facilities, key=lambda f: f.id):
        supplier = by_id[fac.supplier] if fac.supplier else min(demand.carriers, key=lambda c: c.id)
        for k in range(fac.daily_supply):
            out.append(SupplyJob(f"s-{fac.id}-{k}", fac.id, fac.node, TRUCKLOAD, supplier.depot,
                                 supplier.id, "facility"))
    return out


def demand_to_dict(demand: DemandSet) -> dict:
    return {
        "zones": [asdict(z) for z in demand.zones],
        "carriers": [asdict(c) for c in demand.carriers],
        "hubs": [asdict(h) for h in demand.hubs],
        "facilities": [asdict(f) for f in demand.facilities],
        "portals": list(demand.portals),
        "jobs": [asdict(j) for j in demand.parcel_jobs],
        "supply_jobs": [asdict(s) for s in demand.supply_jobs],
    }


def demand_from_dict(data: dict) -> DemandSet:
    try:
        return DemandSet(
            zones=[Zone(**z) for z in data["zones"]],
            carriers=[Carrier(**c) for c in data["carriers"]],
            hubs=[Hub(**h) for h in data["hubs"]],
            facilities=[Facility(**f) for f in data["facilities"]],
            portals=list(data.get("portals", [])),
            parcel_jobs=[ParcelJob(**j) for j in data["jobs"]],
            supply_jobs=[SupplyJob(**s) for s in data.get("supply_jobs", [])],
        )
    except (KeyError, TypeError) as exc:
        raise DemandError(f"malformed demand document: {exc}") from None


def save_demand(demand: DemandSet, path: str | Path) -> None:
    Path(path).write_text(json.dumps(demand_to_dict(demand), indent=1, sort_keys=True) + "\n",
                          encoding="utf-8")


def load_demand(path: str | Path) -> DemandSet:
    return demand_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def validate_placement(demand: DemandSet, network) -> None:
    """Check that referenced nodes exist and hubs sit on both road and tunnel links."""
    road = network.nodes_with_mode("road")
    tunnel = network.nodes_with_mode("tunnel")
    for z in demand.zones:
        if z.centroid not in network.nodes:
            raise DemandError(f"zone {z.id}: unknown node {z.centroid!r}")
    for c in demand.carriers:
        if c.depot not in road:
            raise DemandError(f"carrier {c.id}: depot {c.depot!r} not on the road network")
    for h in demand.hubs:
        if h.node not in road or h.node not in tunnel:
            raise DemandError(f"hub {h.id}: node {h.node!r} must touch road and tunnel links")
    for f in demand.facilities:
        if f.tunnel_connected and f.node not in tunnel:
            raise DemandError(f"facility {f.id}: marked tunnel-connected but {f.node!r} has no tunnel link")
    for p in demand.portals:
        if p not in tunnel:
            raise DemandError(f"portal {p!r} has no tunnel link")


def connected_carriers(carriers: Iterable[Carrier]) -> list[Carrier]:
    return sorted((c for c in carriers if c.hub_connected), key=lambda c: c.id)
