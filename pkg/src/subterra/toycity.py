"""A fixed synthetic city with logistics areas, micro-hubs and a freight tunnel.

The city is a square street grid with faster arterials every third line.
Carrier depots sit in two logistics areas outside the city and reach it by
highway. Five micro-hubs on a ring around the centre are joined by a tunnel
loop, with spurs to two portals near the logistics areas and to the
tunnel-connected facilities. Cargo bikes get their own links alongside the
streets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .demand import Carrier, DemandConfig, Facility, Hub, Zone, radial_weights
from .network import Link, Network, Node, SpeedProfile

PEAK_HOURS = (7, 8, 16, 17)


@dataclass
class ToyCityParams:
    grid: int = 13  # nodes per side
    spacing: float = 700.0
    local_speed: float = 8.33
    arterial_speed: float = 13.9
    highway_speed: float = 27.8
    bike_speed: float = 4.17
    tunnel_speed: float = 10.0
    peak_factor_arterial: float = 0.6
    peak_factor_local: float = 0.8
    area_distance: float = 12_000.0
    hub_ring: float = 2_500.0
    total_parcels: int = 20_000
    demand_sigma: float = 2_500.0
    demand_floor: float = 0.05
    carriers: int = 7
    connected: int = 5
    hubs: int = 5


@dataclass
class ToyCity:
    network: Network
    demand: DemandConfig


def _gid(i: int, j: int) -> str:
    return f"g{i:02d}_{j:02d}"


class _Builder:
    def __init__(self):
        self.nodes: dict[str, Node] = {}
        self.links: list[Link] = []
        self.profiles: list[SpeedProfile] = []

    def node(self, nid, x, y):
        self.nodes[nid] = Node(nid, float(x), float(y))

    def pair(self, prefix, a, b, speed, mode="road", peak=None, length=None):
        na, nb = self.nodes[a], self.nodes[b]
        length = length or math.hypot(na.x - nb.x, na.y - nb.y)
        for u, v in ((a, b), (b, a)):
            lid = f"{prefix}:{u}-{v}"
            self.links.append(Link(lid, u, v, round(length, 3), speed, mode))
            if peak is not None:
                self.profiles.append(SpeedProfile(lid, tuple((h, speed * peak) for h in PEAK_HOURS)))


def build_toy_city(params: ToyCityParams | None = None) -> ToyCity:
    """Build the toy city network and its demand configuration."""
    p = params or ToyCityParams()
    if p.connected > p.carriers:
        raise ValueError("more connected carriers than carriers")
    b = _Builder()
    half = p.grid // 2
    idx = range(-half, p.grid - half)
    for i in idx:
        for j in idx:
            b.node(_gid(i + half, j + half), i * p.spacing, j * p.spacing)

    def arterial(k):
        return (k - half) % 3 == 0

    for i in range(p.grid):
        for j in range(p.grid):
            a = _gid(i, j)
            for di, dj in ((1, 0), (0, 1)):
                if i + di >= p.grid or j + dj >= p.grid:
                    continue
                c = _gid(i + di, j + dj)
                fast = arterial(j) if di else arterial(i)
                if fast:
                    b.pair("r", a, c, p.arterial_speed, peak=p.peak_factor_arterial)
                else:
                    b.pair("r", a, c, p.local_speed, peak=p.peak_factor_local)
                b.pair("b", a, c, p.bike_speed, mode="bike")

    # logistics areas north and west, each with an access node and depots
    areas = {
        "N": ((0.0, p.area_distance), _gid(half, p.grid - 1), (1, 0)),
        "W": ((-p.area_distance, 0.0), _gid(0, half), (0, 1)),
    }
    n_north = math.ceil(p.carriers / 2)
    depots = []
    for area, ((ax, ay), gate, (ox, oy)) in areas.items():
        access = f"L{area}"
        b.node(access, ax, ay)
        b.pair("h", access, gate, p.highway_speed, peak=p.peak_factor_arterial)
        count = n_north if area == "N" else p.carriers - n_north
        for k in range(count):
            off = (k - (count - 1) / 2) * 600.0
            did = f"D{area}{k + 1}"
            # depots sit on a street behind the access node, away from the city
            b.node(did, ax + ox * off - oy * 400.0, ay + oy * off + ox * 400.0)
            b.pair("r", did, access, p.local_speed)
            depots.append(did)
        portal = f"P{area}"
        b.node(portal, ax + oy * 500.0, ay - ox * 500.0)
    # diagonal highway from each area to the nearest city corner spreads traffic
    b.pair("h", "LN", _gid(p.grid - 1, p.grid - 1), p.highway_speed, peak=p.peak_factor_arterial)
    b.pair("h", "LW", _gid(0, 0), p.highway_speed, peak=p.peak_factor_arterial)

    # hubs on a ring, snapped to the grid
    hubs = []
    used = set()
    for k in range(p.hubs):
        ang = math.pi / 2 + 2 * math.pi * k / p.hubs
        x, y = p.hub_ring * math.cos(ang), p.hub_ring * math.sin(ang)
        gi = min(p.grid - 1, max(0, round(x / p.spacing) + half))
        gj = min(p.grid - 1, max(0, round(y / p.spacing) + half))
        node = _gid(gi, gj)
        if node in used:
            raise ValueError("hub ring too small for the grid spacing")
        used.add(node)
        hubs.append(Hub(f"H{k + 1}", node))

    # facilities: two industry sites outside the grid, three retail centres
    last = p.grid - 1
    b.node("I1", (half + 3) * p.spacing, -2 * p.spacing)
    b.pair("r", "I1", _gid(last, half - 2), p.arterial_speed, peak=p.peak_factor_arterial)
    b.node("I2", 2 * p.spacing, -(half + 3) * p.spacing)
    b.pair("r", "I2", _gid(half + 2, 0), p.arterial_speed, peak=p.peak_factor_arterial)
    facilities_nodes = {"I1": "I1", "I2": "I2", "R1": _gid(half, half),
                        "R2": _gid(half + 4, half + 4), "R3": _gid(half - 4, half - 3)}

    # tunnel: loop through the hubs, spurs to portals and connected facilities
    loop = [h.node for h in hubs]
    for a, c in zip(loop, loop[1:] + loop[:1]):
        b.pair("t", a, c, p.tunnel_speed, mode="tunnel")

    def nearest_hub(nid):
        n = b.nodes[nid]
        return min(hubs, key=lambda h: (math.hypot(b.nodes[h.node].x - n.x,
                                                   b.nodes[h.node].y - n.y), h.id)).node

    for spur in ("PN", "PW", "I1", "I2", facilities_nodes["R1"]):
        b.pair("t", spur, nearest_hub(spur), p.tunnel_speed, mode="tunnel")

    network = Network(b.nodes.values(), b.links, b.profiles)

    carriers = []
    for k, depot in enumerate(depots):
        carriers.append(Carrier(f"c{k + 1}", depot, 1.0 / p.carriers, k < p.connected))
    # shares must sum to exactly one
    drift = 1.0 - sum(c.market_share for c in carriers)
    last_c = carriers[-1]
    carriers[-1] = Carrier(last_c.id, last_c.depot, last_c.market_share + drift, last_c.hub_connected)

    def supplier(nid):
        n = b.nodes[nid]
        return min(carriers, key=lambda c: (math.hypot(b.nodes[c.depot].x - n.x,
                                                       b.nodes[c.depot].y - n.y), c.id)).id

    facilities = [
        Facility("I1", "I1", "industry", 3, True, supplier("I1")),
        Facility("I2", "I2", "industry", 3, True, supplier("I2")),
        Facility("R1", facilities_nodes["R1"], "retail_center", 2, True, supplier(facilities_nodes["R1"])),
        Facility("R2", facilities_nodes["R2"], "retail_center", 2, False, supplier(facilities_nodes["R2"])),
        Facility("R3", facilities_nodes["R3"], "retail_center", 2, False, supplier(facilities_nodes["R3"])),
    ]

    grid_ids = [_gid(i, j) for i in range(p.grid) for j in range(p.grid)]
    weights = radial_weights([(b.nodes[g].x, b.nodes[g].y) for g in grid_ids], (0.0, 0.0),
                             p.demand_sigma, p.demand_floor)
    zones = [Zone(f"z{g[1:]}", g, round(w, 12)) for g, w in zip(grid_ids, weights)]
    demand = DemandConfig(p.total_parcels, zones, carriers, hubs, facilities, ["PN", "PW"])
    return ToyCity(network, demand)
