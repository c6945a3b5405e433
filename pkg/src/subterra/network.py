"""Time-dependent multimodal network: road, tunnel and bike links.

Link speeds vary by hour through per-link speed profiles. A vehicle samples
the speed when it enters a link and keeps it for the whole traversal, so
FIFO can be violated across hour boundaries.
"""

from __future__ import annotations

import csv
import heapq
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence, TextIO, Union

import numpy as np

MODES = ("road", "tunnel", "bike")
DAY = 86_400.0

Source = Union[str, Path, TextIO, None]


class NetworkError(ValueError):
    """Raised when network input fails validation."""


@dataclass(frozen=True)
class Node:
    id: str
    x: float
    y: float


@dataclass(frozen=True)
class Link:
    id: str
    from_node: str
    to_node: str
    length: float
    freeflow_speed: float
    mode: str = "road"

    @property
    def freeflow_time(self) -> float:
        return self.length / self.freeflow_speed


@dataclass(frozen=True)
class SpeedProfile:
    link_id: str
    entries: tuple[tuple[int, float], ...]


@dataclass(frozen=True)
class PathResult:
    """Outcome of a path query. ``reachable`` is False when no path exists."""

    reachable: bool
    nodes: tuple[str, ...] = ()
    links: tuple[str, ...] = ()
    seconds: float = math.inf
    meters: float = math.inf


@dataclass(frozen=True)
class TravelMatrix:
    """Square free-flow matrix over a list of node ids."""

    nodes: tuple[str, ...]
    seconds: np.ndarray
    meters: np.ndarray
    index: Mapping[str, int] = field(compare=False, repr=False, default_factory=dict)

    def __post_init__(self):
        if not self.index:
            object.__setattr__(self, "index", {n: i for i, n in enumerate(self.nodes)})

    def time(self, a: str, b: str) -> float:
        return float(self.seconds[self.index[a], self.index[b]])

    def dist(self, a: str, b: str) -> float:
        return float(self.meters[self.index[a], self.index[b]])


class Network:
    """Validated, immutable multimodal graph.

    Args:
        nodes: node records, ids unique.
        links: link records; endpoints must exist, no self loops.
        profiles: optional hourly speed overrides per link.
    """

    def __init__(self, nodes: Iterable[Node], links: Iterable[Link],
                 profiles: Iterable[SpeedProfile] = ()):
        self.nodes: dict[str, Node] = {}
        for n in nodes:
            if n.id in self.nodes:
                raise NetworkError(f"duplicate node id {n.id!r}")
            self.nodes[n.id] = n

        self.links: dict[str, Link] = {}
        for lk in links:
            if lk.id in self.links:
                raise NetworkError(f"duplicate link id {lk.id!r}")
            for end in (lk.from_node, lk.to_node):
                if end not in self.nodes:
                    raise NetworkError(f"link {lk.id!r} references unknown node {end!r}")
            if lk.from_node == lk.to_node:
                raise NetworkError(f"link {lk.id!r} is a self-loop on {lk.from_node!r}")
            if not lk.length > 0:
                raise NetworkError(f"link {lk.id!r} has non-positive length {lk.length}")
            if not lk.freeflow_speed > 0:
                raise NetworkError(f"link {lk.id!r} has non-positive speed {lk.freeflow_speed}")
            if lk.mode not in MODES:
                raise NetworkError(f"link {lk.id!r} has unknown mode {lk.mode!r}")
            self.links[lk.id] = lk

        self._speeds: dict[str, list[float]] = {}
        seen: set[tuple[str, int]] = set()
        for prof in profiles:
            lk = self.links.get(prof.link_id)
            if lk is None:
                raise NetworkError(f"speed profile references unknown link {prof.link_id!r}")
            row = self._speeds.setdefault(prof.link_id, [lk.freeflow_speed] * 24)
            for hour, speed in prof.entries:
                if not 0 <= hour <= 23:
                    raise NetworkError(f"profile for {prof.link_id!r}: hour {hour} outside 0-23")
                if (prof.link_id, hour) in seen:
                    raise NetworkError(f"profile for {prof.link_id!r}: duplicate hour {hour}")
                if not speed > 0:
                    raise NetworkError(f"profile for {prof.link_id!r} hour {hour}: non-positive speed {speed}")
                if speed > 2 * lk.freeflow_speed:
                    raise NetworkError(
                        f"profile for {prof.link_id!r} hour {hour}: speed {speed} exceeds 2x freeflow")
                seen.add((prof.link_id, hour))
                row[hour] = float(speed)

        out: dict[tuple[str, str], list[Link]] = {}
        for lk in sorted(self.links.values(), key=lambda l: l.id):
            out.setdefault((lk.from_node, lk.mode), []).append(lk)
        self._out = {k: tuple(v) for k, v in out.items()}

    def out_links(self, node: str, mode: str) -> tuple[Link, ...]:
        return self._out.get((node, mode), ())

    def speed_at(self, link_id: str, t: float) -> float:
        row = self._speeds.get(link_id)
        if row is None:
            return self.links[link_id].freeflow_speed
        return row[int(t // 3600) % 24]

    def profile_entries(self) -> list[tuple[str, int, float]]:
        """Explicit (link, hour, speed) entries that differ from free flow."""
        rows = []
        for lid in sorted(self._speeds):
            ff = self.links[lid].freeflow_speed
            for h, s in enumerate(self._speeds[lid]):
                if s != ff:
                    rows.append((lid, h, s))
        return rows

    def nodes_with_mode(self, mode: str) -> set[str]:
        touched = set()
        for lk in self.links.values():
            if lk.mode == mode:
                touched.add(lk.from_node)
                touched.add(lk.to_node)
        return touched

    def distance(self, a: str, b: str) -> float:
        """Straight-line distance between two nodes in meters."""
        na, nb = self.nodes[a], self.nodes[b]
        return math.hypot(na.x - nb.x, na.y - nb.y)


def travel_time(network: Network, link_id: str, enter_time: float) -> float:
    """Seconds needed to traverse ``link_id`` when entering at ``enter_time``."""
    if link_id not in network.links:
        raise KeyError(f"unknown link {link_id!r}")
    if enter_time < 0:
        raise ValueError("enter_time must be non-negative")
    return network.links[link_id].length / network.speed_at(link_id, enter_time)


def _search(network: Network, source: str, mode: str, depart_time: float,
            time_dependent: bool, target: str | None = None):
    # labels are (elapsed seconds, incoming link id); equal times prefer the
    # lexicographically smaller incoming link
    best = {source: 0.0}
    meters = {source: 0.0}
    pred: dict[str, Link | None] = {source: None}
    done: set[str] = set()
    heap = [(0.0, "", source)]
    while heap:
        t, _, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == target:
            break
        for lk in network.out_links(u, mode):
            v = lk.to_node
            if v in done:
                continue
            if time_dependent:
                dt = lk.length / network.speed_at(lk.id, depart_time + t)
            else:
                dt = lk.length / lk.freeflow_speed
            nt = t + dt
            old = best.get(v)
            if old is None or nt < old or (nt == old and lk.id < pred[v].id):
                best[v] = nt
                meters[v] = meters[u] + lk.length
                pred[v] = lk
                heapq.heappush(heap, (nt, lk.id, v))
    return best, meters, pred, done


def _trace(pred, target) -> tuple[tuple[str, ...], tuple[str, ...]]:
    nodes, links = [target], []
    lk = pred[target]
    while lk is not None:
        links.append(lk.id)
        nodes.append(lk.from_node)
        lk = pred[lk.from_node]
    return tuple(reversed(nodes)), tuple(reversed(links))


def shortest_path(network: Network, from_node: str, to_node: str, depart_time: float = 0.0,
                  mode: str = "road", time_dependent: bool = False) -> PathResult:
    """Minimal travel-time path restricted to links of ``mode``.

    The free-flow variant ignores speed profiles. The time-dependent variant
    evaluates each link at the instant the vehicle enters it.
    """
    for n in (from_node, to_node):
        if n not in network.nodes:
            raise KeyError(f"unknown node {n!r}")
    if from_node == to_node:
        return PathResult(True, (from_node,), (), 0.0, 0.0)
    best, meters, pred, done = _search(network, from_node, mode, depart_time,
                                       time_dependent, target=to_node)
    if to_node not in done:
        return PathResult(False)
    nodes, links = _trace(pred, to_node)
    return PathResult(True, nodes, links, best[to_node], meters[to_node])


class FreeFlowTable:
    """Memo of free-flow shortest-path trees, one per (source, mode).

    The network itself stays untouched; the table is a separate cache that
    callers may share across matrix requests on the same network.
    """

    def __init__(self, network: Network):
        self.network = network
        self._trees: dict[tuple[str, str], tuple[dict, dict]] = {}

    def tree(self, source: str, mode: str) -> tuple[dict, dict]:
        key = (source, mode)
        if key not in self._trees:
            best, meters, _, _ = _search(self.network, source, mode, 0.0, False)
            self._trees[key] = (best, meters)
        return self._trees[key]


def travel_time_matrix(network: Network, locations: Sequence[str], mode: str = "road",
                       table: FreeFlowTable | None = None) -> TravelMatrix:
    """Free-flow (seconds, meters) matrix between ``locations``.

    Duplicate locations collapse onto one row. Raises ``NetworkError`` listing
    every unreachable ordered pair.
    """
    table = table or FreeFlowTable(network)
    nodes = tuple(dict.fromkeys(locations))
    for n in nodes:
        if n not in network.nodes:
            raise KeyError(f"unknown node {n!r}")
    k = len(nodes)
    secs = np.zeros((k, k))
    dist = np.zeros((k, k))
    missing = []
    for i, a in enumerate(nodes):
        best, meters = table.tree(a, mode)
        for j, b in enumerate(nodes):
            if i == j:
                continue
            if b not in best:
                missing.append((a, b))
                continue
            secs[i, j] = best[b]
            dist[i, j] = meters[b]
    if missing:
        shown = ", ".join(f"{a}->{b}" for a, b in missing[:20])
        more = f" (+{len(missing) - 20} more)" if len(missing) > 20 else ""
        raise NetworkError(f"unreachable pairs in {mode} mode: {shown}{more}")
    return TravelMatrix(nodes, secs, dist)


def _open(source: Source):
    if source is None:
        return io.StringIO("")
    if isinstance(source, (str, Path)):
        return open(source, newline="", encoding="utf-8")
    return source


def _rows(source: Source, name: str, columns: Sequence[str]):
    fh = _open(source)
    try:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            if source is None:
                return []
            raise NetworkError(f"{name}: missing header row")
        absent = [c for c in columns if c not in reader.fieldnames]
        if absent:
            raise NetworkError(f"{name}: missing columns {absent}")
        return [(reader.line_num, row) for row in reader]
    finally:
        if isinstance(source, (str, Path)):
            fh.close()


def _num(value: str, name: str, line: int, col: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise NetworkError(f"{name} line {line}: column {col!r} is not a number: {value!r}") from None


def load_network(nodes_source: Source, links_source: Source,
                 profiles_source: Source = None) -> Network:
    """Read nodes.csv, links.csv and an optional speed_profiles.csv."""
    nodes = [Node(r["id"], _num(r["x"], "nodes.csv", ln, "x"), _num(r["y"], "nodes.csv", ln, "y"))
             for ln, r in _rows(nodes_source, "nodes.csv", ("id", "x", "y"))]
    links = []
    for ln, r in _rows(links_source, "links.csv",
                       ("id", "from", "to", "length_m", "freeflow_mps", "mode")):
        links.append(Link(r["id"], r["from"], r["to"],
                          _num(r["length_m"], "links.csv", ln, "length_m"),
                          _num(r["freeflow_mps"], "links.csv", ln, "freeflow_mps"),
                          r["mode"]))
    grouped: dict[str, list[tuple[int, float]]] = {}
    for ln, r in _rows(profiles_source, "speed_profiles.csv", ("link_id", "hour", "speed_mps")):
        hour = _num(r["hour"], "speed_profiles.csv", ln, "hour")
        if hour != int(hour):
            raise NetworkError(f"speed_profiles.csv line {ln}: hour must be an integer")
        speed = _num(r["speed_mps"], "speed_profiles.csv", ln, "speed_mps")
        if not speed > 0:
            raise NetworkError(f"speed_profiles.csv line {ln}: non-positive speed {speed} "
                               f"for link {r['link_id']!r}")
        grouped.setdefault(r["link_id"], []).append((int(hour), speed))
    try:
        return Network(nodes, links, [SpeedProfile(k, tuple(v)) for k, v in grouped.items()])
    except NetworkError as exc:
        raise NetworkError(f"network load failed: {exc}") from None


def write_network(network: Network, directory: str | Path) -> None:
    """Write nodes.csv, links.csv and speed_profiles.csv into ``directory``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "nodes.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "x", "y"])
        for n in network.nodes.values():
            w.writerow([n.id, repr(n.x), repr(n.y)])
    with open(d / "links.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "from", "to", "length_m", "freeflow_mps", "mode"])
        for lk in network.links.values():
            w.writerow([lk.id, lk.from_node, lk.to_node, repr(lk.length),
                        repr(lk.freeflow_speed), lk.mode])
    with open(d / "speed_profiles.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["link_id", "hour", "speed_mps"])
        for lid, h, s in network.profile_entries():
            w.writerow([lid, h, repr(s)])
