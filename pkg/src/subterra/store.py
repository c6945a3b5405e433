"""JSON round-trips for plans and solutions, so every stage can restart from disk."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .scenario import CarrierPlan, FleetEntry
from .vrp import VEHICLE_TYPES, Activity, Service, Solution, TimeWindow, Tour, Vehicle


def _window(w: TimeWindow | None):
    return None if w is None else [w.earliest, w.latest]


def _unwindow(v) -> TimeWindow | None:
    return None if v is None else TimeWindow(float(v[0]), float(v[1]))


def solution_to_dict(sol: Solution) -> dict:
    tours = []
    for t in sol.tours:
        v = t.vehicle
        tours.append({
            "id": t.id,
            "vehicle": {"id": v.id, "type": v.type.name, "start": v.start,
                        "earliest_start": v.earliest_start},
            "activities": [
                {"kind": a.kind, "job_id": a.job_id, "node": a.node, "arrival": a.arrival,
                 "begin": a.begin, "departure": a.departure, "load": a.load,
                 "window": _window(a.window)}
                for a in t.activities
            ],
        })
    return {"tours": tours, "unassigned": dict(sol.unassigned), "total_cost": sol.total_cost,
            "penalty_cost": sol.penalty_cost}


def solution_from_dict(data: dict) -> Solution:
    tours = []
    for t in data["tours"]:
        v = t["vehicle"]
        veh = Vehicle(v["id"], VEHICLE_TYPES[v["type"]], v["start"], float(v["earliest_start"]))
        acts = tuple(Activity(a["kind"], a["job_id"], a["node"], a["arrival"], a["begin"],
                              a["departure"], a["load"], _unwindow(a["window"]))
                     for a in t["activities"])
        tours.append(Tour(t["id"], veh, acts))
    return Solution(tours, dict(data["unassigned"]), data["total_cost"], data["penalty_cost"])


def plan_to_dict(plan: CarrierPlan) -> dict:
    return {
        "id": plan.id,
        "carrier": plan.carrier,
        "hub": plan.hub,
        "starts": list(plan.starts),
        "fleet": [{"type": f.type.name, "count": f.count, "start": f.start,
                   "first_departure": f.first_departure, "wave_gap": f.wave_gap, "waves": f.waves}
                  for f in plan.fleet],
        "jobs": [{"id": s.id, "location": s.location, "size": s.size, "window": _window(s.window),
                  "duration": s.duration,
                  "allowed_types": None if s.allowed_types is None else sorted(s.allowed_types)}
                 for s in plan.jobs],
        "parcels": {k: list(v) for k, v in plan.parcels.items()},
        "supply": dict(plan.supply),
    }


def plan_from_dict(d: dict) -> CarrierPlan:
    fleet = [FleetEntry(VEHICLE_TYPES[f["type"]], f["count"], f["start"], f["first_departure"],
                        f["wave_gap"], f["waves"]) for f in d["fleet"]]
    jobs = [Service(j["id"], j["location"], j["size"], _unwindow(j["window"]), j["duration"],
                    None if j["allowed_types"] is None else frozenset(j["allowed_types"]))
            for j in d["jobs"]]
    return CarrierPlan(d["id"], d["carrier"], tuple(d["starts"]), fleet, jobs,
                       {k: tuple(v) for k, v in d["parcels"].items()}, dict(d["supply"]), d["hub"])


def dump_json(obj: Any, path: Path) -> None:
    Path(path).write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def load_json(path: Path) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))
