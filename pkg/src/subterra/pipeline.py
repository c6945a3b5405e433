"""End-to-end pipeline: demand, plans, routing, execution, shuttle stage, KPIs.

Every stage reads its inputs from and writes its outputs to
``<out>/<scenario>/<replication>/`` so any stage can be rerun on its own.
Artifacts carry no timestamps; identical configs give identical files.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import time
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from .config import RunConfig
from .demand import (Carrier, DemandConfig, DemandSet, Facility, Hub, Zone, generate_demand,
                     load_demand, save_demand, validate_placement)
from .kpi import (KpiReport, aggregate_replications, build_report, save_report, load_report,
                  tour_length_table, write_comparison, write_tour_lengths)
from .network import FreeFlowTable, Network, load_network, travel_time_matrix
from .scenario import CarrierPlan, PlanParams, ScenarioKind, allocate, build_carrier_plans
from .shuttle import (TunnelLayout, derive_shipments, partition_carriers, plan_and_execute,
                      write_shipments, write_violations)
from .sim import (LinkLoads, TourExecution, execute, link_loads, read_departures, read_link_loads,
                  write_departures, write_executions, write_link_loads)
from .store import dump_json, load_json, plan_from_dict, plan_to_dict, solution_from_dict, solution_to_dict
from .toycity import ToyCityParams, build_toy_city
from .vrp import SUPPLY_TRUCK, Solution, SolverParams, route_cost, solve

log = logging.getLogger("subterra")

STAGES = ("generate", "plan", "simulate", "shuttle", "report")


class StageError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"stage {stage} failed: {message}")
        self.stage = stage


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from the string forms of ``parts``."""
    digest = hashlib.blake2b(":".join(str(p) for p in parts).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1


@dataclass
class World:
    network: Network
    demand_config: Optional[DemandConfig]
    fixed_demand: Optional[DemandSet] = None
    table: FreeFlowTable = field(init=False)

    def __post_init__(self):
        self.table = FreeFlowTable(self.network)


def _world_from_json(data: dict) -> DemandConfig:
    return DemandConfig(
        total_parcels=int(data["total_parcels"]),
        zones=[Zone(**z) for z in data["zones"]],
        carriers=[Carrier(**c) for c in data["carriers"]],
        hubs=[Hub(**h) for h in data.get("hubs", [])],
        facilities=[Facility(**f) for f in data.get("facilities", [])],
        portals=list(data.get("portals", [])),
        parcel_size=int(data.get("parcel_size", 1)),
    )


def load_world(cfg: RunConfig) -> World:
    cfg.check_paths()
    if cfg.network is not None:
        net = load_network(cfg.network.nodes, cfg.network.links, cfg.network.profiles)
        demand_cfg = _world_from_json(load_json(Path(cfg.network.world)))
    else:
        params = ToyCityParams(**cfg.city.model_dump(), tunnel_speed=cfg.shuttle.tunnel_speed)
        city = build_toy_city(params)
        net, demand_cfg = city.network, city.demand
    fixed = load_demand(cfg.demand) if cfg.demand else None
    return World(net, demand_cfg, fixed)


def plan_params(cfg: RunConfig) -> PlanParams:
    s = cfg.scenario
    return PlanParams(bike_radius_m=s.bike_radius_m, stop_parcels=s.stop_parcels,
                      fleet_slack=s.fleet_slack, shu_capacity=s.shu_capacity,
                      hub_capacity=s.hub_capacity)


def solver_params(cfg: RunConfig, seed: int, shuttle: bool = False) -> SolverParams:
    s = cfg.solver
    return SolverParams(seed, s.shuttle_iterations if shuttle else s.iterations, s.ruin_fraction,
                        s.window_penalty, s.unassigned_penalty)


def run_dir(cfg: RunConfig, kind: ScenarioKind, rep: int) -> Path:
    return Path(cfg.out) / kind.slug / str(rep)


# -- plan solving -------------------------------------------------------------

def plan_groups(plan: CarrierPlan):
    """Split a plan into independent routing problems: deliveries and truck supply.

    Supply runs are solved on their own so that identical supply sets give
    identical truck tours whatever else the carrier delivers.
    """
    vehicles = plan.vehicles()
    truck_only = frozenset({SUPPLY_TRUCK.name})
    supply = [j for j in plan.jobs if j.allowed_types == truck_only]
    delivery = [j for j in plan.jobs if j.allowed_types != truck_only]
    out = []
    if delivery:
        out.append(("delivery", delivery, [v for v in vehicles if v.type.name != SUPPLY_TRUCK.name]))
    if supply:
        out.append(("supply", supply, [v for v in vehicles if v.type.name == SUPPLY_TRUCK.name]))
    return out


def group_matrices(network: Network, table: FreeFlowTable, jobs, fleet):
    locs = sorted({v.start for v in fleet} | {j.location for j in jobs})
    return {m: travel_time_matrix(network, locs, m, table) for m in sorted({v.type.mode for v in fleet})}


def solve_plan(plan: CarrierPlan, world: World, cfg: RunConfig, rep: int) -> dict[str, Solution]:
    out = {}
    for name, jobs, fleet in plan_groups(plan):
        mats = group_matrices(world.network, world.table, jobs, fleet)
        params = solver_params(cfg, derive_seed(cfg.seed, rep, plan.id, name))
        out[name] = solve(jobs, fleet, mats, params)
    return out


# -- stage helpers ----------------------------------------------------------------

def _log(stage: str, kind: ScenarioKind, rep: int, started: float, **numbers) -> None:
    extra = " ".join(f"{k}={v}" for k, v in numbers.items())
    log.info("subterra stage=%s scenario=%s rep=%d wall_s=%.2f %s", stage, kind.value, rep,
             time.perf_counter() - started, extra)


def _stage(name: str):
    def wrap(fn: Callable):
        def inner(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except StageError:
                raise
            except Exception as exc:  # noqa: BLE001 - surfaced with the stage name
                raise StageError(name, f"{type(exc).__name__}: {exc}") from exc
        inner.__name__ = fn.__name__
        inner.__doc__ = fn.__doc__
        return inner
    return wrap


def _read_solutions(d: Path) -> dict[str, dict[str, Solution]]:
    out = {}
    for path in sorted((d / "solutions").glob("*.json")):
        data = load_json(path)
        out[data["plan_id"]] = {k: solution_from_dict(v) for k, v in sorted(data["groups"].items())}
    return out


def _read_plans(d: Path) -> list[CarrierPlan]:
    return [plan_from_dict(p) for p in load_json(d / "plans.json")]


def _all_tours(solutions: dict[str, dict[str, Solution]]):
    return [t for pid in sorted(solutions) for g in solutions[pid].values() for t in g.tours]


def _cost_rows_csv(rows, path: Path) -> None:
    cols = ["tour_id", "vehicle_type", "meters", "seconds", "fixed", "distance_cost", "time_cost",
            "penalty", "total"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([r[c] if isinstance(r[c], str) else repr(float(r[c])) for c in cols])


def _read_cost_rows(path: Path) -> list[dict]:
    if not path.exists():
        return []
    with open(path, newline="", encoding="utf-8") as fh:
        return [{k: (v if k in ("tour_id", "vehicle_type") else float(v)) for k, v in r.items()}
                for r in csv.DictReader(fh)]


# -- stages -----------------------------------------------------------------------

@_stage("generate")
def stage_generate(cfg: RunConfig, world: World, kind: ScenarioKind, rep: int) -> DemandSet:
    """Draw (or copy) the replication's demand; identical across scenarios."""
    t0 = time.perf_counter()
    d = run_dir(cfg, kind, rep)
    d.mkdir(parents=True, exist_ok=True)
    if world.fixed_demand is not None:
        demand = world.fixed_demand
    else:
        demand = generate_demand(world.demand_config, derive_seed(cfg.seed, "demand", rep))
    validate_placement(demand, world.network)
    save_demand(demand, d / "demand.json")
    _log("generate", kind, rep, t0, parcels=demand.total_parcels, jobs=len(demand.parcel_jobs),
         supply_jobs=len(demand.supply_jobs))
    return demand


@_stage("plan")
def stage_plan(cfg: RunConfig, world: World, kind: ScenarioKind, rep: int):
    """Allocate to hubs, build carrier plans and route every plan."""
    t0 = time.perf_counter()
    d = run_dir(cfg, kind, rep)
    demand = load_demand(d / "demand.json")
    pp = plan_params(cfg)
    alloc = allocate(kind, demand, world.network, world.table, pp)
    plans = build_carrier_plans(kind, demand, alloc, world.network, pp, world.table)
    dump_json([plan_to_dict(p) for p in plans], d / "plans.json")
    dump_json(dict(sorted(alloc.items())), d / "allocation.json")
    sol_dir = d / "solutions"
    sol_dir.mkdir(exist_ok=True)
    for old in sol_dir.glob("*.json"):
        old.unlink()
    solutions = {}
    rows = []
    for plan in plans:
        groups = solve_plan(plan, world, cfg, rep)
        solutions[plan.id] = groups
        dump_json({"plan_id": plan.id,
                   "groups": {k: solution_to_dict(v) for k, v in groups.items()}},
                  sol_dir / f"{plan.id}.json")
        for name, jobs, fleet in plan_groups(plan):
            mats = group_matrices(world.network, world.table, jobs, fleet)
            _, r = route_cost(groups[name], mats, solver_params(cfg, 0))
            rows.extend(r)
    _cost_rows_csv(rows, d / "plan_costs.csv")
    tours = _all_tours(solutions)
    unassigned = sum(len(g.unassigned) for s in solutions.values() for g in s.values())
    _log("plan", kind, rep, t0, plans=len(plans), allocated=len(alloc), tours=len(tours),
         unassigned=unassigned)
    return plans, solutions


def _origins(plans: list[CarrierPlan], solutions, demand: DemandSet, hub_nodes: set[str]):
    """Per hub tour: parcels on board by originating depot node."""
    carrier_of = {j.id: j.carrier for j in demand.parcel_jobs}
    depot = {c.id: c.depot for c in demand.carriers}
    by_plan = {p.id: p for p in plans}
    out = {}
    for pid in sorted(solutions):
        plan = by_plan[pid]
        for group in solutions[pid].values():
            for t in group.tours:
                if t.vehicle.start not in hub_nodes:
                    continue
                counts: Counter = Counter()
                for a in t.activities:
                    for parcel in plan.parcels.get(a.job_id, ()) if a.job_id else ():
                        counts[depot[carrier_of[parcel]]] += 1
                out[t.id] = dict(sorted(counts.items()))
    return out


@_stage("simulate")
def stage_simulate(cfg: RunConfig, world: World, kind: ScenarioKind, rep: int):
    """Replay every tour on the time-dependent network."""
    t0 = time.perf_counter()
    d = run_dir(cfg, kind, rep)
    demand = load_demand(d / "demand.json")
    plans = _read_plans(d)
    solutions = _read_solutions(d)
    hubs = {h.id: h.node for h in demand.hubs}
    executions, loads, deps = execute(_all_tours(solutions), world.network, hubs)
    write_executions(executions, d / "executions.csv")
    write_link_loads(loads, d / "link_loads.csv")
    write_departures(deps, d / "departures.csv")
    origins = _origins(plans, solutions, demand, set(hubs.values()))
    with open(d / "departure_origins.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tour_id", "depot_node", "parcels"])
        for tid in sorted(origins):
            for node, n in origins[tid].items():
                w.writerow([tid, node, n])
    km = sum(e.total_m for e in executions) / 1000.0
    _log("simulate", kind, rep, t0, tours=len(executions), km=f"{km:.1f}", departures=len(deps))
    return executions, loads, deps


@_stage("shuttle")
def stage_shuttle(cfg: RunConfig, world: World, kind: ScenarioKind, rep: int):
    """Derive, partition, route and execute shuttle shipments (not in the basecase)."""
    t0 = time.perf_counter()
    d = run_dir(cfg, kind, rep)
    if kind is ScenarioKind.BC:
        return None
    demand = load_demand(d / "demand.json")
    deps = read_departures(d / "departures.csv")
    origins: dict[str, dict[str, int]] = {}
    with open(d / "departure_origins.csv", newline="", encoding="utf-8") as fh:
        for r in csv.DictReader(fh):
            origins.setdefault(r["tour_id"], {})[r["depot_node"]] = int(r["parcels"])
    layout = TunnelLayout.from_demand(demand, world.network)
    shipments = derive_shipments(deps, demand.supply_jobs, kind, layout, origins)
    parts = partition_carriers(shipments, cfg.shuttle.carriers)
    params = solver_params(cfg, derive_seed(cfg.seed, rep, kind.value, "shuttle"), shuttle=True)
    solutions, executions, violations = plan_and_execute(parts, world.network, params, world.table)
    write_shipments(shipments, d / "shuttle_shipments.csv")
    write_violations(violations, d / "shuttle_violations.csv")
    dump_json([solution_to_dict(s) for s in solutions], d / "shuttle_solutions.json")
    write_executions(executions, d / "shuttle_executions.csv")
    write_link_loads(link_loads(executions), d / "shuttle_link_loads.csv")
    rows = []
    for sol, part in zip(solutions, parts):
        if not sol.tours:
            continue
        locs = sorted({t.vehicle.start for t in sol.tours} | {s.pickup for s in part}
                      | {s.delivery for s in part})
        mat = travel_time_matrix(world.network, locs, "tunnel", world.table)
        rows.extend(route_cost(sol, mat, params)[1])
    _cost_rows_csv(rows, d / "shuttle_costs.csv")
    km = sum(e.total_m for e in executions) / 1000.0
    _log("shuttle", kind, rep, t0, shipments=len(shipments), tours=len(executions),
         km=f"{km:.1f}", violations=len(violations))
    return shipments, parts, solutions, executions, violations


@dataclass(frozen=True)
class _ExecRow:
    tour_id: str
    vehicle_type: str
    total_m: float
    initial_load: int
    capacity: int


def _exec_rows(path: Path, tours: dict) -> list[_ExecRow]:
    if not path.exists():
        return []
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for r in csv.DictReader(fh):
            t = tours[r["tour_id"]]
            rows.append(_ExecRow(r["tour_id"], r["vehicle_type"], float(r["total_m"]),
                                 t.initial_load, t.vehicle.type.capacity))
    return rows


@_stage("report")
def stage_report(cfg: RunConfig, world: World, kind: ScenarioKind, rep: int) -> KpiReport:
    """Compute the run's indicators from the persisted executions and solutions."""
    t0 = time.perf_counter()
    d = run_dir(cfg, kind, rep)
    tours = _all_tours(_read_solutions(d))
    if (d / "shuttle_solutions.json").exists() and kind is not ScenarioKind.BC:
        for s in load_json(d / "shuttle_solutions.json"):
            tours.extend(solution_from_dict(s).tours)
    by_id = {t.id: t for t in tours}
    rows = _exec_rows(d / "executions.csv", by_id)
    if kind is not ScenarioKind.BC:
        rows += _exec_rows(d / "shuttle_executions.csv", by_id)
    costs = _read_cost_rows(d / "plan_costs.csv")
    if kind is not ScenarioKind.BC:
        costs += _read_cost_rows(d / "shuttle_costs.csv")
    penalty = sum(r["penalty"] for r in costs)
    report = build_report(kind.value, rows, tours, costs, penalty)
    save_report(report, d / "kpi_report.json")
    write_tour_lengths(tour_length_table(rows), d / "tour_lengths.csv")
    _log("report", kind, rep, t0, tours=len(rows), km=f"{report.total_distance_km:.1f}",
         co2_t=f"{report.co2_total_t:.4f}")
    return report


def run_replication(cfg: RunConfig, world: World, kind: ScenarioKind, rep: int) -> KpiReport:
    stage_generate(cfg, world, kind, rep)
    stage_plan(cfg, world, kind, rep)
    stage_simulate(cfg, world, kind, rep)
    stage_shuttle(cfg, world, kind, rep)
    return stage_report(cfg, world, kind, rep)


@_stage("aggregate")
def write_means(cfg: RunConfig, kinds) -> list[KpiReport]:
    """Replication means per scenario plus the cross-scenario comparison table."""
    means = []
    for kind in kinds:
        reports = [load_report(run_dir(cfg, kind, r) / "kpi_report.json") for r in range(cfg.replications)]
        mean = aggregate_replications(reports)
        save_report(mean, Path(cfg.out) / kind.slug / "kpi_mean.json")
        means.append(mean)
    write_comparison(means, Path(cfg.out) / "comparison.csv")
    return means


def run(cfg: RunConfig, world: World | None = None) -> dict[ScenarioKind, KpiReport]:
    """Every stage, scenario and replication of ``cfg``; returns scenario means."""
    world = world or load_world(cfg)
    Path(cfg.out).mkdir(parents=True, exist_ok=True)
    # the output path is left out so that trees written to different places compare equal
    dump_json(json.loads(cfg.model_dump_json(exclude={"out"})), Path(cfg.out) / "config.json")
    for kind in cfg.scenarios:
        for rep in range(cfg.replications):
            run_replication(cfg, world, kind, rep)
    means = write_means(cfg, cfg.scenarios)
    return dict(zip(cfg.scenarios, means))


def load_link_loads(cfg: RunConfig, kind: ScenarioKind, rep: int) -> LinkLoads:
    return read_link_loads(run_dir(cfg, kind, rep) / "link_loads.csv")


__all__ = [
    "STAGES", "StageError", "World", "derive_seed", "load_world", "plan_groups", "group_matrices",
    "run", "run_dir", "run_replication", "solve_plan", "stage_generate", "stage_plan",
    "stage_report", "stage_shuttle", "stage_simulate", "write_means", "load_link_loads",
    "TourExecution",
]
