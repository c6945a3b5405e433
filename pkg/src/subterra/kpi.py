"""Distance, load-factor, CO2 and cost indicators per run, and their means."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, fields
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .vrp import Tour

LIGHT_COMMERCIAL = "light_commercial"
HEAVY_DUTY = "heavy_duty"
SHUTTLE = "shuttle"
BIKE = "bike"
CLASSES = (LIGHT_COMMERCIAL, HEAVY_DUTY, SHUTTLE, BIKE)

VEHICLE_CLASS = {
    "CEP-Vehicle": LIGHT_COMMERCIAL,
    "Supply-Truck": HEAVY_DUTY,
    "Freight Shuttle": SHUTTLE,
    "CEP-Cargo-Bike": BIKE,
}


@dataclass(frozen=True)
class EmissionFactors:
    """Grams of CO2 per vehicle-kilometre by vehicle class."""

    light_commercial: float = 197.295
    heavy_duty: float = 789.505
    shuttle: float = 0.0
    bike: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"emission factor {f.name} must be non-negative")
        if self.shuttle != 0:
            raise ValueError("shuttles run electric; their factor must be 0")

    def of(self, cls: str) -> float:
        return getattr(self, cls)


def vehicle_class(vehicle_type: str) -> str:
    try:
        return VEHICLE_CLASS[vehicle_type]
    except KeyError:
        raise ValueError(f"vehicle type {vehicle_type!r} has no emission class") from None


def _meters_by(executions) -> dict[str, float]:
    out: dict[str, float] = {}
    for ex in executions:
        out[ex.vehicle_type] = out.get(ex.vehicle_type, 0.0) + ex.total_m
    return out


def emissions(executions, factors: EmissionFactors = EmissionFactors()) -> dict[str, float]:
    """Tonnes CO2 per class plus ``total``: km x g/km / 1e6.

    ``executions`` is any iterable of objects with ``vehicle_type`` and
    ``total_m``.
    """
    km = {c: 0.0 for c in CLASSES}
    for vtype, meters in sorted(_meters_by(executions).items()):
        km[vehicle_class(vtype)] += meters / 1000.0
    out = {c: km[c] * factors.of(c) / 1e6 for c in CLASSES}
    out["total"] = sum(out[c] for c in CLASSES)
    return out


def load_factor(tours: Iterable[Tour]) -> Optional[float]:
    """Mean of initial load / capacity over non-shuttle tours; None when there are none."""
    ratios = [t.initial_load / t.vehicle.type.capacity for t in tours
              if vehicle_class(t.vehicle.type.name) != SHUTTLE]
    if not ratios:
        return None
    return math.fsum(ratios) / len(ratios)


TOUR_LENGTH_COLUMNS = ["vehicle_type", "tour_id", "km", "load_factor"]


def tour_length_table(executions) -> list[tuple[str, str, float, float]]:
    """Rows (vehicle_type, tour_id, km, load_factor), ordered by type then tour."""
    rows = [(ex.vehicle_type, ex.tour_id, ex.total_m / 1000.0, ex.initial_load / ex.capacity)
            for ex in executions]
    return sorted(rows)


def write_tour_lengths(rows: Sequence[tuple], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TOUR_LENGTH_COLUMNS)
        for vtype, tid, km, lf in rows:
            w.writerow([vtype, tid, repr(km), repr(lf)])


@dataclass
class KpiReport:
    scenario: str
    total_distance_km: float
    ground_distance_km: float
    shuttle_distance_km: float
    bike_distance_km: float
    average_ground_vehicle_load: Optional[float]
    co2_t: dict[str, float]
    co2_total_t: float
    vehicles_used: dict[str, float]
    operating_cost: dict[str, float]
    replications: int = 1
    window_penalty: float = 0.0
    vehicles_used_display: dict[str, int] = field(default_factory=dict)

    @property
    def ground_co2_t(self) -> float:
        return self.co2_t[LIGHT_COMMERCIAL] + self.co2_t[HEAVY_DUTY]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping) -> "KpiReport":
        return cls(**data)


def build_report(scenario: str, executions, tours: Sequence[Tour],
                 cost_rows: Sequence[Mapping] = (), window_penalty: float = 0.0,
                 factors: EmissionFactors = EmissionFactors()) -> KpiReport:
    """Indicators for one run.

    Ground distance covers CEP vehicles and supply trucks; shuttle and bike
    distance are reported on their own lines and the total is their sum.
    """
    executions = list(executions)
    km = {c: 0.0 for c in CLASSES}
    for vtype, meters in sorted(_meters_by(executions).items()):
        km[vehicle_class(vtype)] += meters / 1000.0
    co2 = emissions(executions, factors)
    used: dict[str, float] = {}
    for ex in executions:
        used[ex.vehicle_type] = used.get(ex.vehicle_type, 0) + 1
    cost: dict[str, float] = {}
    for row in cost_rows:
        op = row["fixed"] + row["distance_cost"] + row["time_cost"]
        cost[row["vehicle_type"]] = cost.get(row["vehicle_type"], 0.0) + op
    ground = km[LIGHT_COMMERCIAL] + km[HEAVY_DUTY]
    return KpiReport(
        scenario=scenario,
        total_distance_km=ground + km[SHUTTLE] + km[BIKE],
        ground_distance_km=ground,
        shuttle_distance_km=km[SHUTTLE],
        bike_distance_km=km[BIKE],
        average_ground_vehicle_load=load_factor(tours),
        co2_t={c: co2[c] for c in CLASSES},
        co2_total_t=co2["total"],
        vehicles_used=dict(sorted(used.items())),
        operating_cost=dict(sorted(cost.items())),
        window_penalty=window_penalty,
        vehicles_used_display={k: int(v) for k, v in sorted(used.items())},
    )


def _half_up(x: float) -> int:
    return int(Decimal(repr(x)).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


def _mean_map(maps: Sequence[Mapping[str, float]]) -> dict[str, float]:
    keys = sorted(set().union(*maps))
    return {k: _mean([m.get(k, 0.0) for m in maps]) for k in keys}


def aggregate_replications(reports: Sequence[KpiReport]) -> KpiReport:
    """Field-wise arithmetic mean of replications of one scenario.

    Vehicle counts keep their exact mean; ``vehicles_used_display`` rounds
    half up.

    Raises:
        ValueError: no reports, or reports from different scenarios.
    """
    if not reports:
        raise ValueError("need at least one report")
    kinds = {r.scenario for r in reports}
    if len(kinds) != 1:
        raise ValueError(f"cannot average across scenarios {sorted(kinds)}")
    if len(reports) == 1:
        return reports[0]
    loads = [r.average_ground_vehicle_load for r in reports if r.average_ground_vehicle_load is not None]
    used = _mean_map([r.vehicles_used for r in reports])
    return KpiReport(
        scenario=reports[0].scenario,
        total_distance_km=_mean([r.total_distance_km for r in reports]),
        ground_distance_km=_mean([r.ground_distance_km for r in reports]),
        shuttle_distance_km=_mean([r.shuttle_distance_km for r in reports]),
        bike_distance_km=_mean([r.bike_distance_km for r in reports]),
        average_ground_vehicle_load=_mean(loads) if loads else None,
        co2_t=_mean_map([r.co2_t for r in reports]),
        co2_total_t=_mean([r.co2_total_t for r in reports]),
        vehicles_used=used,
        operating_cost=_mean_map([r.operating_cost for r in reports]),
        replications=sum(r.replications for r in reports),
        window_penalty=_mean([r.window_penalty for r in reports]),
        vehicles_used_display={k: _half_up(v) for k, v in used.items()},
    )


def _flat(report: KpiReport) -> dict[str, float | None]:
    out = {
        "total_distance_km": report.total_distance_km,
        "ground_distance_km": report.ground_distance_km,
        "shuttle_distance_km": report.shuttle_distance_km,
        "bike_distance_km": report.bike_distance_km,
        "average_ground_vehicle_load": report.average_ground_vehicle_load,
        "co2_total_t": report.co2_total_t,
    }
    for c in CLASSES:
        out[f"co2_{c}_t"] = report.co2_t.get(c, 0.0)
    for k, v in report.operating_cost.items():
        out[f"operating_cost:{k}"] = v
    for k, v in report.vehicles_used.items():
        out[f"vehicles_used:{k}"] = v
    return out


def compare(base: KpiReport, variant: KpiReport) -> dict[str, dict]:
    """Absolute and percent change of each indicator from ``base`` to ``variant``.

    A percent change against a zero base is None and flagged ``base_zero``.
    """
    b, v = _flat(base), _flat(variant)
    out = {}
    for key in sorted(set(b) | set(v)):
        x, y = b.get(key, 0.0), v.get(key, 0.0)
        if x is None or y is None:
            out[key] = {"base": x, "variant": y, "delta": None, "percent": None, "flag": "undefined"}
            continue
        row = {"base": x, "variant": y, "delta": y - x, "percent": None, "flag": None}
        if x == 0:
            row["flag"] = "base_zero"
        else:
            row["percent"] = 100.0 * (y - x) / x
        out[key] = row
    return out


COMPARISON_COLUMNS = ["scenario", "total_km", "ground_km", "shuttle_km", "bike_km",
                      "avg_ground_load", "co2_cep_t", "co2_truck_t", "co2_total_t"]


def comparison_row(report: KpiReport) -> list:
    load = report.average_ground_vehicle_load
    return [report.scenario, repr(report.total_distance_km), repr(report.ground_distance_km),
            repr(report.shuttle_distance_km), repr(report.bike_distance_km),
            "" if load is None else repr(load), repr(report.co2_t[LIGHT_COMMERCIAL]),
            repr(report.co2_t[HEAVY_DUTY]), repr(report.co2_total_t)]


def write_comparison(reports: Sequence[KpiReport], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COMPARISON_COLUMNS)
        for r in reports:
            w.writerow(comparison_row(r))


def save_report(report: KpiReport, path: Path) -> None:
    Path(path).write_text(json.dumps(report.to_dict(), indent=1, sort_keys=True) + "\n",
                          encoding="utf-8")


def load_report(path: Path) -> KpiReport:
    return KpiReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def format_comparison(base: KpiReport, variant: KpiReport) -> str:
    """Human-readable comparison, percentages to one decimal."""
    lines = [f"{variant.scenario} vs {base.scenario}"]
    for key, row in compare(base, variant).items():
        if row["flag"] == "undefined":
            lines.append(f"  {key}: undefined")
        elif row["flag"] == "base_zero":
            lines.append(f"  {key}: {row['base']:.3f} -> {row['variant']:.3f} (base is zero)")
        else:
            lines.append(f"  {key}: {row['base']:.3f} -> {row['variant']:.3f} ({row['percent']:+.1f}%)")
    return "\n".join(lines)
