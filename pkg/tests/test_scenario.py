import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import line_network, parcels, small_demand
from subterra.demand import Carrier, Facility, Hub, build_supply_jobs
from subterra.network import Link, Network, Node
from subterra.scenario import (CarrierPlan, PlanParams, ScenarioKind, allocate, allocate_shu,
                               allocate_whu, build_carrier_plans)
from subterra.vrp import CARGO_BIKE, CEP_VEHICLE, SUPPLY_TRUCK


def test_parse_and_slug():
    assert ScenarioKind.parse("whu-b") is ScenarioKind.WHU_B
    assert ScenarioKind.parse("BC").slug == "bc"
    assert ScenarioKind.WHU_B.slug == "whu-b"
    with pytest.raises(ValueError):
        ScenarioKind.parse("tram")


def test_shu_caps_each_carrier_hub_pair(line):
    jobs = parcels("c1", ["x1"] * 1000)
    d = small_demand(jobs)
    alloc = allocate_shu(d, line)
    assert len(alloc) == 800 and set(alloc.values()) == {"H1"}


def test_shu_ignores_unconnected(line):
    d = small_demand(parcels("c1", ["x1"] * 10), carriers=[Carrier("c1", "D", 1.0, False)])
    assert allocate_shu(d, line) == {}


def test_equidistant_hubs_lower_id_wins():
    net = line_network(3)
    d = small_demand(parcels("c1", ["x1"] * 5), hubs=[Hub("H2", "x2"), Hub("H1", "x0")])
    alloc = allocate_whu(d, net)
    assert set(alloc.values()) == {"H1"}


def test_whu_hub_capacity(line):
    near = parcels("c1", ["x1"] * 4500)
    d = small_demand(near)
    alloc = allocate_whu(d, line)
    assert len(alloc) == 4000


def test_whu_all_fit(line):
    d = small_demand(parcels("c1", ["x2"] * 3000))
    assert len(allocate_whu(d, line)) == 3000


def test_whu_allocation_ignores_carrier_labels(line):
    carriers = [Carrier("a", "D", 0.5, True), Carrier("b", "D", 0.5, True)]
    jobs = parcels("a", ["x1", "x3", "x5"] * 700) + parcels("b", ["x2", "x4", "x9"] * 700, start=5000)
    d = small_demand(jobs, carriers=carriers)
    base = allocate_whu(d, line)
    swapped = [type(j)(j.id, j.customer, j.size, {"a": "b", "b": "a"}[j.carrier]) for j in jobs]
    other = allocate_whu(small_demand(swapped, carriers=carriers), line)
    by_id = {j.id: j.customer for j in jobs}
    assert sorted(by_id[k] for k in base) == sorted(by_id[k] for k in other)


def seven_carriers(net):
    carriers = [Carrier(f"c{i}", "D", 1 / 7, i <= 5) for i in range(1, 8)]
    jobs = []
    for i, c in enumerate(carriers):
        jobs += parcels(c.id, [f"x{(i + k) % 10}" for k in range(40)])
    hubs = [Hub("H1", "x0"), Hub("H2", "x8")]
    d = small_demand(jobs, carriers=carriers, hubs=hubs,
                     facilities=[Facility("R", "x9", "retail_center", 1, False, "c1"),
                                 Facility("I", "P", "industry", 1, True, "c2")])
    d.supply_jobs = build_supply_jobs(d)
    return d


def test_basecase_plans(line):
    d = seven_carriers(line)
    plans = build_carrier_plans(ScenarioKind.BC, d, {}, line)
    assert len(plans) == 7
    assert all(p.hub is None and p.starts == ("D",) for p in plans)
    supply_ids = {s.id for s in d.supply_jobs}
    truck_jobs = {j.id for p in plans for j in p.jobs
                  if j.allowed_types == frozenset({SUPPLY_TRUCK.name})}
    assert truck_jobs == supply_ids


def test_whu_plans(line):
    d = seven_carriers(line)
    alloc = allocate(ScenarioKind.WHU, d, line)
    plans = build_carrier_plans(ScenarioKind.WHU, d, alloc, line)
    hub_plans = [p for p in plans if p.hub]
    assert {p.id for p in hub_plans} == {"white-label@H1", "white-label@H2"}
    for p in plans:
        for j in p.jobs:
            assert not j.id.startswith("s-H"), "hub supply must not be trucked"
    trucked = {j.id for p in plans for j in p.jobs if j.id.startswith("s-")}
    assert trucked == {"s-R-0"}


def test_whu_b_same_jobs_bigger_fleet(line):
    d = seven_carriers(line)
    alloc = allocate(ScenarioKind.WHU_B, d, line)
    whu = build_carrier_plans(ScenarioKind.WHU, d, alloc, line)
    whub = build_carrier_plans(ScenarioKind.WHU_B, d, alloc, line)
    key = lambda plans: sorted((p.id, j.id, j.location, j.size) for p in plans for j in p.jobs)
    assert key(whu) == key(whub)
    for p in whub:
        if p.hub:
            types = {f.type.name for f in p.fleet}
            assert {CEP_VEHICLE.name, CARGO_BIKE.name} <= types


def test_rejects_bad_allocations(line):
    d = seven_carriers(line)
    with pytest.raises(ValueError):
        build_carrier_plans(ScenarioKind.BC, d, {"c1-00000": "H1"}, line)
    with pytest.raises(ValueError):
        build_carrier_plans(ScenarioKind.WHU, d, {"c1-00000": "nope"}, line)
    with pytest.raises(ValueError):
        build_carrier_plans(ScenarioKind.WHU, d, {"c7-00000": "H1"}, line)


def test_stop_chunking(line):
    d = small_demand(parcels("c1", ["x5"] * 50), carriers=[Carrier("c1", "D", 1.0, False)])
    [plan] = build_carrier_plans(ScenarioKind.BC, d, {}, line, PlanParams(stop_parcels=23))
    assert [j.size for j in plan.jobs] == [23, 23, 4]
    assert plan.parcel_count == 50


def test_vehicle_waves():
    from subterra.scenario import FleetEntry
    plan = CarrierPlan("p", "c", ("D",), [FleetEntry(CEP_VEHICLE, 5, "D", 100.0, 10.0, 2)], [])
    assert [v.earliest_start for v in plan.vehicles()] == [100, 110, 100, 110, 100]
    assert plan.vehicles()[0].id == "p:cep000"


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(0, 9), min_size=1, max_size=300), st.integers(1, 200))
def test_shu_caps_hold(nodes, cap):
    net = line_network()
    d = small_demand(parcels("c1", [f"x{i}" for i in nodes]),
                     hubs=[Hub("H1", "x0"), Hub("H2", "P")])
    alloc = allocate_shu(d, net, capacity=cap)
    for h in ("H1", "H2"):
        assert sum(1 for v in alloc.values() if v == h) <= cap


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(0, 9), min_size=1, max_size=200), st.sampled_from(list(ScenarioKind)))
def test_plans_conserve_parcels(nodes, kind):
    net = line_network()
    carriers = [Carrier("c1", "D", 0.5, True), Carrier("c2", "D", 0.5, False)]
    jobs = parcels("c1", [f"x{i}" for i in nodes]) + parcels("c2", [f"x{i}" for i in nodes], 1000)
    d = small_demand(jobs, carriers=carriers)
    alloc = allocate(kind, d, net, params=PlanParams(shu_capacity=50, hub_capacity=70))
    plans = build_carrier_plans(kind, d, alloc, net)
    members = [p for plan in plans for ids in plan.parcels.values() for p in ids]
    assert sorted(members) == sorted(j.id for j in jobs)
    assert sum(p.parcel_count for p in plans) == len(jobs)
