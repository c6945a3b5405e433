import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import euclid_matrix, random_instance
from subterra.network import TravelMatrix
from subterra.vrp import (CARGO_BIKE, CEP_VEHICLE, FREIGHT_SHUTTLE, MAX_JOBS, SUPPLY_TRUCK, Activity,
                          Service, Shipment, Solution, SolverParams, TimeWindow, Tour, Vehicle,
                          VehicleType, brute_force, check_feasibility, route_cost, solve, timeline)
from subterra.vrp.solver import _Instance


def one_tour(vtype, meters, seconds):
    nodes = ("A", "B")
    m = TravelMatrix(nodes, np.array([[0, seconds / 2], [seconds / 2, 0]]),
                     np.array([[0, meters / 2], [meters / 2, 0]]))
    veh = Vehicle("v", vtype, "A")
    acts = (Activity("start", None, "A", 0, 0, 0, 1),
            Activity("service", "s", "B", seconds / 2, seconds / 2, seconds / 2, 0),
            Activity("end", None, "A", seconds, seconds, seconds, 0))
    return Solution([Tour("t", veh, acts)]), m


def test_table_rates():
    assert (CEP_VEHICLE.cost_per_meter, CEP_VEHICLE.cost_per_second, CEP_VEHICLE.fixed_cost,
            CEP_VEHICLE.capacity) == (0.00037, 0.0063, 48.8, 230)
    assert (CARGO_BIKE.cost_per_meter, CARGO_BIKE.cost_per_second, CARGO_BIKE.fixed_cost,
            CARGO_BIKE.capacity) == (0.000103, 0.0033, 3.27, 23)
    assert (SUPPLY_TRUCK.cost_per_meter, SUPPLY_TRUCK.cost_per_second, SUPPLY_TRUCK.fixed_cost,
            SUPPLY_TRUCK.capacity) == (0.00086, 0.008, 140.0, 800)
    assert (FREIGHT_SHUTTLE.cost_per_meter, FREIGHT_SHUTTLE.cost_per_second, FREIGHT_SHUTTLE.fixed_cost,
            FREIGHT_SHUTTLE.capacity) == (0.00035, 0.002, 30.0, 140)


def test_type_validation():
    with pytest.raises(ValueError):
        VehicleType("x", -1, 0, 0, 1)
    with pytest.raises(ValueError):
        TimeWindow(10, 5)
    with pytest.raises(ValueError):
        Shipment("s", "A", "A", 1)
    with pytest.raises(ValueError):
        Service("s", "A", 0)


def test_route_cost_examples():
    sol, m = one_tour(CEP_VEHICLE, 10_000, 3_600)
    total, rows = route_cost(sol, m)
    assert total == pytest.approx(75.18, rel=1e-12)
    assert rows[0]["fixed"] == 48.8
    sol, m = one_tour(FREIGHT_SHUTTLE, 200_000, 7_200)
    assert route_cost(sol, m)[0] == pytest.approx(114.4, rel=1e-12)
    assert route_cost(Solution(), m)[0] == 0


def test_route_cost_missing_location():
    sol, _ = one_tour(CEP_VEHICLE, 10, 10)
    m = TravelMatrix(("A",), np.zeros((1, 1)), np.zeros((1, 1)))
    with pytest.raises(KeyError):
        route_cost(sol, m)


def test_timeline_waits_and_shift():
    # one windowed stop 100 s away, window opens at 1000
    t0, arr, begin, end, late = timeline(0.0, [100, 100], [1000], [2000], [0])
    assert t0 == 900 and arr == [1000] and end == 1100 and late == 0
    _, _, begin, _, late = timeline(0.0, [100, 100], [-math.inf], [50], [0])
    assert late == 50


def test_same_node_service_costs_fixed_only():
    m = TravelMatrix(("A",), np.zeros((1, 1)), np.zeros((1, 1)))
    sol = solve([Service("s", "A", 5)], [Vehicle("v", CEP_VEHICLE, "A")], m, SolverParams(iterations=5))
    assert len(sol.tours) == 1
    assert sol.total_cost == pytest.approx(CEP_VEHICLE.fixed_cost)
    assert [a.kind for a in sol.tours[0].activities] == ["start", "service", "end"]


def test_capacity_forces_split():
    m = euclid_matrix([(0, 0), (1000, 0)])
    jobs = [Service(f"s{i}", "n1", 1) for i in range(300)]
    fleet = [Vehicle(f"v{i}", CEP_VEHICLE, "n0") for i in range(3)]
    sol = solve(jobs, fleet, m, SolverParams(iterations=5))
    assert len(sol.tours) >= 2 and not sol.unassigned
    assert not check_feasibility(sol, m)


def test_oversized_job_reported():
    m = euclid_matrix([(0, 0), (1000, 0)])
    sol = solve([Service("big", "n1", 231)], [Vehicle("v", CEP_VEHICLE, "n0")], m, SolverParams(iterations=3))
    assert "big" in sol.unassigned and sol.unassigned["big"]


def test_brute_force_trivia():
    m = euclid_matrix([(0, 0), (1000, 0)])
    assert brute_force([], [Vehicle("v", CEP_VEHICLE, "n0")], m).total_cost == 0
    jobs, fleet = [Service("s", "n1", 3)], [Vehicle("v", CEP_VEHICLE, "n0")]
    b = brute_force(jobs, fleet, m)
    s = solve(jobs, fleet, m, SolverParams(iterations=3))
    assert b.total_cost == pytest.approx(s.total_cost)
    assert [a.job_id for a in b.tours[0].activities] == [a.job_id for a in s.tours[0].activities]


def test_brute_force_refuses_large():
    m = euclid_matrix([(0, 0), (1000, 0)])
    jobs = [Service(f"s{i}", "n1", 1) for i in range(MAX_JOBS + 1)]
    with pytest.raises(ValueError):
        brute_force(jobs, [Vehicle("v", CEP_VEHICLE, "n0")], m)


def test_brute_force_line_sweep():
    # depot at the origin, five stops on a ray: the optimum runs out and back in one sweep
    m = euclid_matrix([(0, 0)] + [(1000 * k, 0) for k in (3, 1, 5, 2, 4)])
    jobs = [Service(f"s{k}", f"n{i + 1}", 1) for i, k in enumerate((3, 1, 5, 2, 4))]
    sol = brute_force(jobs, [Vehicle("v", CEP_VEHICLE, "n0")], m)
    order = [a.job_id for a in sol.tours[0].activities[1:-1]]
    assert order in (["s1", "s2", "s3", "s4", "s5"], ["s5", "s4", "s3", "s2", "s1"])


def test_feasibility_examples():
    veh = Vehicle("v", CEP_VEHICLE, "A")
    acts = (Activity("start", None, "A", 0, 0, 0, 231),
            Activity("service", "s", "B", 10, 10, 10, 0),
            Activity("end", None, "A", 20, 20, 20, 0))
    v = check_feasibility(Solution([Tour("t", veh, acts)]))
    assert [(x.kind, x.amount) for x in v] == [("capacity", 1)]

    w = TimeWindow(7 * 3600, 7.75 * 3600)
    acts = (Activity("start", None, "A", 0, 0, 0, 1),
            Activity("service", "s", "B", 28200, 28200, 28200, 0, w),
            Activity("end", None, "A", 28300, 28300, 28300, 0))
    v = check_feasibility(Solution([Tour("t", veh, acts)]))
    assert [(x.kind, x.amount) for x in v] == [("window_late", 300)]


@pytest.mark.parametrize("seed", range(12))
def test_solver_contract(seed):
    jobs, fleet, m = random_instance(seed)
    params = SolverParams(seed=seed, iterations=60)
    sol = solve(jobs, fleet, m, params)
    hard = [v for v in check_feasibility(sol, m) if v.kind in ("capacity", "precedence", "timing")]
    assert not hard
    assert route_cost(sol, m, params)[0] == pytest.approx(sol.total_cost, rel=1e-9)
    served = [j for t in sol.tours for j in t.job_ids()]
    assert sorted(served + list(sol.unassigned)) == sorted(j.id for j in jobs)
    assert len(served) == len(set(served))
    b = brute_force(jobs, fleet, m, params)
    assert sol.total_cost >= b.total_cost - 1e-6 * max(1.0, b.total_cost)


def test_deterministic():
    jobs, fleet, m = random_instance(3)
    a = solve(jobs, fleet, m, SolverParams(seed=5, iterations=40))
    b = solve(jobs, fleet, m, SolverParams(seed=5, iterations=40))
    assert a == b


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 30), st.integers(0, 30))
def test_more_iterations_never_worse(seed, n, k):
    jobs, fleet, m = random_instance(seed)
    a = solve(jobs, fleet, m, SolverParams(seed=seed, iterations=n))
    b = solve(jobs, fleet, m, SolverParams(seed=seed, iterations=n + k))
    assert b.total_cost <= a.total_cost + 1e-9


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_splice_matches_replay(seed):
    """Insertion pricing of an unchanged tail equals a full forward pass."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 8))
    m = euclid_matrix(rng.uniform(0, 10_000, (2 * n + 1, 2)))
    jobs = []
    for j in range(n):
        win = None
        if rng.random() < 0.6:
            e = float(rng.uniform(0, 5000))
            win = TimeWindow(e, e + float(rng.uniform(0, 2000)))
        if rng.random() < 0.5:
            jobs.append(Shipment(f"j{j}", m.nodes[1 + 2 * j], m.nodes[2 + 2 * j], 1, win,
                                 pickup_duration=float(rng.integers(0, 300))))
        else:
            jobs.append(Service(f"j{j}", m.nodes[1 + 2 * j], 1, win, duration=float(rng.integers(0, 300))))
    inst = _Instance(jobs, [Vehicle("v", CEP_VEHICLE, "n0", float(rng.uniform(0, 3000)))], m, SolverParams())
    codes = [c for j in range(n) for c in inst.codes(j)]
    rng.shuffle(codes)
    k = int(rng.integers(len(codes)))
    x, rest = codes[k], codes[:k] + codes[k + 1:]
    pre, finish = inst.splice(0, rest)
    for p in range(len(rest) + 1):
        full = inst.close(0, inst.advance(0, inst.origin(0), rest[:p] + [x] + rest[p:]))
        fast = finish(inst.advance(0, pre[p], (x,)), p)
        assert fast == pytest.approx(full, rel=1e-9, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_load_stays_in_bounds(seed):
    jobs, fleet, m = random_instance(seed, max_jobs=10)
    sol = solve(jobs, fleet, m, SolverParams(seed=1, iterations=10))
    for t in sol.tours:
        for a in t.activities:
            assert 0 <= a.load <= t.vehicle.type.capacity
