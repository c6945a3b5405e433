from dataclasses import replace
from types import SimpleNamespace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subterra.kpi import (COMPARISON_COLUMNS, EmissionFactors, KpiReport, aggregate_replications,
                          build_report, compare, emissions, format_comparison, load_factor, load_report,
                          save_report, tour_length_table, write_comparison, write_tour_lengths)
from subterra.vrp import CARGO_BIKE, CEP_VEHICLE, FREIGHT_SHUTTLE, SUPPLY_TRUCK, Activity, Tour, Vehicle


def ex(vtype, meters, tid="t", load=0, cap=1):
    return SimpleNamespace(vehicle_type=vtype, total_m=meters, tour_id=tid, initial_load=load, capacity=cap)


def tour(vtype, load, tid="t"):
    acts = (Activity("start", None, "A", 0, 0, 0, load), Activity("end", None, "A", 1, 1, 1, 0))
    return Tour(tid, Vehicle("v", vtype, "A"), acts)


def test_emission_examples():
    assert emissions([ex("CEP-Vehicle", 1_000_000)])["light_commercial"] == pytest.approx(0.197295, rel=1e-9)
    assert emissions([ex("Supply-Truck", 1_000_000)])["heavy_duty"] == pytest.approx(0.789505, rel=1e-9)
    zero = emissions([ex("Freight Shuttle", 5e6), ex("CEP-Cargo-Bike", 3e6)])
    assert zero["total"] == 0


def test_shuttle_factor_locked():
    with pytest.raises(ValueError):
        EmissionFactors(shuttle=1.0)


def test_unknown_vehicle_type():
    with pytest.raises(ValueError):
        emissions([ex("Tram", 1.0)])


@settings(max_examples=100)
@given(st.floats(0, 1e7), st.floats(0, 1e7), st.floats(0, 10))
def test_emissions_linear(a, b, k):
    one = emissions([ex("CEP-Vehicle", a), ex("Supply-Truck", b)])["total"]
    scaled = emissions([ex("CEP-Vehicle", a * k), ex("Supply-Truck", b * k)])["total"]
    assert scaled == pytest.approx(k * one, rel=1e-9, abs=1e-12)


def test_load_factor_examples():
    assert load_factor([tour(CEP_VEHICLE, 184)]) == pytest.approx(0.80)
    assert load_factor([tour(CEP_VEHICLE, 230), tour(SUPPLY_TRUCK, 800)]) == 1.0
    assert load_factor([tour(CARGO_BIKE, 23), tour(CEP_VEHICLE, 115)]) == pytest.approx(0.75)
    assert load_factor([tour(FREIGHT_SHUTTLE, 10)]) is None


def test_two_tours_mean():
    assert load_factor([tour(CEP_VEHICLE, 138), tour(CEP_VEHICLE, 230)]) == pytest.approx(0.8)


def test_tour_length_table(tmp_path):
    assert tour_length_table([]) == []
    write_tour_lengths([], tmp_path / "e.csv")
    assert (tmp_path / "e.csv").read_text().strip() == "vehicle_type,tour_id,km,load_factor"
    rows = tour_length_table([ex("CEP-Vehicle", 1500, "a", 23, 230), ex("CEP-Vehicle", 500, "b"),
                              ex("Freight Shuttle", 2000, "c")])
    assert len(rows) == 3 and sum(r[2] for r in rows) == pytest.approx(4.0)


def report(total=100.0, scenario="BC", co2=1.0, cep=1.0):
    return KpiReport(scenario, total, total, 0.0, 0.0, 0.8,
                     {"light_commercial": cep, "heavy_duty": co2 - cep, "shuttle": 0.0, "bike": 0.0},
                     co2, {"CEP-Vehicle": 3.0}, {"CEP-Vehicle": 10.0})


def test_aggregate_examples():
    r = report()
    assert aggregate_replications([r]) == r
    mean = aggregate_replications([report(100), report(110), report(120)])
    assert mean.total_distance_km == pytest.approx(110)
    same = aggregate_replications([r, r, r])
    assert same.total_distance_km == r.total_distance_km and same.co2_t == r.co2_t
    with pytest.raises(ValueError):
        aggregate_replications([])
    with pytest.raises(ValueError):
        aggregate_replications([report(), report(scenario="WHU")])


def test_vehicle_count_display_rounds_half_up():
    a, b = report(), report()
    b.vehicles_used = {"CEP-Vehicle": 4.0}
    mean = aggregate_replications([a, b])
    assert mean.vehicles_used["CEP-Vehicle"] == 3.5
    assert mean.vehicles_used_display["CEP-Vehicle"] == 4


def test_compare_examples():
    c = compare(report(co2=55.24), report(co2=38.28, scenario="WHU"))
    assert c["co2_total_t"]["percent"] == pytest.approx(-30.7, abs=0.05)
    assert "-30.7%" in format_comparison(report(co2=55.24), report(co2=38.28, scenario="WHU"))
    assert all(row["delta"] == 0 for row in compare(report(), report()).values())
    zero = compare(report(co2=0.0, cep=0.0), report(co2=1.0))
    assert zero["co2_total_t"]["flag"] == "base_zero" and zero["co2_total_t"]["percent"] is None


def test_build_report_splits_distance():
    execs = [ex("CEP-Vehicle", 2000), ex("Supply-Truck", 1000), ex("Freight Shuttle", 4000),
             ex("CEP-Cargo-Bike", 500)]
    r = build_report("WHU_B", execs, [tour(CEP_VEHICLE, 115)])
    assert (r.ground_distance_km, r.shuttle_distance_km, r.bike_distance_km) == (3.0, 4.0, 0.5)
    assert r.total_distance_km == 7.5
    assert r.ground_co2_t == pytest.approx(r.co2_total_t)


def test_report_files(tmp_path):
    r = report()
    save_report(r, tmp_path / "r.json")
    assert load_report(tmp_path / "r.json") == r
    write_comparison([r, replace(r, scenario="SHU")], tmp_path / "c.csv")
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0] == ",".join(COMPARISON_COLUMNS) and len(lines) == 3
