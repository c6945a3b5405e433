import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subterra.demand import (HUB_CAPACITY, TRUCKLOAD, Carrier, DemandConfig, DemandError, Facility,
                             Hub, Zone, build_supply_jobs, demand_from_dict, demand_to_dict,
                             generate_demand, load_demand, save_demand)


def config(total=500, zones=None, carriers=None, **kw):
    zones = zones or [Zone("z1", "n1", 1.0)]
    carriers = carriers or [Carrier("c1", "d1", 1.0)]
    return DemandConfig(total, zones, carriers, **kw)


def test_single_zone_single_carrier():
    d = generate_demand(config(), seed=1)
    assert len(d.parcel_jobs) == 500
    assert {j.carrier for j in d.parcel_jobs} == {"c1"}
    assert {j.customer for j in d.parcel_jobs} == {"n1"}


@pytest.mark.parametrize("seed", [0, 1, 2, 3, 42])
def test_two_zone_counts_within_three_sigma(seed):
    cfg = config(10_000, zones=[Zone("a", "na", 1.0), Zone("b", "nb", 1.0)])
    d = generate_demand(cfg, seed)
    n_a = sum(1 for j in d.parcel_jobs if j.customer == "na")
    assert abs(n_a - 5000) <= 3 * 50


def test_generation_is_deterministic():
    cfg = config(2000, zones=[Zone("a", "na", 2.0), Zone("b", "nb", 1.0)],
                 carriers=[Carrier("c1", "d1", 0.3), Carrier("c2", "d2", 0.7)])
    assert generate_demand(cfg, 9).parcel_jobs == generate_demand(cfg, 9).parcel_jobs


@pytest.mark.parametrize("bad", [
    dict(total=0),
    dict(carriers=[Carrier("c1", "d1", 0.5)]),
    dict(zones=[Zone("z", "n", 0.0)]),
])
def test_invalid_configs(bad):
    with pytest.raises(DemandError):
        generate_demand(config(**bad), 0)


def test_industry_must_be_tunnel_connected():
    with pytest.raises(DemandError):
        Facility("f", "n", "industry", 1, tunnel_connected=False)


def hubs_and_carriers(n_hubs, n_connected):
    hubs = [Hub(f"H{i}", f"h{i}") for i in range(n_hubs)]
    carriers = [Carrier(f"c{i}", f"d{i}", 1 / 7, i < n_connected) for i in range(7)]
    return hubs, carriers


def test_hub_supply_five_by_five():
    hubs, carriers = hubs_and_carriers(5, 5)
    d = generate_demand(config(100, carriers=carriers, hubs=hubs), 0)
    hub_jobs = [s for s in build_supply_jobs(d) if s.target == "hub"]
    assert len(hub_jobs) == 25
    assert all(s.size == TRUCKLOAD for s in hub_jobs)
    for h in hubs:
        assert sum(s.size for s in hub_jobs if s.destination == h.id) == HUB_CAPACITY


def test_no_connected_carriers_no_hub_supply():
    hubs, carriers = hubs_and_carriers(5, 0)
    d = generate_demand(config(100, carriers=carriers, hubs=hubs), 0)
    assert not [s for s in d.supply_jobs if s.target == "hub"]


def test_facility_supply_count():
    fac = Facility("F", "nf", "retail_center", 3, supplier="c1")
    d = generate_demand(config(10, facilities=[fac]), 0)
    jobs = [s for s in d.supply_jobs if s.destination == "F"]
    assert len(jobs) == 3 and all(s.size == 800 and s.origin == "d1" for s in jobs)


def test_round_trip(tmp_path):
    hubs, carriers = hubs_and_carriers(2, 3)
    d = generate_demand(config(300, carriers=carriers, hubs=hubs, portals=["P"]), 5)
    assert demand_from_dict(demand_to_dict(d)) == d
    save_demand(d, tmp_path / "d.json")
    assert load_demand(tmp_path / "d.json") == d


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3000), st.integers(1, 5), st.integers(1, 4), st.integers(0, 2 ** 32))
def test_parcel_total_conserved(total, n_zones, size, seed):
    zones = [Zone(f"z{i}", f"n{i}", float(i + 1)) for i in range(n_zones)]
    carriers = [Carrier("a", "da", 0.25), Carrier("b", "db", 0.75)]
    d = generate_demand(config(total, zones=zones, carriers=carriers, parcel_size=size), seed)
    assert d.total_parcels == total
