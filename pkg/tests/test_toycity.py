import pytest

from subterra.demand import generate_demand, validate_placement
from subterra.network import travel_time_matrix
from subterra.toycity import ToyCityParams, build_toy_city


@pytest.fixture(scope="module")
def city():
    return build_toy_city()


def test_default_layout(city):
    cfg = city.demand
    assert cfg.total_parcels == 20_000
    assert len(cfg.carriers) == 7 and sum(c.hub_connected for c in cfg.carriers) == 5
    assert len(cfg.hubs) == 5
    assert sum(c.market_share for c in cfg.carriers) == pytest.approx(1.0, abs=1e-12)


def test_placement_valid(city):
    d = generate_demand(city.demand, 0)
    validate_placement(d, city.network)


def test_everything_reachable(city):
    cfg = city.demand
    road = sorted({c.depot for c in cfg.carriers} | {h.node for h in cfg.hubs} | {z.centroid for z in cfg.zones})
    travel_time_matrix(city.network, road, "road")
    tunnel = sorted(set(cfg.portals) | {h.node for h in cfg.hubs}
                    | {f.node for f in cfg.facilities if f.tunnel_connected})
    travel_time_matrix(city.network, tunnel, "tunnel")


def test_rejects_more_connected_than_carriers():
    with pytest.raises(ValueError):
        build_toy_city(ToyCityParams(carriers=3, connected=4))
