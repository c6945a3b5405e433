"""Instance builders shared by the unit and acceptance tests."""

import numpy as np

from subterra.network import TravelMatrix
from subterra.vrp import CEP_VEHICLE, SUPPLY_TRUCK, Service, Shipment, TimeWindow, Vehicle


def euclid_matrix(points):
    pts = np.asarray(points, dtype=float)
    names = tuple(f"n{i}" for i in range(len(pts)))
    d = np.hypot(*(pts[:, None, :] - pts[None, :, :]).transpose(2, 0, 1))
    return TravelMatrix(names, d / 10.0, d)


def random_instance(seed, max_jobs=7, types=(CEP_VEHICLE, SUPPLY_TRUCK)):
    """Up to ``max_jobs`` services and shipments, two vehicles at ``n0``, 10 m/s travel."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, max_jobs + 1))
    m = euclid_matrix(rng.uniform(0, 10_000, (2 * n + 1, 2)))
    names = m.nodes
    jobs = []
    for j in range(n):
        win = None
        if rng.random() < 0.4:
            e = float(rng.uniform(0, 3600))
            win = TimeWindow(e, e + float(rng.uniform(600, 3600)))
        size = int(rng.integers(1, 120))
        if rng.random() < 0.25:
            jobs.append(Shipment(f"j{j}", names[1 + 2 * j], names[2 + 2 * j], size, win))
        else:
            jobs.append(Service(f"j{j}", names[1 + 2 * j], size, win))
    fleet = [Vehicle(f"v{i}", types[int(rng.integers(len(types)))], "n0") for i in range(2)]
    return jobs, fleet, m
