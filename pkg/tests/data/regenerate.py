"""Rebuild the frozen reference values used by the acceptance suite.

    python tests/data/regenerate.py oracle
    python tests/data/regenerate.py means <run-output-dir>

Only rerun after an audited change; the files are committed as references.
"""

import json
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parent))

ORACLE_SEEDS = range(2024, 2124)
SCENARIOS = ("bc", "shu", "whu", "whu-b")
PINNED = ("total_distance_km", "ground_distance_km", "shuttle_distance_km", "bike_distance_km",
          "average_ground_vehicle_load", "co2_total_t", "co2_t")


def oracle():
    from helpers import random_instance
    from subterra.vrp import brute_force

    costs = {}
    for seed in ORACLE_SEEDS:
        jobs, fleet, m = random_instance(seed)
        costs[str(seed)] = brute_force(jobs, fleet, m).total_cost
    (HERE / "oracle_costs.json").write_text(json.dumps(costs, indent=1, sort_keys=True) + "\n")


def means(out: Path):
    pinned = {}
    for slug in SCENARIOS:
        data = json.loads((out / slug / "kpi_mean.json").read_text())
        pinned[slug] = {k: data[k] for k in PINNED}
    (HERE / "toy_city_means.json").write_text(json.dumps(pinned, indent=1, sort_keys=True) + "\n")


if __name__ == "__main__":
    if sys.argv[1] == "oracle":
        oracle()
    else:
        means(Path(sys.argv[2]))
