"""Run configuration: one JSON document, unknown keys rejected."""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Mapping, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .scenario import ScenarioKind

ENV_PREFIX = "SUBTERRA_"


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class CityConfig(_Strict):
    """Overrides for the built-in toy city."""

    grid: int = Field(13, ge=3)
    spacing: float = Field(700.0, gt=0)
    total_parcels: int = Field(20_000, ge=1)
    carriers: int = Field(7, ge=1)
    connected: int = Field(5, ge=0)
    hubs: int = Field(5, ge=1)
    demand_sigma: float = Field(2_500.0, gt=0)
    demand_floor: float = Field(0.05, ge=0)
    hub_ring: float = Field(2_500.0, gt=0)
    area_distance: float = Field(12_000.0, gt=0)


class NetworkFiles(_Strict):
    """A user-supplied network and world description instead of the toy city."""

    nodes: str
    links: str
    profiles: Optional[str] = None
    world: str  # JSON: total_parcels, zones, carriers, hubs, facilities, portals


class SolverConfig(_Strict):
    iterations: int = Field(300, ge=1)
    shuttle_iterations: int = Field(150, ge=1)
    ruin_fraction: float = Field(0.2, gt=0, lt=1)
    window_penalty: float = Field(10.0, ge=0)
    unassigned_penalty: float = Field(10_000.0, ge=0)


class ScenarioConfig(_Strict):
    bike_radius_m: float = Field(3_000.0, ge=0)
    shu_capacity: int = Field(800, ge=0)
    hub_capacity: Optional[int] = Field(None, ge=0)
    stop_parcels: int = Field(23, ge=1)
    fleet_slack: int = Field(2, ge=0)


class ShuttleConfig(_Strict):
    carriers: int = Field(4, ge=1)
    tunnel_speed: float = Field(10.0, gt=0)


class RunConfig(_Strict):
    seed: int = Field(0, ge=0, lt=2 ** 64)
    replications: int = Field(3, ge=1)
    scenarios: list[ScenarioKind] = Field(
        default_factory=lambda: [ScenarioKind.BC, ScenarioKind.SHU, ScenarioKind.WHU, ScenarioKind.WHU_B])
    out: str = "out"
    city: CityConfig = Field(default_factory=CityConfig)
    network: Optional[NetworkFiles] = None
    demand: Optional[str] = None  # path to a saved demand.json, reused for every replication
    solver: SolverConfig = Field(default_factory=SolverConfig)
    scenario: ScenarioConfig = Field(default_factory=ScenarioConfig)
    shuttle: ShuttleConfig = Field(default_factory=ShuttleConfig)

    @field_validator("scenarios", mode="before")
    @classmethod
    def _parse_scenarios(cls, v):
        if isinstance(v, str):
            v = [part for part in v.split(",") if part.strip()]
        out = []
        for item in v:
            if isinstance(item, str) and item.lower() == "all":
                out.extend(ScenarioKind)
            else:
                out.append(ScenarioKind.parse(item) if isinstance(item, str) else item)
        return list(dict.fromkeys(out))

    def check_paths(self) -> None:
        """Raise FileNotFoundError for any referenced input that does not exist."""
        paths = []
        if self.network is not None:
            paths += [self.network.nodes, self.network.links, self.network.world]
            if self.network.profiles:
                paths.append(self.network.profiles)
        if self.demand:
            paths.append(self.demand)
        for p in paths:
            if not Path(p).exists():
                raise FileNotFoundError(f"config references missing file {p}")


class ConfigError(ValueError):
    pass


def load_config(path: str | Path | None = None, overrides: Mapping[str, Any] | None = None,
                environ: Mapping[str, str] | None = None) -> RunConfig:
    """Read a config file, then apply ``SUBTERRA_*`` variables, then explicit overrides.

    Recognised variables: SUBTERRA_SEED, SUBTERRA_REPLICATIONS,
    SUBTERRA_SCENARIO, SUBTERRA_OUT.
    """
    data: dict[str, Any] = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file {path} not found") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"config file {path}: top level must be an object")
    env = os.environ if environ is None else environ
    for var, key in (("SEED", "seed"), ("REPLICATIONS", "replications"),
                     ("SCENARIO", "scenarios"), ("OUT", "out")):
        value = env.get(ENV_PREFIX + var)
        if value:
            data[key] = value
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from None
