"""Heterogeneous-fleet vehicle routing with services, shipments and soft time windows."""

from .brute import MAX_JOBS, brute_force
from .model import (
    CARGO_BIKE,
    CEP_VEHICLE,
    FREIGHT_SHUTTLE,
    SUPPLY_TRUCK,
    VEHICLE_TYPES,
    Activity,
    Job,
    Service,
    Shipment,
    Solution,
    SolverParams,
    TimeWindow,
    Tour,
    Vehicle,
    VehicleType,
    Violation,
    check_feasibility,
    route_cost,
    timeline,
)
from .solver import construct, solve

__all__ = [
    "MAX_JOBS", "brute_force", "CARGO_BIKE", "CEP_VEHICLE", "FREIGHT_SHUTTLE", "SUPPLY_TRUCK",
    "VEHICLE_TYPES", "Activity", "Job", "Service", "Shipment", "Solution", "SolverParams",
    "TimeWindow", "Tour", "Vehicle", "VehicleType", "Violation", "check_feasibility",
    "route_cost", "timeline", "construct", "solve",
]
