"""Urban freight simulation with an underground shuttle stage."""

__version__ = "0.1.0"
