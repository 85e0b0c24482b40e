"""Slip-aware multi-tiered vehicle steering control and simulation."""

__version__ = "0.1.0"

from .engine import SimTrace, batch, run
from .scenario import Scenario, load_scenario

__all__ = ["Scenario", "SimTrace", "batch", "load_scenario", "run", "__version__"]
