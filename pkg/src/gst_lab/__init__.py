"""
GST Lab

Numerical laboratory for ground-state-transformed jump processes: solves the
ground state of a non-local Schrodinger operator, simulates the transformed
jump SDE by thinning, and estimates the multifractal spectrum of its paths.
"""

__version__ = "0.1.0"
__author__ = "GST Lab"

from .core.runner import run_scenario
from .core.scenarios import list_scenarios, load_scenario
from .gst import GstModel
from .levy import LevyModel, build_density
from .sim import SimConfig, simulate_ensemble

__all__ = [
    "GstModel",
    "LevyModel",
    "SimConfig",
    "build_density",
    "list_scenarios",
    "load_scenario",
    "run_scenario",
    "simulate_ensemble",
]
