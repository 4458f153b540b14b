"""
sefcsim: Deterministic FANET simulator for stability-driven UAV clustering
"""

from sefcsim.core.config import Algorithm, SimConfig, default_config, validate_config
from sefcsim.core.models import ClusterForest, MetricsSummary, RunArtifacts, UavState, Vec3
from sefcsim.experiments.presets import PRESETS, SweepSpec
from sefcsim.simulation.engine import Simulation, run_simulation

__version__ = "0.1.0"
__all__ = [
    "Algorithm",
    "SimConfig",
    "default_config",
    "validate_config",
    "ClusterForest",
    "MetricsSummary",
    "RunArtifacts",
    "UavState",
    "Vec3",
    "PRESETS",
    "SweepSpec",
    "Simulation",
    "run_simulation",
]
