"""Force-aware probabilistic movement primitives.

Fits joint position+force trajectory distributions from demonstrations,
conditions them on desired positions or forces, and adapts trajectories at
runtime via force-triggered replanning, validated against a deterministic
compliant peg-in-hole simulator.
"""

from ._kernels import backend_name
from .mpcore import (
    BasisSystem,
    DmpConfig,
    InitialState,
    TimeGrid,
    Trajectory,
    TrajectoryDistribution,
    WeightDistribution,
    build_basis,
    build_phase,
    compose_mean,
    fit_weight_distribution,
    fit_weights,
    integrate_dmp,
    sample_trajectories,
    trajectory_distribution,
)

__version__ = "0.1.0"

__all__ = [
    "BasisSystem",
    "DmpConfig",
    "InitialState",
    "TimeGrid",
    "Trajectory",
    "TrajectoryDistribution",
    "WeightDistribution",
    "backend_name",
    "build_basis",
    "build_phase",
    "compose_mean",
    "fit_weight_distribution",
    "fit_weights",
    "integrate_dmp",
    "sample_trajectories",
    "trajectory_distribution",
]
