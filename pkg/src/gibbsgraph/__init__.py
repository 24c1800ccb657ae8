"""Simulation and analysis of Gibbs random graphs on point sets."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    Configuration,
    EdgeId,
    ModelParams,
    PointSet,
    Star,
    edge,
    energy,
    energy_delta,
    params_from_temperature,
)
from .points import BoxRegion, ProcessSpec, sample_hardcore, sample_poisson, t_gamma, t_sup  # noqa: E402

__all__ = [
    "__version__",
    "BoxRegion",
    "Configuration",
    "EdgeId",
    "ModelParams",
    "PointSet",
    "ProcessSpec",
    "Star",
    "edge",
    "energy",
    "energy_delta",
    "params_from_temperature",
    "sample_hardcore",
    "sample_poisson",
    "t_gamma",
    "t_sup",
]
