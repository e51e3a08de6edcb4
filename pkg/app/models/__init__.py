"""Data models and schemas."""

from .schemas import (
    BathConfig,
    ScenarioConfig,
    ScenarioReport,
    SystemParams,
)
from .states import DensityMatrix, Trajectory

__all__ = [
    "BathConfig",
    "ScenarioConfig",
    "ScenarioReport",
    "SystemParams",
    "DensityMatrix",
    "Trajectory",
]
