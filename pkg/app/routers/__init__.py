"""API routers."""

from .health import router as health_router
from .simulation import router as simulation_router

__all__ = [
    "health_router",
    "simulation_router",
]
