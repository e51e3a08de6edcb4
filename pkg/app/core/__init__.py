"""Core application modules."""

from .config import settings
from .logging import configure_logging

__all__ = ["settings", "configure_logging"]
