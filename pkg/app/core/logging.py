"""
Logging setup shared by the CLI, the export job and the API.
"""

import logging
import sys

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"


def configure_logging(level: str | int = "INFO") -> None:
    """Send log records to stderr; stdout is reserved for CSV/JSON data."""
    logging.basicConfig(
        level=level.upper() if isinstance(level, str) else level,
        format=LOG_FORMAT,
        stream=sys.stderr,
        force=True,
    )
