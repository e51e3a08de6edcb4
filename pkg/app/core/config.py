"""
Configuration management using Pydantic Settings.
"""

from typing import Literal

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="RELAXOMETER_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # API Settings
    app_name: str = "Relaxometer API"
    app_version: str = "0.1.0"
    debug: bool = False
    api_v1_prefix: str = "/api/v1"
    allowed_origins: str = "http://localhost:3000,http://localhost:8888"

    def get_allowed_origins(self) -> list[str]:
        """Comma-separated origins as a list."""
        return [origin.strip() for origin in self.allowed_origins.split(",") if origin.strip()]

    # Runtime
    jobs: int = 1  # RELAXOMETER_JOBS, default for --jobs
    log_level: str = "INFO"

    # Physics defaults
    omega_c_factor: float = 100.0  # omega_c = factor * max(delta, v)
    relaxation_threshold: float = 0.01

    # Default time grid, resolves both t~4e2 and t~4e5
    grid_start: float = 0.1
    grid_end: float = 1e6
    grid_count: int = 2000
    grid_spacing: Literal["linear", "log"] = "log"

    # Closed form vs RK4 check embedded in reports
    oracle_t_end: float = 20.0
    oracle_dt: float = 0.004

    # Output
    csv_digits: int = 17

    @field_validator("jobs")
    @classmethod
    def validate_jobs(cls, v: int) -> int:
        """At least one worker."""
        if v < 1:
            raise ValueError("jobs must be >= 1")
        return v


# Global settings instance
settings = Settings()
