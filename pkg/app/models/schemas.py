"""
Pydantic schemas for validated inputs and report payloads.
"""

import math
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.config import settings


# ============================================================================
# Physical Parameters
# ============================================================================

Topology = Literal["two_bath", "single_bath"]

StatePresetName = Literal[
    "psi_a", "psi_b", "psi_c", "psi_d", "mix1", "mix2", "gibbs", "custom"
]

SweepAxis = Literal["beta", "kappa", "delta"]


class SystemParams(BaseModel):
    """Two-qubit system: tunneling delta (same for both spins) and Ising coupling v."""

    model_config = ConfigDict(frozen=True)

    delta: float = Field(..., ge=0.0, description="Tunneling coupling, energy units")
    v: float = Field(..., ge=0.0, description="Ising coupling strength, energy units")

    @field_validator("delta", "v")
    @classmethod
    def validate_finite(cls, value: float) -> float:
        """Energies must be finite."""
        if not math.isfinite(value):
            raise ValueError("must be finite")
        return value


class BathConfig(BaseModel):
    """Ohmic bath(s): topology, coupling kappa, inverse temperature, cutoff."""

    model_config = ConfigDict(frozen=True)

    topology: Topology
    kappa: float = Field(..., gt=0.0, le=1.0, description="Dimensionless coupling")
    beta: float = Field(..., gt=0.0, description="Inverse temperature, inf means T=0")
    omega_c: float | None = Field(None, gt=0.0, description="Cutoff; defaults to 100*max(delta, v)")

    @property
    def zero_temperature(self) -> bool:
        return math.isinf(self.beta)

    def cutoff(self, params: SystemParams) -> float:
        """Cutoff frequency, defaulted from the largest system energy scale."""
        if self.omega_c is not None:
            return self.omega_c
        scale = max(params.delta, params.v)
        return settings.omega_c_factor * scale if scale > 0 else settings.omega_c_factor


# ============================================================================
# Scenario Schemas
# ============================================================================


class ScenarioConfig(BaseModel):
    """One simulation scenario: system, bath, initial state and time grid (flat keys)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    # system
    delta: float = Field(1.0, ge=0.0)
    v: float = Field(0.7, ge=0.0)

    # bath
    topology: Topology = "single_bath"
    kappa: float = Field(0.01, gt=0.0, le=1.0)
    beta: float = Field(10.0, gt=0.0)
    omega_c: float | None = Field(None, gt=0.0)

    # initial state
    initial_state: StatePresetName = "psi_a"
    gibbs_beta: float | None = Field(None, gt=0.0)
    rho_real: str | None = Field(None, description="16 comma-separated entries, row-major")
    rho_imag: str | None = Field(None, description="16 comma-separated entries, row-major")

    # time grid
    t_start: float = Field(default_factory=lambda: settings.grid_start, ge=0.0)
    t_end: float = Field(default_factory=lambda: settings.grid_end, gt=0.0)
    t_count: int = Field(default_factory=lambda: settings.grid_count, ge=2, le=1_000_000)
    spacing: Literal["linear", "log"] = Field(default_factory=lambda: settings.grid_spacing)

    @field_validator("delta", "v", "kappa", "t_start", "t_end")
    @classmethod
    def validate_finite(cls, value: float) -> float:
        """Everything but beta must be finite."""
        if not math.isfinite(value):
            raise ValueError("must be finite")
        return value

    @field_validator("rho_real", "rho_imag")
    @classmethod
    def validate_matrix_entries(cls, value: str | None) -> str | None:
        """Exactly 16 numeric entries."""
        if value is None:
            return value
        parts = [p for p in value.replace(";", ",").split(",") if p.strip()]
        if len(parts) != 16:
            raise ValueError(f"expected 16 comma-separated entries, got {len(parts)}")
        try:
            [float(p) for p in parts]
        except ValueError as e:
            raise ValueError(f"non-numeric entry: {e}") from e
        return value

    @model_validator(mode="after")
    def validate_grid_and_state(self) -> "ScenarioConfig":
        """Grid must be increasing; log grids start above zero; custom needs a matrix."""
        if self.t_end <= self.t_start:
            raise ValueError("t_end must be greater than t_start")
        if self.spacing == "log" and self.t_start <= 0.0:
            raise ValueError("t_start must be > 0 for log spacing")
        if self.initial_state == "custom" and self.rho_real is None:
            raise ValueError("rho_real is required when initial_state=custom")
        return self

    def system_params(self) -> SystemParams:
        return SystemParams(delta=self.delta, v=self.v)

    def bath_config(self) -> BathConfig:
        return BathConfig(
            topology=self.topology, kappa=self.kappa, beta=self.beta, omega_c=self.omega_c
        )


# ============================================================================
# Report Schemas
# ============================================================================


class RelaxationReport(BaseModel):
    """Relaxation time, or an explicit non-convergence marker."""

    converged: bool
    time: float | None = None
    analytic_estimate: float | None = None
    threshold: float


class RateReport(BaseModel):
    """Rate tables from both computation routes."""

    first_principles: list[list[float]]
    closed_form: list[list[float]]
    closed_form_ratio: dict[str, float | None]


class ScenarioReport(BaseModel):
    """Machine-readable summary of a scenario (JSON output)."""

    scenario: dict[str, Any]
    energies: list[float]
    rates: RateReport
    gamma: list[list[float]]
    gamma_ratio: float | None = Field(None, description="gamma_12 / gamma_13; null if gamma_13 = 0")
    equilibrium_real: list[list[float]]
    equilibrium_imag: list[list[float]]
    equilibrium_concurrence: float
    equilibrium_entropy_bits: float
    relaxation: RelaxationReport
    coherence_remnant: dict[str, float]
    oracle_max_deviation: float
