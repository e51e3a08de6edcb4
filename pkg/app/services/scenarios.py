"""
Scenario runner: figure presets, config merging, CSV time series, sweeps and JSON reports.
"""

import csv
import io
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
from dotenv import dotenv_values
from pydantic import ValidationError

from app.core.config import settings
from app.core.errors import ConfigError, InvalidStateError, UnknownPresetError
from app.models.schemas import (
    RateReport,
    RelaxationReport,
    ScenarioConfig,
    ScenarioReport,
    SweepAxis,
)
from app.models.states import DensityMatrix, Trajectory
from app.services.bath_rates import (
    RateTable,
    closed_form_ratio,
    rate_table,
    transition_rates_closed_form,
)
from app.services.numerics_oracle import integrate_secular_grid, stable_step_bound
from app.services.observables import concurrence, observable_series, von_neumann_entropy
from app.services.propagator import (
    coherence_remnant,
    distance_to_equilibrium,
    equilibrium_state,
    evolve,
    evolve_batch,
    relaxation_time,
)
from app.services.spectral_model import SpectralDecomposition, diagonalize, make_state

logger = logging.getLogger(__name__)

CSV_HEADER = [
    "t",
    "S_bits",
    "concurrence",
    "purity",
    "rho33",
    "re_rho12",
    "im_rho12",
    "re_rho13",
    "im_rho13",
    "dist_to_eq",
]


# ============================================================================
# Figure presets
# ============================================================================


@dataclass(frozen=True)
class FigurePreset:
    """Named parameter set; `sweep` turns the preset into a multi-trajectory run."""

    description: str
    values: dict[str, Any]
    sweep: tuple[SweepAxis, tuple[float, ...]] | None = None


_LINEAR = {"spacing": "linear", "t_start": 0.0, "t_end": 1000.0, "t_count": 2001}
_LONG_LINEAR = {"spacing": "linear", "t_start": 0.0, "t_end": 2000.0, "t_count": 4001}
_BASE = {"delta": 1.0, "v": 0.7, "kappa": 0.01, "beta": 10.0}

FIGURE_PRESETS: dict[str, FigurePreset] = {
    "fig1a": FigurePreset(
        "Two baths, psi_a", {**_BASE, **_LINEAR, "topology": "two_bath", "initial_state": "psi_a"}
    ),
    "fig1b": FigurePreset(
        "Two baths, psi_b", {**_BASE, **_LINEAR, "topology": "two_bath", "initial_state": "psi_b"}
    ),
    "fig1c": FigurePreset(
        "Two baths, singlet", {**_BASE, **_LINEAR, "topology": "two_bath", "initial_state": "psi_c"}
    ),
    "fig1d": FigurePreset(
        "Two baths, psi_d", {**_BASE, **_LINEAR, "topology": "two_bath", "initial_state": "psi_d"}
    ),
    "fig2": FigurePreset(
        "Common bath, psi_a",
        {**_BASE, **_LINEAR, "topology": "single_bath", "initial_state": "psi_a"},
    ),
    "fig3": FigurePreset(
        "Common bath, psi_b",
        {**_BASE, **_LINEAR, "topology": "single_bath", "initial_state": "psi_b"},
    ),
    "fig4": FigurePreset(
        "Common bath, psi_d, long times",
        {
            **_BASE,
            "topology": "single_bath",
            "initial_state": "psi_d",
            "spacing": "log",
            "t_start": 0.1,
            "t_end": 1e6,
            "t_count": 2000,
        },
    ),
    "fig5": FigurePreset(
        "Common bath, psi_a, coupling study",
        {**_BASE, **_LINEAR, "topology": "single_bath", "initial_state": "psi_a"},
        sweep=("kappa", (0.1, 0.2, 0.3, 0.4)),
    ),
    "fig6": FigurePreset(
        "Common bath, psi_a, temperature study",
        {**_BASE, **_LONG_LINEAR, "topology": "single_bath", "initial_state": "psi_a"},
        sweep=("beta", (20.0, 5.0, 1.0, 0.1)),
    ),
    "fig7a": FigurePreset(
        "Common bath, mixture of psi_a and the singlet",
        {**_BASE, **_LONG_LINEAR, "beta": 20.0, "topology": "single_bath", "initial_state": "mix1"},
    ),
    "fig7b": FigurePreset(
        "Common bath, mixture of psi_a and psi_b",
        {**_BASE, **_LONG_LINEAR, "beta": 20.0, "topology": "single_bath", "initial_state": "mix2"},
    ),
}


def get_preset(name: str) -> FigurePreset:
    try:
        return FIGURE_PRESETS[name]
    except KeyError:
        raise UnknownPresetError(
            f"unknown preset {name!r}; choose from {', '.join(FIGURE_PRESETS)}"
        ) from None


def list_presets() -> dict[str, dict[str, Any]]:
    """Preset name -> description, parameters and sweep, JSON friendly."""
    return {
        name: {
            "description": preset.description,
            "values": dict(preset.values),
            "sweep": (
                {"axis": preset.sweep[0], "values": list(preset.sweep[1])} if preset.sweep else None
            ),
        }
        for name, preset in FIGURE_PRESETS.items()
    }


# ============================================================================
# Config loading
# ============================================================================


def load_scenario_file(path: str | Path) -> dict[str, str]:
    """Flat key=value file (dotenv syntax, # comments allowed)."""
    file_path = Path(path)
    if not file_path.is_file():
        raise ConfigError(f"config file not found: {file_path}", field="config")
    return {k: v for k, v in dotenv_values(file_path).items() if v is not None}


def parse_overrides(items: list[str] | None) -> dict[str, str]:
    """`key=value` strings from --set flags."""
    overrides: dict[str, str] = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"expected key=value, got {item!r}", field=item)
        overrides[key.strip()] = value.strip()
    return overrides


def validate_config(values: dict[str, Any]) -> ScenarioConfig:
    """Build a ScenarioConfig, turning validation errors into ConfigError naming the field."""
    try:
        return ScenarioConfig.model_validate(values)
    except ValidationError as e:
        first = e.errors()[0]
        field_name = ".".join(str(part) for part in first["loc"]) or "config"
        raise ConfigError(f"{field_name}: {first['msg']}", field=field_name) from e


def build_config(
    preset: str | None = None,
    config_file: str | Path | None = None,
    overrides: dict[str, str] | None = None,
) -> ScenarioConfig:
    """Merge preset < file < overrides and validate."""
    values: dict[str, Any] = {}
    if preset is not None:
        values.update(get_preset(preset).values)
    if config_file is not None:
        values.update(load_scenario_file(config_file))
    values.update(overrides or {})
    return validate_config(values)


def time_grid(config: ScenarioConfig) -> np.ndarray:
    if config.spacing == "log":
        return np.geomspace(config.t_start, config.t_end, config.t_count)
    return np.linspace(config.t_start, config.t_end, config.t_count)


def _parse_entries(text: str | None) -> np.ndarray:
    if text is None:
        return np.zeros(16)
    return np.array([float(p) for p in text.replace(";", ",").split(",") if p.strip()])


# ============================================================================
# Scenario preparation
# ============================================================================


@dataclass(frozen=True)
class PreparedScenario:
    config: ScenarioConfig
    spec: SpectralDecomposition
    rates: RateTable
    rho0: DensityMatrix
    equilibrium: DensityMatrix


def initial_state(config: ScenarioConfig, spec: SpectralDecomposition) -> DensityMatrix:
    if config.initial_state == "custom":
        matrix = (_parse_entries(config.rho_real) + 1j * _parse_entries(config.rho_imag)).reshape(
            4, 4
        )
        try:
            return make_state("custom", spec, matrix=matrix)
        except InvalidStateError as e:
            raise ConfigError(f"rho_real/rho_imag: {e}", field="rho_real") from e
    beta = config.gibbs_beta if config.gibbs_beta is not None else config.beta
    return make_state(config.initial_state, spec, beta=beta)


def prepare(config: ScenarioConfig) -> PreparedScenario:
    spec = diagonalize(config.system_params())
    bath = config.bath_config()
    rates = rate_table(spec, bath)
    rho0 = initial_state(config, spec)
    return PreparedScenario(
        config=config,
        spec=spec,
        rates=rates,
        rho0=rho0,
        equilibrium=equilibrium_state(rho0, spec, bath),
    )


def _trajectory(prepared: PreparedScenario) -> Trajectory:
    return evolve(prepared.rho0, prepared.spec, prepared.rates, time_grid(prepared.config))


# ============================================================================
# Time series
# ============================================================================


def scenario_rows(config: ScenarioConfig) -> list[list[float]]:
    """One row of CSV_HEADER values per grid point."""
    prepared = prepare(config)
    traj = _trajectory(prepared)
    series = observable_series(traj, prepared.spec)
    distance = distance_to_equilibrium(traj, prepared.equilibrium)
    rho = traj.rho
    columns = [
        traj.times,
        series.entropy,
        series.concurrence,
        series.purity,
        rho[:, 2, 2].real,
        rho[:, 0, 1].real,
        rho[:, 0, 1].imag,
        rho[:, 0, 2].real,
        rho[:, 0, 2].imag,
        distance,
    ]
    return np.column_stack(columns).tolist()


def format_csv(header: list[str], rows: list[list[float]]) -> str:
    """Fixed significant digits, '.' separator, LF line endings."""
    digits = settings.csv_digits
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([f"{value:.{digits}g}" for value in row])
    return buffer.getvalue()


def run_scenario(config: ScenarioConfig) -> str:
    """CSV time series for a single scenario."""
    logger.info(
        "Running %s scenario (%s, beta=%s, kappa=%s)",
        config.topology,
        config.initial_state,
        config.beta,
        config.kappa,
    )
    return format_csv(CSV_HEADER, scenario_rows(config))


def sweep_configs(
    config: ScenarioConfig, axis: SweepAxis, values: list[float]
) -> list[ScenarioConfig]:
    if not values:
        raise ConfigError("sweep needs at least one value", field="values")
    base = config.model_dump()
    return [validate_config({**base, axis: value}) for value in values]


def run_sweep(
    config: ScenarioConfig, axis: SweepAxis, values: list[float], jobs: int | None = None
) -> str:
    """Long-format CSV, the swept value as first column, rows ordered as `values`."""
    configs = sweep_configs(config, axis, values)
    workers = max(1, jobs if jobs is not None else settings.jobs)
    logger.info("Sweeping %s over %d values with %d worker(s)", axis, len(values), workers)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(scenario_rows, configs))

    rows = [[value] + row for value, block in zip(values, results) for row in block]
    return format_csv([axis] + CSV_HEADER, rows)


# ============================================================================
# Report
# ============================================================================


def _json_number(value: float) -> float | str:
    return value if math.isfinite(value) else ("inf" if value > 0 else "-inf")


def oracle_max_deviation(prepared: PreparedScenario) -> float:
    """Sup-norm gap between closed-form and RK4 evolution of rho0 over a short window."""
    times = np.linspace(0.0, settings.oracle_t_end, 11)
    dt = min(settings.oracle_dt, 0.5 * stable_step_bound(prepared.rates, prepared.spec))
    closed = evolve_batch(prepared.rho0.entries, prepared.spec, prepared.rates, times)
    stepped = integrate_secular_grid(
        prepared.rho0.entries, prepared.rates, prepared.spec, times, dt
    )
    return float(np.max(np.abs(closed - stepped)))


def report(config: ScenarioConfig) -> ScenarioReport:
    """Rates from both routes, dephasing hierarchy, equilibrium, relaxation and oracle gap."""
    prepared = prepare(config)
    spec, rates = prepared.spec, prepared.rates
    bath = config.bath_config()

    traj = _trajectory(prepared)
    relaxation = relaxation_time(traj, prepared.equilibrium, rates)
    gamma13 = rates.dephasing(1, 3)
    eq = prepared.equilibrium.entries
    remnant = coherence_remnant(prepared.rho0, rates)
    if bath.zero_temperature and remnant:
        logger.warning("Undamped coherences at T=0: %s", ", ".join(sorted(remnant)))

    return ScenarioReport(
        scenario={
            k: _json_number(v) if isinstance(v, float) else v
            for k, v in config.model_dump().items()
        },
        energies=spec.energies.tolist(),
        rates=RateReport(
            first_principles=rates.W.tolist(),
            closed_form=transition_rates_closed_form(spec, bath).tolist(),
            closed_form_ratio=closed_form_ratio(spec, bath),
        ),
        gamma=rates.gamma.tolist(),
        gamma_ratio=rates.dephasing(1, 2) / gamma13 if gamma13 > 0.0 else None,
        equilibrium_real=eq.real.tolist(),
        equilibrium_imag=eq.imag.tolist(),
        equilibrium_concurrence=concurrence(prepared.equilibrium, spec),
        equilibrium_entropy_bits=von_neumann_entropy(prepared.equilibrium),
        relaxation=RelaxationReport(
            converged=relaxation.converged,
            time=relaxation.time,
            analytic_estimate=relaxation.analytic_estimate,
            threshold=relaxation.threshold,
        ),
        coherence_remnant=remnant,
        oracle_max_deviation=oracle_max_deviation(prepared),
    )


def report_document(
    config: ScenarioConfig,
    sweep: tuple[SweepAxis, list[float]] | None = None,
    jobs: int | None = None,
) -> tuple[str, bool]:
    """JSON text of one report, or a list of reports for a sweep, and whether all converged."""
    if sweep is None:
        rep = report(config)
        return rep.model_dump_json(indent=2) + "\n", rep.relaxation.converged

    axis, values = sweep
    configs = sweep_configs(config, axis, values)
    workers = max(1, jobs if jobs is not None else settings.jobs)
    logger.info("Reporting %s sweep over %d values with %d worker(s)", axis, len(values), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        reports = list(pool.map(report, configs))

    payload = [
        {"axis": axis, "value": _json_number(value), "report": rep.model_dump(mode="json")}
        for value, rep in zip(values, reports)
    ]
    converged = all(rep.relaxation.converged for rep in reports)
    return json.dumps(payload, indent=2) + "\n", converged
