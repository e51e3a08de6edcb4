"""Physics services: spectrum, rates, propagation, observables, oracle and scenarios."""

from .spectral_model import SpectralDecomposition, diagonalize, make_state
from .bath_rates import RateTable, rate_table
from .propagator import equilibrium_state, evolve, relaxation_time
from .observables import concurrence, observable_series, von_neumann_entropy
from .scenarios import build_config, report, run_scenario, run_sweep

__all__ = [
    "SpectralDecomposition",
    "diagonalize",
    "make_state",
    "RateTable",
    "rate_table",
    "equilibrium_state",
    "evolve",
    "relaxation_time",
    "concurrence",
    "observable_series",
    "von_neumann_entropy",
    "build_config",
    "report",
    "run_scenario",
    "run_sweep",
]
