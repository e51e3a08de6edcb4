"""
Time evolution of the reduced density matrix in the eigenbasis.

Populations follow the closed-form solutions of the rate equations, coherences decay
as rho_ij(0) exp(-(gamma_ij + i omega_ij) t). Every routine here is linear in the
initial state, so batches and unit matrices (for the superoperator) go through the
same code.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from app.core.config import settings
from app.core.errors import InvalidTimeError
from app.models.schemas import BathConfig
from app.models.states import DensityMatrix, Trajectory
from app.services.bath_rates import RateTable
from app.services.numerics_oracle import STEP_FACTOR, integrate_secular_grid
from app.services.spectral_model import SpectralDecomposition, thermal_weights, to_eigenbasis

logger = logging.getLogger(__name__)

ROOT_GAP_TOL = 1e-9
REMNANT_TOL = 1e-12


@dataclass(frozen=True)
class RelaxationResult:
    """First time the state stays within `threshold` of equilibrium, or not converged."""

    converged: bool
    time: float | None
    analytic_estimate: float | None
    threshold: float


def _check_times(t: float | np.ndarray) -> tuple[np.ndarray, bool]:
    arr = np.asarray(t, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if arr.ndim != 1:
        raise InvalidTimeError("times must be a scalar or a 1-D array")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
        raise InvalidTimeError("times must be finite and >= 0")
    return arr, scalar


def _check_grid(times: np.ndarray) -> np.ndarray:
    grid, _ = _check_times(times)
    if grid.size == 0:
        raise InvalidTimeError("time grid is empty")
    if np.any(np.diff(grid) <= 0.0):
        raise InvalidTimeError("time grid must be strictly increasing")
    return grid


# ============================================================================
# Populations
# ============================================================================


def _two_level(up: float, down: float, times: np.ndarray) -> np.ndarray:
    """Propagator of a two-level rate process, columns indexed by the starting level."""
    u = np.zeros((times.size, 2, 2))
    total = up + down
    if total == 0.0:
        u[:, 0, 0] = u[:, 1, 1] = 1.0
        return u
    excited = up / total
    decayed = -np.expm1(-total * times)  # 1 - exp(-Gamma t)
    u[:, 0, 0] = 1.0 - excited * decayed
    u[:, 1, 0] = excited * decayed
    u[:, 0, 1] = (1.0 - excited) * decayed
    u[:, 1, 1] = 1.0 - (1.0 - excited) * decayed
    return u


def _two_bath(p0: np.ndarray, W: np.ndarray, times: np.ndarray) -> np.ndarray:
    """(nt, B, 4) populations for independent baths.

    Level k - 1 = a + 2b: flipping a (rate Gamma_1) moves 1<->2 and 3<->4, flipping b
    (rate Gamma_2) moves 1<->3 and 2<->4, and the two flips are independent.
    """
    first = _two_level(W[1, 0], W[0, 1], times)
    second = _two_level(W[2, 0], W[0, 2], times)
    prop = np.einsum("tij,tkl->tikjl", second, first).reshape(times.size, 4, 4)
    pops = np.einsum("tmn,bn->tbm", prop, p0)
    pops[..., 3] = p0.sum(axis=-1) - pops[..., :3].sum(axis=-1)
    return pops


def _chain_discriminant(W: np.ndarray) -> tuple[float, float, float]:
    """(S, c0, S^2 - 4 c0) of the quadratic factor of the 1-2-4 chain.

    S^2 - 4 c0 = (W12 + W21 - W24 - W42)^2 + 4 W12 W42 is never negative, so the roots
    are real; this form also avoids the cancellation when W12 ~ W24.
    """
    w12, w21, w24, w42 = W[0, 1], W[1, 0], W[1, 3], W[3, 1]
    total = w12 + w21 + w24 + w42
    c0 = w21 * w42 + w21 * w24 + w12 * w24
    spread = w12 + w21 - w24 - w42
    return total, c0, spread * spread + 4.0 * w12 * w42


def _single_bath_roots(W: np.ndarray) -> tuple[float, float] | None:
    """Nonzero roots of lambda^2 + S lambda + c0, or None when they are too close to
    each other or to zero for partial fractions."""
    total, c0, disc = _chain_discriminant(W)
    q = -0.5 * (total + math.sqrt(disc))
    if q == 0.0:
        return None
    roots = (q, c0 / q)

    scale = total
    if abs(roots[0] - roots[1]) < ROOT_GAP_TOL * scale:
        return None
    if min(abs(roots[0]), abs(roots[1])) < ROOT_GAP_TOL * scale:
        return None
    return roots


def _single_bath(
    p0: np.ndarray, rates: RateTable, times: np.ndarray, spec: SpectralDecomposition
) -> tuple[np.ndarray, bool]:
    """(nt, B, 4) populations for the common bath and whether the RK4 path was used.

    rho_33 is frozen; rho_11 and rho_22 come from partial fractions of
    N(lambda) / (lambda D(lambda)) with D the quadratic factor.
    """
    W = rates.W
    nt, batch = times.size, p0.shape[0]
    if not np.any(W):
        return np.broadcast_to(p0, (nt, batch, 4)).copy(), False

    roots = _single_bath_roots(W)
    if roots is None:
        fastest = max(float(W.max()), float(rates.gamma.max()))
        dt = min(settings.oracle_dt, 0.5 * STEP_FACTOR / fastest)
        logger.warning("Near-degenerate relaxation roots, using RK4 populations (dt=%g)", dt)
        pops = integrate_secular_grid(p0, rates, spec, times, dt, populations_only=True)
        return pops, True

    w12, w21, w24, w42 = W[0, 1], W[1, 0], W[1, 3], W[3, 1]
    c0 = w21 * w42 + w21 * w24 + w12 * w24
    p1, p2, p3 = p0[:, 0], p0[:, 1], p0[:, 2]
    nonsinglet = p0.sum(axis=-1) - p3

    numerators = [
        (p1, p1 * (w12 + w24 + w42) + w12 * p2, w12 * w24 * nonsinglet),
        (p2, w24 * (nonsinglet - p1) + w21 * (p1 + p2), w21 * w24 * nonsinglet),
    ]

    pops = np.empty((nt, batch, 4))
    lam = np.array(roots)
    for level, (quad, lin, const) in enumerate(numerators):
        value = np.broadcast_to(const / c0, (nt, batch)).copy()
        for k in range(2):
            root, other = lam[k], lam[1 - k]
            residue = (quad * root**2 + lin * root + const) / (root * (root - other))
            value = value + residue[None, :] * np.exp(root * times)[:, None]
        pops[..., level] = value
    pops[..., 2] = p3
    pops[..., 3] = nonsinglet - pops[..., 0] - pops[..., 1]
    return pops, False


def _initial_populations(p0: np.ndarray) -> np.ndarray:
    arr = np.asarray(p0, dtype=float)
    if arr.shape[-1:] != (4,):
        raise ValueError(f"populations must have trailing shape (4,), got {arr.shape}")
    return arr


def populations_two_bath(
    p0: np.ndarray, rates: RateTable, t: float | np.ndarray
) -> np.ndarray:
    """Eigenbasis populations at time(s) t for two independent baths.

    Returns shape (4,) for scalar t, (nt, 4) for a time array.
    """
    times, scalar = _check_times(t)
    p = _initial_populations(p0)
    pops = _two_bath(p.reshape(1, 4), rates.W, times)[:, 0]
    pops[times == 0.0] = p
    return pops[0] if scalar else pops


def populations_single_bath(
    p0: np.ndarray, rates: RateTable, t: float | np.ndarray, spec: SpectralDecomposition
) -> np.ndarray:
    """Eigenbasis populations at time(s) t for a common bath; rho_33 never moves."""
    times, scalar = _check_times(t)
    p = _initial_populations(p0)
    pops, _ = _single_bath(p.reshape(1, 4), rates, times, spec)
    pops = pops[:, 0]
    pops[times == 0.0] = p
    return pops[0] if scalar else pops


def population_relaxation_rates(rates: RateTable) -> list[float]:
    """Nonzero decay rates of the population modes (real parts of -lambda)."""
    W = rates.W
    if rates.topology == "two_bath":
        candidates = [W[1, 0] + W[0, 1], W[2, 0] + W[0, 2]]
    else:
        total, c0, disc = _chain_discriminant(W)
        fast = 0.5 * (total + math.sqrt(disc))
        candidates = [fast, c0 / fast if fast > 0.0 else 0.0]
    return sorted(float(r) for r in candidates if r > 0.0)


# ============================================================================
# Coherences and full evolution
# ============================================================================


def coherences(
    rho0: np.ndarray, rates: RateTable, spec: SpectralDecomposition, t: float | np.ndarray
) -> np.ndarray:
    """Off-diagonal entries rho_ij(0) exp(-(gamma_ij + i omega_ij) t); the diagonal is zeroed."""
    times, scalar = _check_times(t)
    rho = np.asarray(rho0, dtype=complex)
    exponent = -(rates.gamma + 1j * spec.omega)
    factors = np.exp(exponent[None] * times[:, None, None])
    out = rho[None] * factors
    idx = np.arange(4)
    out[:, idx, idx] = 0.0
    return out[0] if scalar else out


def _evolve_entries(
    rho: np.ndarray, spec: SpectralDecomposition, rates: RateTable, times: np.ndarray
) -> tuple[np.ndarray, bool]:
    """(nt, B, 4, 4) evolution of a batch of eigenbasis matrices, plus the fallback flag."""
    idx = np.arange(4)
    p0 = np.real(rho[:, idx, idx])
    if rates.topology == "two_bath":
        pops, fallback = _two_bath(p0, rates.W, times), False
    else:
        pops, fallback = _single_bath(p0, rates, times, spec)
    pops[times == 0.0] = p0

    exponent = -(rates.gamma + 1j * spec.omega)
    factors = np.exp(exponent[None] * times[:, None, None])
    out = rho[None] * factors[:, None]
    out[..., idx, idx] = pops
    return out, fallback


def evolve(
    rho0: DensityMatrix, spec: SpectralDecomposition, rates: RateTable, times: np.ndarray
) -> Trajectory:
    """rho(t) = E_t rho(0) sampled on an increasing grid.

    Raises:
        InvalidTimeError: negative times or a non-increasing grid
    """
    grid = _check_grid(times)
    if rho0.basis != "eigen":
        rho0 = to_eigenbasis(rho0, spec)
    out, fallback = _evolve_entries(rho0.entries[None], spec, rates, grid)
    provenance = {
        "delta": spec.params.delta,
        "v": spec.params.v,
        "topology": rates.topology,
        "populations": "rk4" if fallback else "closed_form",
    }
    return Trajectory(times=grid, rho=out[:, 0], provenance=provenance)


def evolve_batch(
    rho0: np.ndarray, spec: SpectralDecomposition, rates: RateTable, times: np.ndarray
) -> np.ndarray:
    """Unvalidated batch evolution, shape (nt, B, 4, 4); used for oracle comparisons."""
    grid = _check_grid(times)
    rho = np.asarray(rho0, dtype=complex)
    if rho.shape[-2:] != (4, 4):
        raise ValueError(f"expected (..., 4, 4) matrices, got {rho.shape}")
    lead = rho.shape[:-2]
    out, _ = _evolve_entries(rho.reshape(-1, 4, 4), spec, rates, grid)
    return out.reshape((grid.size,) + lead + (4, 4))


def superoperator(spec: SpectralDecomposition, rates: RateTable, t: float) -> np.ndarray:
    """16x16 matrix E_t acting on row-major vec(rho)."""
    times, _ = _check_times(t)
    basis = np.eye(16, dtype=complex).reshape(16, 4, 4)
    out, _ = _evolve_entries(basis, spec, rates, times[:1])
    return out[0].reshape(16, 16).T


# ============================================================================
# Equilibrium and relaxation
# ============================================================================


def equilibrium_state(
    rho0: DensityMatrix, spec: SpectralDecomposition, cfg: BathConfig
) -> DensityMatrix:
    """Long-time state.

    Independent baths thermalize to the Gibbs state. A common bath cannot touch the
    singlet weight |B|^2 = rho_33(0); the rest, |A|^2, is Boltzmann-distributed over
    levels 1, 2, 4.
    """
    if rho0.basis != "eigen":
        rho0 = to_eigenbasis(rho0, spec)
    if cfg.topology == "two_bath":
        return DensityMatrix(np.diag(thermal_weights(spec.energies, cfg.beta)), basis="eigen")

    singlet = float(np.real(rho0.entries[2, 2]))
    weights = thermal_weights(spec.energies[[0, 1, 3]], cfg.beta) * (1.0 - singlet)
    diag = np.array([weights[0], weights[1], singlet, weights[2]])
    return DensityMatrix(np.diag(diag), basis="eigen")


def coherence_remnant(rho0: DensityMatrix, rates: RateTable) -> dict[str, float]:
    """Moduli of initial coherences that never decay (gamma_ij = 0), keyed 'rho_ij'."""
    remnant: dict[str, float] = {}
    for i in range(4):
        for j in range(i + 1, 4):
            modulus = abs(rho0.entries[i, j])
            if rates.gamma[i, j] == 0.0 and modulus > REMNANT_TOL:
                remnant[f"rho_{i + 1}{j + 1}"] = float(modulus)
    return remnant


def distance_to_equilibrium(traj: Trajectory, equilibrium: DensityMatrix) -> np.ndarray:
    """Per-sample max |rho(t)_ij - rho_eq,ij|."""
    diff = np.abs(traj.rho - equilibrium.entries[None])
    return diff.reshape(len(traj), -1).max(axis=1)


def analytic_relaxation_estimate(
    rho0: DensityMatrix, rates: RateTable, equilibrium: DensityMatrix
) -> float | None:
    """1 / slowest nonzero rate among the modes the initial state actually excites."""
    excited: list[float] = []
    if np.max(np.abs(rho0.populations - equilibrium.populations)) > REMNANT_TOL:
        excited.extend(population_relaxation_rates(rates))
    for i in range(4):
        for j in range(i + 1, 4):
            if abs(rho0.entries[i, j]) > REMNANT_TOL and rates.gamma[i, j] > 0.0:
                excited.append(float(rates.gamma[i, j]))
    return 1.0 / min(excited) if excited else None


def relaxation_time(
    traj: Trajectory,
    equilibrium: DensityMatrix,
    rates: RateTable,
    threshold: float | None = None,
) -> RelaxationResult:
    """First grid time after which the distance to equilibrium stays below threshold."""
    limit = settings.relaxation_threshold if threshold is None else threshold
    estimate = analytic_relaxation_estimate(traj.state(0), rates, equilibrium)
    distance = distance_to_equilibrium(traj, equilibrium)
    outside = np.nonzero(distance >= limit)[0]

    if outside.size == 0:
        return RelaxationResult(True, 0.0, estimate, limit)
    last = int(outside[-1])
    if last == len(traj) - 1:
        logger.info(
            "Not relaxed by t=%g (distance %.3g >= %g)", traj.times[-1], distance[-1], limit
        )
        return RelaxationResult(False, None, estimate, limit)
    return RelaxationResult(True, float(traj.times[last + 1]), estimate, limit)
