"""
Independent numerical machinery used to cross-check the closed forms.

Nothing here calls the closed-form code paths: the eigensolver is a cyclic Jacobi
iteration, the master equations are stepped with fixed-step RK4, and the rate integrals
have their own spectral density and a Gaussian-regularised quadrature.
"""

import logging
import math

import numpy as np
from scipy import integrate

from app.core.errors import ConvergenceError, InvalidTimeError, UnstableStepError
from app.models.schemas import BathConfig, SystemParams
from app.services.bath_rates import RateTable
from app.services.spectral_model import SpectralDecomposition

logger = logging.getLogger(__name__)

JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100
STEP_FACTOR = 0.01

# Gaussian width for the regularised rate integral; halved once for Richardson
QUADRATURE_WIDTH = 0.001
QUADRATURE_WINDOW = 15.0


# ============================================================================
# Hermitian eigensolver
# ============================================================================


def _off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(np.abs(off) ** 2)))


def eigh(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvectors of a complex Hermitian matrix.

    Cyclic Jacobi: each (p, q) pair is first made real by a diagonal phase, then
    annihilated by a real plane rotation.

    Raises:
        ValueError: if the matrix is not square or not Hermitian to 1e-10
        ConvergenceError: if the off-diagonal norm is still above threshold after 100 sweeps
    """
    a = np.array(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.linalg.norm(a)))
    if float(np.max(np.abs(a - a.conj().T))) > 1e-10 * scale:
        raise ValueError("matrix is not Hermitian")
    a = 0.5 * (a + a.conj().T)

    n = a.shape[0]
    vecs = np.eye(n, dtype=complex)
    threshold = JACOBI_TOL * scale

    for sweep in range(JACOBI_MAX_SWEEPS):
        if _off_norm(a) < threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                magnitude = abs(apq)
                if magnitude == 0.0:
                    continue
                phase = np.eye(n, dtype=complex)
                phase[q, q] = np.conj(apq) / magnitude

                zeta = (a[q, q].real - a[p, p].real) / (2.0 * magnitude)
                t = (1.0 if zeta >= 0.0 else -1.0) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c

                rotation = np.eye(n, dtype=complex)
                rotation[p, p] = rotation[q, q] = c
                rotation[p, q] = s
                rotation[q, p] = -s

                g = phase @ rotation
                a = g.conj().T @ a @ g
                vecs = vecs @ g
    else:
        if _off_norm(a) >= threshold:
            raise ConvergenceError(
                f"Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps"
            )

    values = np.real(np.diag(a))
    order = np.argsort(values)
    return values[order], vecs[:, order]


def sqrtm_psd(matrix: np.ndarray) -> np.ndarray:
    """Principal square root of a PSD Hermitian matrix.

    Eigenvalues in [-1e-9, 0) are treated as zero; anything more negative raises.
    """
    values, vecs = eigh(matrix)
    if values.min() < -1e-9:
        raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {values.min():.3e})")
    roots = np.sqrt(np.clip(values, 0.0, None))
    return (vecs * roots) @ vecs.conj().T


# ============================================================================
# RK4 for the secular master equations
# ============================================================================


def _rk4_step(f, y: np.ndarray, h: float) -> np.ndarray:
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def stable_step_bound(
    rates: RateTable, spec: SpectralDecomposition, populations_only: bool = False
) -> float:
    """Largest accepted dt: 0.01 / max(|omega_mn|, rates); frequencies ignored for populations."""
    fastest = max(float(rates.W.max()), float(rates.gamma.max()))
    if not populations_only:
        fastest = max(fastest, float(np.abs(spec.omega).max()))
    return math.inf if fastest == 0.0 else STEP_FACTOR / fastest


class _SecularStepper:
    """One RK4 step of the secular equations, as a population matrix and coherence factors.

    The equations are linear and autonomous, so a step is captured exactly by running
    the four stages on the identity (populations) and on ones (each coherence).
    """

    def __init__(self, rates: RateTable, spec: SpectralDecomposition, h: float) -> None:
        generator = rates.W - np.diag(rates.W.sum(axis=0))
        drift = -1j * spec.omega - rates.gamma
        np.fill_diagonal(drift, 0.0)

        self.populations = _rk4_step(lambda p: generator @ p, np.eye(4), h)
        self.coherences = _rk4_step(lambda c: drift * c, np.ones((4, 4), dtype=complex), h)

    def advance(self, state: np.ndarray, steps: int, populations_only: bool) -> np.ndarray:
        pop_step = np.linalg.matrix_power(self.populations, steps)
        if populations_only:
            return state @ pop_step.T

        idx = np.arange(4)
        out = state * self.coherences**steps
        out[..., idx, idx] = np.real(state[..., idx, idx]) @ pop_step.T
        return out


def _validate_state(state: np.ndarray, populations_only: bool) -> np.ndarray:
    if populations_only:
        arr = np.array(state, dtype=float)
        if arr.shape[-1:] != (4,):
            raise ValueError(f"population vectors must have trailing shape (4,), got {arr.shape}")
    else:
        arr = np.array(state, dtype=complex)
        if arr.shape[-2:] != (4, 4):
            raise ValueError(f"density matrices must have trailing shape (4, 4), got {arr.shape}")
    return arr


def integrate_secular(
    state: np.ndarray,
    rates: RateTable,
    spec: SpectralDecomposition,
    t_end: float,
    dt: float,
    *,
    populations_only: bool = False,
) -> np.ndarray:
    """RK4 of dp_m/dt = sum_n W_mn p_n - p_m sum_n W_nm and d rho_mn/dt = (-i w_mn - g_mn) rho_mn.

    `state` is a stack of eigenbasis density matrices (..., 4, 4), or of population
    vectors (..., 4) with `populations_only`. Takes ceil(t_end/dt) equal steps.

    Raises:
        InvalidTimeError: if t_end < 0 or dt <= 0
        UnstableStepError: if dt > 0.01 / max(|omega|, rates)
    """
    arr = _validate_state(state, populations_only)
    if t_end < 0.0 or not math.isfinite(t_end):
        raise InvalidTimeError(f"t_end must be finite and >= 0, got {t_end}")
    if dt <= 0.0:
        raise InvalidTimeError(f"dt must be > 0, got {dt}")
    bound = stable_step_bound(rates, spec, populations_only)
    if dt > bound:
        raise UnstableStepError(f"dt={dt} exceeds the stable bound {bound:.6g}")

    steps = math.ceil(t_end / dt - 1e-12)
    if steps == 0:
        return arr
    stepper = _SecularStepper(rates, spec, t_end / steps)
    return stepper.advance(arr, steps, populations_only)


def integrate_secular_grid(
    state: np.ndarray,
    rates: RateTable,
    spec: SpectralDecomposition,
    times: np.ndarray,
    dt: float,
    *,
    populations_only: bool = False,
) -> np.ndarray:
    """RK4 solution sampled on an increasing grid starting at or after t = 0.

    Each interval is split into equal steps no longer than dt. The time axis is prepended
    to the state's shape.
    """
    grid = np.asarray(times, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise InvalidTimeError("time grid must be a non-empty 1-D array")
    if grid[0] < 0.0 or np.any(np.diff(grid) <= 0.0):
        raise InvalidTimeError("time grid must be non-negative and strictly increasing")

    current = _validate_state(state, populations_only)
    bound = stable_step_bound(rates, spec, populations_only)
    if dt > bound:
        raise UnstableStepError(f"dt={dt} exceeds the stable bound {bound:.6g}")

    samples = []
    previous = 0.0
    for t in grid:
        current = integrate_secular(
            current, rates, spec, float(t - previous), dt, populations_only=populations_only
        )
        samples.append(current)
        previous = float(t)
    return np.stack(samples)


# ============================================================================
# Rate integrals
# ============================================================================


def _ohmic(w: float, kappa: float, cutoff: float) -> float:
    return kappa * w * math.exp(-w / cutoff)


def _coth_half(beta: float, w: float) -> float:
    """coth(beta w / 2) for w > 0, equal to 1 at beta = inf."""
    return 1.0 / math.tanh(0.5 * beta * w)


def rate_real_part(omega: float, cfg: BathConfig, params: SystemParams, sign: int = 1) -> float:
    """Direct evaluation of Re I^{+-}(w) = (pi/2) J(|w|) [coth(beta|w|/2) -+ sign(w)]."""
    if omega == 0.0:
        return 0.0
    w = abs(omega)
    cutoff = cfg.cutoff(params)
    return 0.5 * math.pi * _ohmic(w, cfg.kappa, cutoff) * (
        _coth_half(cfg.beta, w) - sign * math.copysign(1.0, omega)
    )


def _gaussian(x: float, width: float) -> float:
    return math.exp(-0.5 * (x / width) ** 2) / (width * math.sqrt(2.0 * math.pi))


def _regularised_rate(
    omega: float, cfg: BathConfig, cutoff: float, sign: int, width: float
) -> float:
    """Real part of the time integral with a Gaussian damping exp(-width^2 t^2 / 2).

    The damping turns the delta functions of the one-sided Fourier transform into
    normalised Gaussians, so the integral becomes an ordinary quadrature over the bath
    frequencies near |omega|.
    """
    w0 = abs(omega)

    def integrand(w: float) -> float:
        if w <= 0.0:
            return 0.0
        near = _gaussian(omega - w, width)
        far = _gaussian(omega + w, width)
        return _ohmic(w, cfg.kappa, cutoff) * (
            _coth_half(cfg.beta, w) * (near + far) - sign * (near - far)
        )

    lower = max(0.0, w0 - QUADRATURE_WINDOW * width)
    upper = w0 + QUADRATURE_WINDOW * width
    value, abserr = integrate.quad(
        integrand, lower, upper, points=[w0], epsabs=0.0, epsrel=1e-13, limit=400
    )
    logger.debug("Rate quadrature at omega=%s width=%s: %s (+- %s)", omega, width, value, abserr)
    return 0.5 * math.pi * value


def rate_quadrature(omega: float, cfg: BathConfig, params: SystemParams, sign: int = 1) -> float:
    """Real part of I^{+-}(omega) from the damped time integral.

    The damping bias is O(width^2); one Richardson step with the width halved removes it.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if omega == 0.0:
        return 0.0
    cutoff = cfg.cutoff(params)
    coarse = _regularised_rate(omega, cfg, cutoff, sign, QUADRATURE_WIDTH)
    fine = _regularised_rate(omega, cfg, cutoff, sign, 0.5 * QUADRATURE_WIDTH)
    return (4.0 * fine - coarse) / 3.0
