"""
Ohmic spectral density, golden-rule transition rates W_mn and dephasing rates gamma_mn.

Conventions: W_mn is the rate from level n to level m, omega_mn = E_m - E_n, so uphill
transitions have omega_mn > 0. Both topologies use J(w) = kappa w exp(-w/omega_c)
per bath (2 pi K w exp(-w/omega_c) with K = kappa/2pi); the common bath's factor 2
relative to independent baths comes out of the <m|sigma_z + tau_z|n> products.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from app.models.schemas import BathConfig, SystemParams, Topology
from app.services.spectral_model import SIGMA_Z, TAU_Z, SpectralDecomposition

logger = logging.getLogger(__name__)

# Matrix elements that vanish analytically come out at ~1e-17
MATRIX_ELEMENT_ZERO = 1e-13


@dataclass(frozen=True)
class RateTable:
    """Transition rates W (W[m, n]: n -> m) and coherence decay rates gamma (0-based)."""

    W: np.ndarray
    gamma: np.ndarray
    topology: Topology

    def __post_init__(self) -> None:
        self.W.flags.writeable = False
        self.gamma.flags.writeable = False

    def rate(self, m: int, n: int) -> float:
        """W_mn with 1-based indices."""
        return float(self.W[m - 1, n - 1])

    def dephasing(self, m: int, n: int) -> float:
        """gamma_mn with 1-based indices."""
        return float(self.gamma[m - 1, n - 1])

    @property
    def generator(self) -> np.ndarray:
        """Population generator L with dp/dt = L p."""
        return self.W - np.diag(self.W.sum(axis=0))

    def scaled(self, factor: float) -> "RateTable":
        return RateTable(self.W * factor, self.gamma * factor, self.topology)


def spectral_density(
    omega: float | np.ndarray, cfg: BathConfig, params: SystemParams | None = None
) -> float | np.ndarray:
    """J(w) = kappa w exp(-w/omega_c) for w >= 0.

    `params` supplies the default cutoff when `cfg.omega_c` is unset.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0.0):
        raise ValueError("spectral density is defined for omega >= 0")
    if cfg.omega_c is None and params is None:
        raise ValueError("omega_c is unset; pass the system params to default it")
    cutoff = cfg.cutoff(params) if params is not None else float(cfg.omega_c or 0.0)
    out = cfg.kappa * w * np.exp(-w / cutoff)
    return float(out) if out.ndim == 0 else out


def rate_kernel(
    omega: float | np.ndarray, cfg: BathConfig, params: SystemParams, sign: int = 1
) -> float | np.ndarray:
    """Real part of I^{+-}(w) = (pi/2) J(|w|) [coth(beta|w|/2) -+ sign(w)].

    Written with exp(-beta|w|) so beta = inf needs no special path: the uphill bracket
    goes to 0 and the downhill one to 2. Zero frequency carries no rate.
    """
    w = np.asarray(omega, dtype=float)
    aw = np.abs(w)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = cfg.beta * aw
        boltz = np.exp(-x)
        denom = -np.expm1(-x)  # 1 - exp(-beta|w|)
        coth_minus_one = 2.0 * boltz / denom
        coth_plus_one = 2.0 / denom
    uphill = sign * np.sign(w) > 0
    bracket = np.where(uphill, coth_minus_one, coth_plus_one)
    density = np.asarray(spectral_density(aw, cfg, params))
    live = aw > 0.0
    out = np.zeros_like(aw)
    out[live] = 0.5 * math.pi * density[live] * bracket[live]
    return float(out) if out.ndim == 0 else out


def matrix_elements(spec: SpectralDecomposition, topology: Topology) -> np.ndarray:
    """sum over baths of |<m|X|n>|^2 in the eigenbasis.

    Two baths: X = sigma_z and X = tau_z couple independently. One bath: X = sigma_z + tau_z.
    """
    vecs = spec.eigenvectors
    if topology == "two_bath":
        operators = [SIGMA_Z, TAU_Z]
    else:
        operators = [SIGMA_Z + TAU_Z]

    weights = np.zeros((4, 4))
    for op in operators:
        elements = vecs.T @ op @ vecs
        elements[np.abs(elements) < MATRIX_ELEMENT_ZERO] = 0.0
        weights += np.abs(elements) ** 2
    return weights


def transition_rates_first_principles(spec: SpectralDecomposition, cfg: BathConfig) -> np.ndarray:
    """W_mn = 2 Re Gamma^+_{nmmn} = 1/2 sum |<n|X|m>|^2 Re I^+(omega_mn)."""
    weights = matrix_elements(spec, cfg.topology)
    kernel = np.asarray(rate_kernel(spec.omega, cfg, spec.params, sign=1))
    rates = 0.5 * weights * kernel
    np.fill_diagonal(rates, 0.0)
    return rates


def _printed_brackets(omega: float, beta: float) -> tuple[float, float]:
    """coth(beta w/2) - 1 and coth(beta w/2) + 1 for w > 0."""
    if omega <= 0.0:
        return 0.0, 0.0
    boltz = math.exp(-beta * omega) if math.isfinite(beta) else 0.0
    denom = -math.expm1(-beta * omega) if math.isfinite(beta) else 1.0
    return 2.0 * boltz / denom, 2.0 / denom


def transition_rates_closed_form(spec: SpectralDecomposition, cfg: BathConfig) -> np.ndarray:
    """Rates from the printed closed forms (no cutoff factor, printed sqrt(v^2 + delta^2)).

    Two baths: W_31, W_21 and partners; one bath: W_42, W_21 with a 2 pi prefactor.
    Downhill partners carry coth + 1, i.e. exp(beta omega) times the uphill rate.
    """
    d, v = spec.params.delta, spec.params.v
    norm = math.sqrt(v * v + d * d)
    base = math.pi * d * d * cfg.kappa / norm if norm > 0.0 else 0.0

    rates = np.zeros((4, 4))
    w21 = spec.frequency(2, 1)
    if cfg.topology == "two_bath":
        w31 = spec.frequency(3, 1)
        up21, down21 = (base * b for b in _printed_brackets(w21, cfg.beta))
        up31, down31 = (base * b for b in _printed_brackets(w31, cfg.beta))
        # 1<->2 and 3<->4 share omega_21; 1<->3 and 2<->4 share omega_31
        for (m, n), (up, down) in {
            (2, 1): (up21, down21),
            (4, 3): (up21, down21),
            (3, 1): (up31, down31),
            (4, 2): (up31, down31),
        }.items():
            rates[m - 1, n - 1] = up
            rates[n - 1, m - 1] = down
    else:
        w42 = spec.frequency(4, 2)
        up21, down21 = (2.0 * base * b for b in _printed_brackets(w21, cfg.beta))
        up42, down42 = (2.0 * base * b for b in _printed_brackets(w42, cfg.beta))
        rates[1, 0], rates[0, 1] = up21, down21
        rates[3, 1], rates[1, 3] = up42, down42
    return rates


def closed_form_ratio(spec: SpectralDecomposition, cfg: BathConfig) -> dict[str, float | None]:
    """printed / first-principles for the two independent printed rates."""
    printed = transition_rates_closed_form(spec, cfg)
    first = transition_rates_first_principles(spec, cfg)
    keys = [(2, 1), (3, 1)] if cfg.topology == "two_bath" else [(2, 1), (4, 2)]
    ratios: dict[str, float | None] = {}
    for m, n in keys:
        fp = first[m - 1, n - 1]
        # at T=0 the uphill rates vanish; compare the downhill partners instead
        if fp == 0.0:
            fp, pr = first[n - 1, m - 1], printed[n - 1, m - 1]
            label = f"W{n}{m}"
        else:
            pr = printed[m - 1, n - 1]
            label = f"W{m}{n}"
        ratios[label] = float(pr / fp) if fp > 0.0 else None
    return ratios


def dephasing_rates(W: np.ndarray, topology: Topology) -> np.ndarray:
    """gamma_mn = 1/2 sum_k (W_km + W_kn), Lamb shift disregarded.

    For the common bath the singlet coherences are written in their printed reduced
    forms gamma_13 = W_21/2, gamma_23 = (W_12 + W_42)/2, gamma_43 = W_24/2.
    """
    outflow = W.sum(axis=0)
    gamma = 0.5 * (outflow[:, None] + outflow[None, :])
    np.fill_diagonal(gamma, 0.0)
    if topology == "single_bath":
        specials = {
            (1, 3): 0.5 * W[1, 0],
            (2, 3): 0.5 * (W[0, 1] + W[3, 1]),
            (4, 3): 0.5 * W[1, 3],
        }
        for (m, n), value in specials.items():
            gamma[m - 1, n - 1] = gamma[n - 1, m - 1] = value
    return gamma


def rate_table(spec: SpectralDecomposition, cfg: BathConfig) -> RateTable:
    """First-principles transition rates and the dephasing rates built from them."""
    W = transition_rates_first_principles(spec, cfg)
    gamma = dephasing_rates(W, cfg.topology)
    logger.debug("Rate table (%s, beta=%s, kappa=%s):\n%s", cfg.topology, cfg.beta, cfg.kappa, W)
    return RateTable(W=W, gamma=gamma, topology=cfg.topology)
