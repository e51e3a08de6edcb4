"""
Two-qubit Hamiltonian, its closed-form spectral decomposition, basis changes and the
named initial states.

Computational basis order is |++>, |+->, |-+>, |--> (eigenvectors of sigma_z tau_z).
Eigenbasis index order is fixed as 1..4 with |3> the singlet, not sorted numerically,
because every rate formula is tied to these indices.
"""

import math
from dataclasses import dataclass

import numpy as np

from app.core.errors import BasisMismatchError, InvalidStateError, UnknownPresetError
from app.models.schemas import SystemParams
from app.models.states import DensityMatrix

SQRT2 = math.sqrt(2.0)

_SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
_SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
_SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
_ID2 = np.eye(2)

SIGMA_Z = np.kron(_SIGMA_Z, _ID2)  # first spin
TAU_Z = np.kron(_ID2, _SIGMA_Z)  # second spin
SIGMA_X = np.kron(_SIGMA_X, _ID2)
TAU_X = np.kron(_ID2, _SIGMA_X)
SPIN_FLIP = np.real(np.kron(_SIGMA_Y, _SIGMA_Y))  # sigma_y (x) sigma_y is real

for _op in (SIGMA_Z, TAU_Z, SIGMA_X, TAU_X, SPIN_FLIP):
    _op.flags.writeable = False

# Named computational-basis kets
KET_UP_UP = np.array([1.0, 0.0, 0.0, 0.0])
KET_UP_DOWN = np.array([0.0, 1.0, 0.0, 0.0])
KET_TRIPLET_0 = np.array([0.0, 1.0, 1.0, 0.0]) / SQRT2  # (|ud> + |du>)/sqrt2


def pauli_operators() -> dict[str, np.ndarray]:
    """Computational-basis operators used by the model."""
    return {
        "sigma_z": SIGMA_Z,
        "tau_z": TAU_Z,
        "sigma_x": SIGMA_X,
        "tau_x": TAU_X,
        "sigma_y_sigma_y": SPIN_FLIP,
    }


@dataclass(frozen=True)
class SpectralDecomposition:
    """Closed-form eigen-decomposition of H_S.

    `eigenvectors[:, i]` is |i+1> in the computational basis and
    `omega[m, n] = E_m - E_n` (0-based indices).
    """

    params: SystemParams
    energies: np.ndarray
    r_plus: float
    r_minus: float
    s_plus: float
    s_minus: float
    eigenvectors: np.ndarray
    omega: np.ndarray

    def __post_init__(self) -> None:
        for name in ("energies", "eigenvectors", "omega"):
            getattr(self, name).flags.writeable = False

    def frequency(self, m: int, n: int) -> float:
        """omega_mn with the 1-based indices used in formulas."""
        return float(self.omega[m - 1, n - 1])

    @property
    def splitting(self) -> float:
        """sqrt(v^2 + 4 delta^2) = E_4 - E_1."""
        return float(self.energies[3] - self.energies[0])


def build_hamiltonian(params: SystemParams) -> np.ndarray:
    """H_S = -delta/2 (sigma_x + tau_x) - v/2 sigma_z tau_z in the computational basis."""
    d, v = params.delta, params.v
    return -0.5 * np.array(
        [
            [v, d, d, 0.0],
            [d, -v, 0.0, d],
            [d, 0.0, -v, d],
            [0.0, d, d, v],
        ]
    )


def diagonalize(params: SystemParams) -> SpectralDecomposition:
    """Closed-form energies E_1..E_4 and eigenvectors |1>..|4>."""
    d, v = params.delta, params.v
    root = math.sqrt(v * v + 4.0 * d * d)
    ratio = v / root if root > 0.0 else 0.0

    r_plus = 0.5 * math.sqrt(1.0 + ratio)
    r_minus = 0.5 * math.sqrt(1.0 - ratio)
    # s+ = r-, s- = -r+ ; equal to the printed s+- algebra for delta > 0
    s_plus = r_minus
    s_minus = -r_plus

    energies = np.array([-0.5 * root, -0.5 * v, 0.5 * v, 0.5 * root])
    eigenvectors = np.column_stack(
        [
            [r_plus, s_plus, s_plus, r_plus],
            np.array([-1.0, 0.0, 0.0, 1.0]) / SQRT2,
            np.array([0.0, -1.0, 1.0, 0.0]) / SQRT2,
            [r_minus, s_minus, s_minus, r_minus],
        ]
    ).astype(float)
    omega = energies[:, None] - energies[None, :]

    return SpectralDecomposition(
        params=params,
        energies=energies,
        r_plus=r_plus,
        r_minus=r_minus,
        s_plus=s_plus,
        s_minus=s_minus,
        eigenvectors=eigenvectors,
        omega=omega,
    )


def printed_s_amplitudes(params: SystemParams) -> tuple[float, float]:
    """s+- = +-delta [4 delta^2 + v (v +- sqrt(v^2 + 4 delta^2))]^(-1/2) as printed.

    Returns nan where the expression is 0/0 (delta = 0).
    """
    d, v = params.delta, params.v
    root = math.sqrt(v * v + 4.0 * d * d)
    out = []
    for sign in (1.0, -1.0):
        denom = 4.0 * d * d + v * (v + sign * root)
        out.append(sign * d / math.sqrt(denom) if denom > 0.0 else math.nan)
    return out[0], out[1]


# ============================================================================
# Basis changes
# ============================================================================


def eigen_to_computational(rho: np.ndarray, spec: SpectralDecomposition) -> np.ndarray:
    """V rho V^dagger for a single matrix or a stack (..., 4, 4)."""
    vecs = spec.eigenvectors
    return vecs @ rho @ vecs.T


def computational_to_eigen(rho: np.ndarray, spec: SpectralDecomposition) -> np.ndarray:
    """V^dagger rho V for a single matrix or a stack (..., 4, 4)."""
    vecs = spec.eigenvectors
    return vecs.T @ rho @ vecs


def to_eigenbasis(rho: DensityMatrix, spec: SpectralDecomposition) -> DensityMatrix:
    """Computational-basis density matrix -> eigenbasis."""
    if rho.basis != "computational":
        raise BasisMismatchError(f"expected computational basis, got {rho.basis}")
    return DensityMatrix(computational_to_eigen(rho.entries, spec), basis="eigen")


def from_eigenbasis(rho: DensityMatrix, spec: SpectralDecomposition) -> DensityMatrix:
    """Eigenbasis density matrix -> computational basis."""
    if rho.basis != "eigen":
        raise BasisMismatchError(f"expected eigen basis, got {rho.basis}")
    return DensityMatrix(eigen_to_computational(rho.entries, spec), basis="computational")


# ============================================================================
# Named states
# ============================================================================


def thermal_weights(energies: np.ndarray, beta: float) -> np.ndarray:
    """exp(-beta E_i)/Z, with beta = inf giving the (possibly degenerate) ground state."""
    energies = np.asarray(energies, dtype=float)
    shifted = energies - energies.min()
    if math.isinf(beta):
        weights = (shifted <= 1e-12 * max(1.0, float(np.abs(energies).max()))).astype(float)
    else:
        weights = np.exp(-beta * shifted)
    return weights / weights.sum()


def _projector(ket: np.ndarray) -> np.ndarray:
    ket = np.asarray(ket, dtype=complex)
    return np.outer(ket, ket.conj())


def superposition_state(
    a: complex, b: complex, phi_perp: np.ndarray, spec: SpectralDecomposition
) -> DensityMatrix:
    """Pure state A|phi_perp> + B|3>; phi_perp is a computational-basis unit vector
    orthogonal to the singlet."""
    phi = np.asarray(phi_perp, dtype=complex)
    singlet = spec.eigenvectors[:, 2]
    if abs(np.linalg.norm(phi) - 1.0) > 1e-10:
        raise InvalidStateError("phi_perp must be normalised")
    if abs(np.vdot(singlet, phi)) > 1e-10:
        raise InvalidStateError("phi_perp must be orthogonal to the singlet |3>")
    if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > 1e-10:
        raise InvalidStateError("|A|^2 + |B|^2 must equal 1")
    ket = a * phi + b * singlet
    return DensityMatrix(computational_to_eigen(_projector(ket), spec), basis="eigen")


def make_state(
    preset: str,
    spec: SpectralDecomposition,
    *,
    beta: float | None = None,
    matrix: np.ndarray | None = None,
) -> DensityMatrix:
    """Named initial state as an eigenbasis density matrix.

    `beta` is required for `gibbs`; `matrix` (computational basis) for `custom`.
    """
    rho_a = _projector(KET_TRIPLET_0)
    rho_b = _projector(KET_UP_UP)
    rho_c = _projector(spec.eigenvectors[:, 2])

    if preset == "psi_a":
        comp = rho_a
    elif preset == "psi_b":
        comp = rho_b
    elif preset == "psi_c":
        comp = rho_c
    elif preset == "psi_d":
        comp = _projector(KET_UP_DOWN)
    elif preset == "mix1":
        comp = 0.5 * (rho_a + rho_c)
    elif preset == "mix2":
        comp = 0.5 * (rho_a + rho_b)
    elif preset == "gibbs":
        if beta is None:
            raise InvalidStateError("gibbs preset needs beta")
        return DensityMatrix(np.diag(thermal_weights(spec.energies, beta)), basis="eigen")
    elif preset == "custom":
        if matrix is None:
            raise InvalidStateError("custom preset needs an explicit matrix")
        comp = DensityMatrix(np.asarray(matrix, dtype=complex), basis="computational").entries
    else:
        raise UnknownPresetError(f"unknown state preset: {preset!r}")

    return DensityMatrix(computational_to_eigen(comp, spec), basis="eigen")
