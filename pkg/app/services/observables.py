"""
Entanglement and mixedness measures: Wootters concurrence, von Neumann entropy (bits),
purity and linear entropy.

All batch helpers take (..., 4, 4) arrays; the public single-state functions take a
DensityMatrix and validate its basis.
"""

from dataclasses import dataclass

import numpy as np

from app.core.errors import BasisMismatchError, InvalidStateError
from app.models.states import PSD_TOL, DensityMatrix, Trajectory
from app.services.spectral_model import SPIN_FLIP, SpectralDecomposition, eigen_to_computational

SPECTRUM_FLOOR = 1e-14


@dataclass(frozen=True)
class ObservableSample:
    t: float
    concurrence: float
    entropy: float
    purity: float


@dataclass(frozen=True)
class ObservableSeries:
    """Column arrays of C, S (bits) and Tr rho^2 along a trajectory."""

    times: np.ndarray
    concurrence: np.ndarray
    entropy: np.ndarray
    purity: np.ndarray

    def rows(self) -> list[ObservableSample]:
        return [
            ObservableSample(float(t), float(c), float(s), float(p))
            for t, c, s, p in zip(self.times, self.concurrence, self.entropy, self.purity)
        ]


def _clipped_spectrum(matrices: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues with [-1e-9, 0) snapped to 0; more negative is an error."""
    values = np.linalg.eigvalsh(matrices)
    if np.any(values < -PSD_TOL):
        raise InvalidStateError(f"matrix is not positive semidefinite (min {values.min():.3e})")
    return np.clip(values, 0.0, None)


def _sqrtm(matrices: np.ndarray) -> np.ndarray:
    values, vecs = np.linalg.eigh(matrices)
    if np.any(values < -PSD_TOL):
        raise InvalidStateError(f"matrix is not positive semidefinite (min {values.min():.3e})")
    # below the floor an eigenvalue is rounding noise around zero
    roots = np.sqrt(np.where(values > SPECTRUM_FLOOR, values, 0.0))
    return (vecs * roots[..., None, :]) @ np.conj(np.swapaxes(vecs, -1, -2))


def _wootters_roots(rho: np.ndarray) -> np.ndarray:
    """Descending square roots of the Wootters eigenvalues.

    They are the singular values of sqrt(rho) sqrt(rho~), with
    sqrt(rho~) = (sy x sy) sqrt(rho)* (sy x sy); working with the roots directly keeps
    pure states exact where sqrt(eig(rho rho~)) would amplify rounding.
    """
    root = _sqrtm(np.asarray(rho, dtype=complex))
    flipped_root = SPIN_FLIP @ np.conj(root) @ SPIN_FLIP
    return np.linalg.svd(root @ flipped_root, compute_uv=False)


def wootters_eigenvalues_batch(rho: np.ndarray) -> np.ndarray:
    """Descending eigenvalues of rho (sy x sy) rho* (sy x sy), computational basis."""
    return _wootters_roots(rho) ** 2


def concurrence_batch(rho: np.ndarray) -> np.ndarray:
    lam = _wootters_roots(rho)
    return np.clip(lam[..., 0] - lam[..., 1] - lam[..., 2] - lam[..., 3], 0.0, 1.0)


def entropy_batch(rho: np.ndarray) -> np.ndarray:
    """-sum p log2 p over eigenvalues, 0 log 0 = 0."""
    p = _clipped_spectrum(np.asarray(rho, dtype=complex))
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0.0, -p * np.log2(np.where(p > 0.0, p, 1.0)), 0.0)
    return np.clip(terms.sum(axis=-1), 0.0, 2.0)


def purity_batch(rho: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(np.asarray(rho)) ** 2, axis=(-2, -1))


def _computational(rho: DensityMatrix, spec: SpectralDecomposition | None) -> np.ndarray:
    if rho.basis == "computational":
        return np.asarray(rho.entries)
    if spec is None:
        raise BasisMismatchError("eigenbasis input needs the spectral decomposition")
    return eigen_to_computational(rho.entries, spec)


def wootters_eigenvalues(
    rho: DensityMatrix, spec: SpectralDecomposition | None = None
) -> np.ndarray:
    return wootters_eigenvalues_batch(_computational(rho, spec))


def concurrence(rho: DensityMatrix, spec: SpectralDecomposition | None = None) -> float:
    """max(0, sqrt(l1) - sqrt(l2) - sqrt(l3) - sqrt(l4)).

    The spin flip uses complex conjugation in the computational basis, so eigenbasis
    input is transformed first (pass `spec`).
    """
    return float(concurrence_batch(_computational(rho, spec)))


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """Entropy in bits; basis independent."""
    return float(entropy_batch(rho.entries))


def purity(rho: DensityMatrix) -> float:
    return float(purity_batch(rho.entries))


def linear_entropy(rho: DensityMatrix) -> float:
    return 1.0 - purity(rho)


def observable_series(traj: Trajectory, spec: SpectralDecomposition) -> ObservableSeries:
    """C, S and purity at every sample of an eigenbasis trajectory."""
    comp = eigen_to_computational(traj.rho, spec)
    return ObservableSeries(
        times=np.array(traj.times),
        concurrence=concurrence_batch(comp),
        entropy=entropy_batch(traj.rho),
        purity=purity_batch(traj.rho),
    )
