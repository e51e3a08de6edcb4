"""
Immutable numeric containers: density matrices and trajectories.
"""

from dataclasses import dataclass, field
from typing import Iterator, Literal

import numpy as np

from app.core.errors import InvalidStateError

Basis = Literal["computational", "eigen"]

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9


def check_density_matrix(entries: np.ndarray) -> None:
    """Raise InvalidStateError unless entries is a 4x4 Hermitian, trace-1, PSD matrix."""
    if entries.shape != (4, 4):
        raise InvalidStateError(f"density matrix must be 4x4, got {entries.shape}")
    if not np.all(np.isfinite(entries)):
        raise InvalidStateError("density matrix has non-finite entries")
    herm_err = float(np.max(np.abs(entries - entries.conj().T)))
    if herm_err > HERMITIAN_TOL:
        raise InvalidStateError(f"not Hermitian (max deviation {herm_err:.3e})")
    trace = complex(np.trace(entries))
    if abs(trace - 1.0) > TRACE_TOL:
        raise InvalidStateError(f"trace is {trace.real:.12g}, expected 1")
    min_eig = float(np.min(np.linalg.eigvalsh(0.5 * (entries + entries.conj().T))))
    if min_eig < -PSD_TOL:
        raise InvalidStateError(f"not positive semidefinite (min eigenvalue {min_eig:.3e})")


def _frozen(array: np.ndarray, dtype: type = complex) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class DensityMatrix:
    """4x4 density matrix tagged with the basis its entries are expressed in."""

    entries: np.ndarray
    basis: Basis = "eigen"

    def __post_init__(self) -> None:
        entries = _frozen(self.entries)
        check_density_matrix(entries)
        object.__setattr__(self, "entries", entries)

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.entries)).copy()

    def __getitem__(self, index: tuple[int, int]) -> complex:
        return complex(self.entries[index])


@dataclass(frozen=True)
class Trajectory:
    """Eigenbasis density matrices sampled on an increasing time grid."""

    times: np.ndarray
    rho: np.ndarray  # shape (n, 4, 4), eigenbasis
    provenance: dict[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "times", _frozen(self.times, float))
        object.__setattr__(self, "rho", _frozen(self.rho))

    def __len__(self) -> int:
        return len(self.times)

    def __iter__(self) -> Iterator[DensityMatrix]:
        return iter(self.states)

    @property
    def states(self) -> list[DensityMatrix]:
        """Validated DensityMatrix views of every sample."""
        return [DensityMatrix(r, basis="eigen") for r in self.rho]

    def state(self, index: int) -> DensityMatrix:
        return DensityMatrix(self.rho[index], basis="eigen")

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.diagonal(self.rho, axis1=1, axis2=2)).copy()
