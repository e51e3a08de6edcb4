"""
Tests for the two-qubit Hamiltonian, its closed-form eigensystem and the named states.
Run with: pytest test_spectral_model.py
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from app.core.errors import BasisMismatchError, InvalidStateError, UnknownPresetError
from app.models.schemas import SystemParams
from app.models.states import DensityMatrix
from app.services.spectral_model import (
    KET_TRIPLET_0,
    build_hamiltonian,
    diagonalize,
    eigen_to_computational,
    from_eigenbasis,
    make_state,
    pauli_operators,
    printed_s_amplitudes,
    superposition_state,
    thermal_weights,
    to_eigenbasis,
)

PARAM_CASES = [
    SystemParams(delta=1.0, v=0.7),
    SystemParams(delta=0.3, v=2.5),
    SystemParams(delta=1.0, v=0.0),
    SystemParams(delta=0.0, v=1.0),
]


# ============================================================================
# Eigensystem
# ============================================================================


@pytest.mark.parametrize("params", PARAM_CASES)
def test_eigenvectors_solve_eigen_equation(params):
    """H |i> = E_i |i> for every closed-form pair."""
    spec = diagonalize(params)
    h = build_hamiltonian(params)
    residual = h @ spec.eigenvectors - spec.eigenvectors * spec.energies[None, :]
    assert np.max(np.abs(residual)) < 1e-12


def test_eigensystem_random_parameters():
    rng = np.random.default_rng(23)
    for _ in range(100):
        params = SystemParams(delta=rng.uniform(0.0, 2.0), v=rng.uniform(0.0, 2.0))
        spec = diagonalize(params)
        vecs = spec.eigenvectors
        residual = build_hamiltonian(params) @ vecs - vecs * spec.energies[None, :]
        assert np.max(np.abs(residual)) < 1e-12, params
        assert np.allclose(vecs.T @ vecs, np.eye(4), atol=1e-12)
        assert np.all(np.diff(spec.energies) >= 0.0)


@pytest.mark.parametrize("params", PARAM_CASES)
def test_eigenvectors_are_orthonormal(params):
    spec = diagonalize(params)
    gram = spec.eigenvectors.T @ spec.eigenvectors
    assert np.allclose(gram, np.eye(4), atol=1e-12)


def test_reference_energies_and_amplitudes():
    """delta = 1, v = 0.7."""
    spec = diagonalize(SystemParams(delta=1.0, v=0.7))
    root = math.sqrt(0.49 + 4.0)
    assert spec.energies == pytest.approx([-root / 2, -0.35, 0.35, root / 2], rel=1e-14)
    assert spec.splitting == pytest.approx(2.118962, rel=1e-6)
    assert spec.r_plus == pytest.approx(0.576704, abs=1e-6)
    assert spec.r_minus == pytest.approx(0.409160, abs=1e-6)
    assert spec.frequency(2, 1) == pytest.approx(0.709481, abs=1e-6)
    assert spec.frequency(3, 1) == pytest.approx(1.409481, abs=1e-6)
    assert spec.frequency(4, 3) == pytest.approx(spec.frequency(2, 1), rel=1e-14)
    assert spec.frequency(4, 2) == pytest.approx(spec.frequency(3, 1), rel=1e-14)
    assert spec.frequency(1, 2) == -spec.frequency(2, 1)


def test_singlet_is_third_level():
    spec = diagonalize(SystemParams(delta=1.0, v=0.7))
    singlet = np.array([0.0, -1.0, 1.0, 0.0]) / math.sqrt(2.0)
    assert np.allclose(spec.eigenvectors[:, 2], singlet)
    assert spec.energies[2] == pytest.approx(0.35)


@pytest.mark.parametrize("params", PARAM_CASES[:3])
def test_printed_amplitudes_match_stable_form(params):
    spec = diagonalize(params)
    s_plus, s_minus = printed_s_amplitudes(params)
    assert s_plus == pytest.approx(spec.s_plus, rel=1e-12)
    assert s_minus == pytest.approx(spec.s_minus, rel=1e-12)


def test_printed_amplitudes_undefined_without_tunneling():
    """s- is 0/0 at delta = 0; the stable form still gives a valid vector."""
    params = SystemParams(delta=0.0, v=1.0)
    s_plus, s_minus = printed_s_amplitudes(params)
    assert s_plus == 0.0
    assert math.isnan(s_minus)

    spec = diagonalize(params)
    assert spec.s_plus == 0.0
    assert spec.s_minus == pytest.approx(-1.0 / math.sqrt(2.0))


def test_no_ising_coupling_gives_equal_amplitudes():
    spec = diagonalize(SystemParams(delta=1.0, v=0.0))
    assert spec.r_plus == pytest.approx(0.5)
    assert spec.r_minus == pytest.approx(0.5)
    assert spec.energies == pytest.approx([-1.0, 0.0, 0.0, 1.0])


def test_arrays_are_read_only():
    spec = diagonalize(SystemParams(delta=1.0, v=0.7))
    with pytest.raises(ValueError):
        spec.energies[0] = 0.0
    with pytest.raises(ValueError):
        spec.eigenvectors[0, 0] = 0.0


def test_negative_parameters_rejected():
    with pytest.raises(ValidationError):
        SystemParams(delta=-1.0, v=0.7)
    with pytest.raises(ValidationError):
        SystemParams(delta=1.0, v=math.inf)


# ============================================================================
# Basis changes and states
# ============================================================================


def test_basis_round_trip_preserves_state():
    rng = np.random.default_rng(7)
    spec = diagonalize(SystemParams(delta=0.8, v=1.3))
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real

    comp = DensityMatrix(rho, basis="computational")
    back = from_eigenbasis(to_eigenbasis(comp, spec), spec)
    assert back.basis == "computational"
    assert np.allclose(back.entries, rho, atol=1e-12)


def test_basis_mismatch_raises():
    spec = diagonalize(SystemParams(delta=1.0, v=0.7))
    eigen = make_state("psi_a", spec)
    with pytest.raises(BasisMismatchError):
        to_eigenbasis(eigen, spec)
    comp = from_eigenbasis(eigen, spec)
    with pytest.raises(BasisMismatchError):
        from_eigenbasis(comp, spec)


def test_singlet_preset_is_level_three():
    spec = diagonalize(SystemParams(delta=1.0, v=0.7))
    rho = make_state("psi_c", spec)
    assert rho.basis == "eigen"
    assert np.allclose(rho.entries, np.diag([0.0, 0.0, 1.0, 0.0]), atol=1e-14)


def test_triplet_preset_lives_on_levels_one_and_four():
    spec = diagonalize(SystemParams(delta=1.0, v=0.7))
    pops = make_state("psi_a", spec).populations
    assert pops[0] == pytest.approx(2.0 * spec.r_minus**2)
    assert pops[3] == pytest.approx(2.0 * spec.r_plus**2)
    assert pops[1] == pytest.approx(0.0, abs=1e-14)
    assert pops[2] == pytest.approx(0.0, abs=1e-14)


def test_superposition_reproduces_up_down():
    """(|T0> - |S>)/sqrt2 with |S> = (|du> - |ud>)/sqrt2 is |ud>."""
    spec = diagonalize(SystemParams(delta=1.0, v=0.7))
    built = superposition_state(1 / math.sqrt(2), -1 / math.sqrt(2), KET_TRIPLET_0, spec)
    assert np.allclose(built.entries, make_state("psi_d", spec).entries, atol=1e-12)


def test_superposition_rejects_singlet_overlap():
    spec = diagonalize(SystemParams(delta=1.0, v=0.7))
    with pytest.raises(InvalidStateError):
        superposition_state(1.0, 0.0, np.array([0.0, 1.0, 0.0, 0.0]), spec)
    with pytest.raises(InvalidStateError):
        superposition_state(1.0, 1.0, KET_TRIPLET_0, spec)


def test_mixtures_are_convex_combinations():
    spec = diagonalize(SystemParams(delta=1.0, v=0.7))
    a, b, c = (make_state(name, spec).entries for name in ("psi_a", "psi_b", "psi_c"))
    assert np.allclose(make_state("mix1", spec).entries, 0.5 * (a + c), atol=1e-14)
    assert np.allclose(make_state("mix2", spec).entries, 0.5 * (a + b), atol=1e-14)


def test_gibbs_state():
    spec = diagonalize(SystemParams(delta=1.0, v=0.7))
    rho = make_state("gibbs", spec, beta=10.0)
    weights = np.exp(-10.0 * spec.energies)
    assert rho.populations == pytest.approx(weights / weights.sum(), rel=1e-12)

    ground = make_state("gibbs", spec, beta=math.inf)
    assert np.allclose(ground.entries, np.diag([1.0, 0.0, 0.0, 0.0]))


def test_zero_temperature_weights_split_degenerate_ground():
    spec = diagonalize(SystemParams(delta=0.0, v=1.0))
    assert thermal_weights(spec.energies, math.inf) == pytest.approx([0.5, 0.5, 0.0, 0.0])


def test_custom_state_validated():
    spec = diagonalize(SystemParams(delta=1.0, v=0.7))
    bell = np.zeros((4, 4))
    bell[np.ix_([1, 2], [1, 2])] = 0.5
    rho = make_state("custom", spec, matrix=bell)
    assert np.allclose(eigen_to_computational(rho.entries, spec), bell, atol=1e-14)

    with pytest.raises(InvalidStateError):
        make_state("custom", spec, matrix=2.0 * bell)
    with pytest.raises(InvalidStateError):
        make_state("custom", spec)


def test_unknown_state_preset():
    spec = diagonalize(SystemParams(delta=1.0, v=0.7))
    with pytest.raises(UnknownPresetError):
        make_state("psi_z", spec)


def test_density_matrix_validation():
    with pytest.raises(InvalidStateError):
        DensityMatrix(np.eye(4))  # trace 4
    with pytest.raises(InvalidStateError):
        DensityMatrix(np.diag([1.5, -0.5, 0.0, 0.0]))
    with pytest.raises(InvalidStateError):
        DensityMatrix(np.eye(3) / 3.0)
    nonhermitian = np.diag([0.5, 0.5, 0.0, 0.0]).astype(complex)
    nonhermitian[0, 1] = 0.1
    with pytest.raises(InvalidStateError):
        DensityMatrix(nonhermitian)


def test_pauli_operators_rebuild_hamiltonian():
    ops = pauli_operators()
    sy = np.array([[0.0, -1j], [1j, 0.0]])
    assert np.array_equal(ops["sigma_z"], np.diag([1.0, 1.0, -1.0, -1.0]))
    assert np.array_equal(ops["tau_z"], np.diag([1.0, -1.0, 1.0, -1.0]))
    assert np.allclose(ops["sigma_y_sigma_y"], np.kron(sy, sy))

    params = SystemParams(delta=0.8, v=1.3)
    h = -0.5 * params.delta * (ops["sigma_x"] + ops["tau_x"])
    h = h - 0.5 * params.v * ops["sigma_z"] @ ops["tau_z"]
    assert np.allclose(h, build_hamiltonian(params), atol=1e-15)
