"""
Tests for the ohmic transition rates and dephasing rates.
Run with: pytest test_bath_rates.py
"""

import math
import warnings

import numpy as np
import pytest

from app.models.schemas import BathConfig, SystemParams
from app.services.bath_rates import (
    RateTable,
    closed_form_ratio,
    dephasing_rates,
    matrix_elements,
    rate_kernel,
    rate_table,
    spectral_density,
    transition_rates_closed_form,
    transition_rates_first_principles,
)
from app.services.numerics_oracle import rate_quadrature, rate_real_part
from app.services.spectral_model import diagonalize

PARAMS = SystemParams(delta=1.0, v=0.7)
SPEC = diagonalize(PARAMS)
R = SPEC.splitting
OMEGA_C = 100.0


def bath(topology: str, beta: float = 10.0, kappa: float = 0.01) -> BathConfig:
    return BathConfig(topology=topology, kappa=kappa, beta=beta)


def uphill(omega: float, beta: float) -> float:
    """coth(beta w / 2) - 1."""
    return 2.0 / math.expm1(beta * omega)


# ============================================================================
# Spectral density and kernel
# ============================================================================


def test_spectral_density_default_cutoff():
    cfg = bath("two_bath")
    assert cfg.cutoff(PARAMS) == pytest.approx(OMEGA_C)
    assert spectral_density(0.5, cfg, PARAMS) == pytest.approx(0.01 * 0.5 * math.exp(-0.005))
    assert spectral_density(0.0, cfg, PARAMS) == 0.0


def test_spectral_density_rejects_negative_frequency():
    with pytest.raises(ValueError):
        spectral_density(-0.1, bath("two_bath"), PARAMS)


def test_spectral_density_needs_cutoff_source():
    with pytest.raises(ValueError):
        spectral_density(0.5, bath("two_bath"))
    explicit = BathConfig(topology="two_bath", kappa=0.01, beta=1.0, omega_c=5.0)
    assert spectral_density(0.5, explicit) == pytest.approx(0.005 * math.exp(-0.1))


def test_kernel_zero_frequency_and_zero_temperature():
    cold = bath("two_bath", beta=math.inf)
    assert rate_kernel(0.0, cold, PARAMS) == 0.0
    assert rate_kernel(0.7, cold, PARAMS) == 0.0
    downhill = rate_kernel(-0.7, cold, PARAMS)
    assert downhill == pytest.approx(math.pi * 0.01 * 0.7 * math.exp(-0.007))


def test_kernel_is_silent_at_zero_frequency():
    omegas = np.array([[0.0, 0.7], [-0.7, 0.0]])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        for beta in (0.1, 10.0, math.inf):
            out = rate_kernel(omegas, bath("single_bath", beta=beta), PARAMS)
            assert out[0, 0] == out[1, 1] == 0.0
            assert out[1, 0] > 0.0
            rate_table(SPEC, bath("two_bath", beta=beta))


def test_kernel_matches_direct_evaluation():
    cfg = bath("single_bath", beta=3.0)
    for omega in (0.2, -0.2, 1.4, -1.4):
        assert rate_kernel(omega, cfg, PARAMS) == pytest.approx(
            rate_real_part(omega, cfg, PARAMS), rel=1e-12
        )


# ============================================================================
# Transition rates
# ============================================================================


def test_two_bath_zero_pattern():
    W = rate_table(SPEC, bath("two_bath")).W
    assert W[3, 0] == W[0, 3] == 0.0
    assert W[2, 1] == W[1, 2] == 0.0
    assert np.all(np.diag(W) == 0.0)
    assert np.all(W[[1, 2, 3, 3], [0, 0, 1, 2]] > 0.0)


def test_matrix_elements():
    two = matrix_elements(SPEC, "two_bath")
    one = matrix_elements(SPEC, "single_bath")
    assert np.allclose(two, two.T, atol=1e-15)
    assert two[3, 0] == two[2, 1] == 0.0
    assert np.all(one[2, :] == 0.0) and np.all(one[:, 2] == 0.0)
    # a common bath adds the two amplitudes coherently
    assert one[1, 0] == pytest.approx(2.0 * two[1, 0], rel=1e-12)
    assert one[3, 1] == pytest.approx(2.0 * two[3, 1], rel=1e-12)


def test_single_bath_zero_pattern():
    """Level 3 is decoupled and 1 <-> 4 is forbidden in a common bath."""
    W = rate_table(SPEC, bath("single_bath")).W
    assert np.all(W[2, :] == 0.0)
    assert np.all(W[:, 2] == 0.0)
    assert W[3, 0] == W[0, 3] == 0.0
    assert W[1, 0] > 0.0 and W[3, 1] > 0.0


@pytest.mark.parametrize("topology", ["two_bath", "single_bath"])
@pytest.mark.parametrize("beta", [0.1, 1.0, 10.0, 20.0])
def test_detailed_balance(topology, beta):
    W = rate_table(SPEC, bath(topology, beta=beta)).W
    for m in range(4):
        for n in range(4):
            if W[m, n] > 0.0:
                assert W[n, m] / W[m, n] == pytest.approx(
                    math.exp(beta * SPEC.omega[m, n]), rel=1e-12
                )


def test_detailed_balance_random_parameters():
    rng = np.random.default_rng(41)
    for _ in range(100):
        params = SystemParams(delta=rng.uniform(0.05, 2.0), v=rng.uniform(0.0, 2.0))
        spec = diagonalize(params)
        beta = rng.uniform(0.1, 20.0)
        topology = "two_bath" if rng.random() < 0.5 else "single_bath"
        W = rate_table(spec, bath(topology, beta=beta)).W
        for m in range(4):
            for n in range(4):
                if W[m, n] > 0.0 and W[n, m] > 0.0:
                    assert W[n, m] / W[m, n] == pytest.approx(
                        math.exp(beta * spec.omega[m, n]), rel=1e-10
                    )


def test_two_bath_prefactors():
    rates = rate_table(SPEC, bath("two_bath"))
    base = math.pi * 0.01 / (2.0 * R)
    for (m, n) in [(2, 1), (3, 1)]:
        omega = SPEC.frequency(m, n)
        expected = base * math.exp(-omega / OMEGA_C) * uphill(omega, 10.0)
        assert rates.rate(m, n) == pytest.approx(expected, rel=1e-12)
    assert rates.rate(4, 3) == pytest.approx(rates.rate(2, 1), rel=1e-12)
    assert rates.rate(4, 2) == pytest.approx(rates.rate(3, 1), rel=1e-12)


def test_single_bath_rates_double_two_bath():
    two = rate_table(SPEC, bath("two_bath"))
    one = rate_table(SPEC, bath("single_bath"))
    assert one.rate(2, 1) == pytest.approx(2.0 * two.rate(2, 1), rel=1e-12)
    omega = SPEC.frequency(4, 2)
    expected = math.pi * 0.01 / R * math.exp(-omega / OMEGA_C) * uphill(omega, 10.0)
    assert one.rate(4, 2) == pytest.approx(expected, rel=1e-12)


def test_zero_temperature_rates():
    rates = rate_table(SPEC, bath("two_bath", beta=math.inf))
    assert rates.rate(2, 1) == 0.0
    assert rates.rate(3, 1) == 0.0
    omega = SPEC.frequency(2, 1)
    expected = 2.0 * math.pi * 0.01 / (2.0 * R) * math.exp(-omega / OMEGA_C)
    assert rates.rate(1, 2) == pytest.approx(expected, rel=1e-12)


def test_rates_linear_in_coupling():
    weak = rate_table(SPEC, bath("single_bath", kappa=0.01))
    strong = rate_table(SPEC, bath("single_bath", kappa=0.02))
    assert np.allclose(strong.W, 2.0 * weak.W, rtol=1e-12, atol=0.0)
    assert np.allclose(weak.scaled(2.0).gamma, strong.gamma, rtol=1e-12, atol=0.0)


def test_generator_conserves_probability():
    rates = rate_table(SPEC, bath("single_bath"))
    assert np.allclose(rates.generator.sum(axis=0), 0.0, atol=1e-15)


def test_rate_table_is_read_only():
    rates = rate_table(SPEC, bath("two_bath"))
    with pytest.raises(ValueError):
        rates.W[0, 1] = 1.0


@pytest.mark.parametrize("topology", ["two_bath", "single_bath"])
def test_closed_form_ratio(topology):
    """Printed rates lack the cutoff factor and use sqrt(v^2 + delta^2) for R/2."""
    cfg = bath(topology)
    ratios = closed_form_ratio(SPEC, cfg)
    scale = 2.0 * R / math.sqrt(0.49 + 1.0)
    key = "W31" if topology == "two_bath" else "W42"
    assert set(ratios) == {"W21", key}
    assert ratios["W21"] == pytest.approx(
        scale * math.exp(SPEC.frequency(2, 1) / OMEGA_C), rel=1e-12
    )
    assert ratios["W21"] == pytest.approx(3.4966, abs=1e-4)
    assert ratios[key] == pytest.approx(
        scale * math.exp(SPEC.frequency(3, 1) / OMEGA_C), rel=1e-12
    )


def test_closed_form_ratio_at_zero_temperature_uses_downhill():
    ratios = closed_form_ratio(SPEC, bath("two_bath", beta=math.inf))
    assert set(ratios) == {"W12", "W13"}
    assert all(value is not None and value > 1.0 for value in ratios.values())


def test_closed_form_shares_zero_pattern():
    for topology in ("two_bath", "single_bath"):
        cfg = bath(topology)
        printed = transition_rates_closed_form(SPEC, cfg)
        first = transition_rates_first_principles(SPEC, cfg)
        assert np.array_equal(printed > 0.0, first > 0.0)


@pytest.mark.parametrize("omega_key", [(2, 1), (3, 1)])
@pytest.mark.parametrize("direction", [1.0, -1.0])
def test_rates_match_quadrature(omega_key, direction):
    """Closed-form kernel against the regularised time integral."""
    cfg = bath("two_bath")
    omega = direction * SPEC.frequency(*omega_key)
    expected = rate_kernel(omega, cfg, PARAMS)
    assert rate_quadrature(omega, cfg, PARAMS) == pytest.approx(expected, rel=1e-8)


def test_quadrature_rejects_bad_sign():
    with pytest.raises(ValueError):
        rate_quadrature(0.7, bath("two_bath"), PARAMS, sign=0)


# ============================================================================
# Dephasing
# ============================================================================


def test_dephasing_is_half_total_outflow():
    W = rate_table(SPEC, bath("two_bath")).W
    gamma = dephasing_rates(W, "two_bath")
    outflow = W.sum(axis=0)
    for m in range(4):
        for n in range(4):
            if m != n:
                assert gamma[m, n] == pytest.approx(0.5 * (outflow[m] + outflow[n]), rel=1e-14)
    assert np.all(np.diag(gamma) == 0.0)


def test_single_bath_reduced_forms_agree_with_general_sum():
    W = rate_table(SPEC, bath("single_bath")).W
    reduced = dephasing_rates(W, "single_bath")
    general = dephasing_rates(W, "two_bath")
    assert np.allclose(reduced, general, rtol=1e-14, atol=0.0)


def test_dephasing_hierarchy_common_bath():
    """Singlet coherence gamma_13 is orders of magnitude slower than gamma_12."""
    rates = rate_table(SPEC, bath("single_bath", beta=10.0))
    ratio = rates.dephasing(1, 2) / rates.dephasing(1, 3)
    assert 300.0 < ratio < 3000.0
    assert ratio == pytest.approx(1.0 + math.exp(10.0 * SPEC.frequency(2, 1)), rel=1e-3)


def test_zero_temperature_singlet_coherence_frozen():
    rates = rate_table(SPEC, bath("single_bath", beta=math.inf))
    assert rates.dephasing(1, 3) == 0.0
    assert rates.dephasing(4, 3) > 0.0
    assert rates.dephasing(2, 3) > 0.0


def test_rate_table_accessors():
    W = np.zeros((4, 4))
    W[1, 0], W[0, 1] = 0.2, 0.5
    table = RateTable(W, dephasing_rates(W, "two_bath"), "two_bath")
    assert table.rate(2, 1) == 0.2
    assert table.dephasing(1, 2) == pytest.approx(0.5 * (0.2 + 0.5))
