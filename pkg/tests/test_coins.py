"""Unit tests for coin construction and coin-state handling."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.shared.error_handling import DimensionMismatchError, NormalizationError, ParameterError
from src.shared.models import CoinOperator
from src.walk.coins import (
    build_coin2,
    build_coin3,
    coin_eigenbasis,
    compose_coin_state,
    decompose_coin_state,
    normalized_coin_state,
    random_coin_state,
    resolve_coin_state,
)

GROVER_RHO = 1.0 / np.sqrt(3.0)

rhos = st.floats(min_value=0.01, max_value=0.99)
alphas = st.floats(min_value=0.0, max_value=2.0 * np.pi, exclude_max=True)


@pytest.fixture
def grover():
    """Grover coin, rho = 1/sqrt(3), alpha = 0."""
    return build_coin3(GROVER_RHO, 0.0)


@pytest.mark.unit
class TestTwoStateCoin:
    """Test suite for the two-state coin family."""

    def test_hadamard_entries(self):
        coin = build_coin2(1.0 / np.sqrt(2.0))
        expected = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
        assert np.allclose(coin.matrix, expected, atol=1e-15)
        assert coin.labels == ("L", "R")

    def test_diagonal_coin_at_rho_one(self):
        coin = build_coin2(1.0)
        assert np.allclose(coin.matrix, np.diag([1.0, -1.0]))

    @pytest.mark.parametrize("rho", [0.0, -0.2, 1.0000001])
    def test_rejects_rho_outside_range(self, rho):
        with pytest.raises(ParameterError):
            build_coin2(rho)

    @pytest.mark.property
    @settings(deadline=None)
    @given(rho=st.floats(min_value=1e-6, max_value=1.0))
    def test_unitary(self, rho):
        assert build_coin2(rho).unitarity_residual() <= 1e-12


@pytest.mark.unit
class TestLazyCoin:
    """Test suite for the lazy coin family."""

    def test_grover_matrix(self, grover):
        expected = 2.0 / 3.0 * np.ones((3, 3)) - np.eye(3)
        assert np.allclose(grover.matrix, expected, atol=1e-15)
        assert grover.labels == ("L", "S", "R")

    @pytest.mark.parametrize("rho, alpha", [(1.0, 0.0), (0.0, 0.0), (0.5, 2.0 * np.pi), (0.5, -0.1)])
    def test_rejects_parameters_outside_range(self, rho, alpha):
        with pytest.raises(ParameterError):
            build_coin3(rho, alpha)

    @pytest.mark.property
    @settings(deadline=None)
    @given(rho=rhos, alpha=alphas)
    def test_unitary_hermitian_with_spectrum_plus_minus_minus(self, rho, alpha):
        coin = build_coin3(rho, alpha)
        assert coin.unitarity_residual() <= 1e-12
        assert np.max(np.abs(coin.matrix - coin.matrix.conj().T)) <= 1e-12
        assert np.allclose(np.linalg.eigvalsh(coin.matrix), [-1.0, -1.0, 1.0], atol=1e-10)

    @pytest.mark.property
    @settings(deadline=None)
    @given(rho=rhos, alpha=alphas)
    def test_eigenbasis_action(self, rho, alpha):
        coin = build_coin3(rho, alpha)
        basis = coin_eigenbasis(coin)
        assert np.allclose(coin.matrix @ basis.sigma_plus, basis.sigma_plus, atol=1e-12)
        assert np.allclose(coin.matrix @ basis.sigma1_minus, -basis.sigma1_minus, atol=1e-12)
        assert np.allclose(coin.matrix @ basis.sigma2_minus, -basis.sigma2_minus, atol=1e-12)
        matrix = basis.as_matrix()
        assert np.allclose(matrix.conj().T @ matrix, np.eye(3), atol=1e-12)

    def test_eigenbasis_requires_lazy_coin(self):
        with pytest.raises(DimensionMismatchError):
            coin_eigenbasis(build_coin2(0.5))

    def test_non_unitary_matrix_rejected(self, grover):
        with pytest.raises(ParameterError):
            CoinOperator(dimension=3, matrix=grover.matrix * (1.0 + 1e-9), rho=GROVER_RHO, alpha=0.0)


@pytest.mark.unit
class TestCoinStates:
    """Test suite for coin-state validation, decomposition and presets."""

    def test_decompose_sigma_plus(self, grover):
        basis = coin_eigenbasis(grover)
        h_plus, h1, h2 = decompose_coin_state(basis.sigma_plus, basis)
        assert abs(h_plus - 1.0) < 1e-12
        assert abs(h1) < 1e-12
        assert abs(h2) < 1e-12

    def test_compose_inverts_decompose(self):
        coin = build_coin3(0.4, 1.3)
        basis = coin_eigenbasis(coin)
        psi = random_coin_state(3, np.random.default_rng(7))
        assert np.allclose(compose_coin_state(decompose_coin_state(psi, basis), basis), psi, atol=1e-12)

    def test_weights_sum_to_one(self):
        basis = coin_eigenbasis(build_coin3(0.7, 4.0))
        psi = random_coin_state(3, np.random.default_rng(3))
        weights = sum(abs(h) ** 2 for h in decompose_coin_state(psi, basis))
        assert abs(weights - 1.0) < 1e-12

    def test_unnormalized_state_rejected(self):
        with pytest.raises(NormalizationError):
            normalized_coin_state([1.0, 1.0], 2)

    def test_wrong_length_rejected(self):
        with pytest.raises(DimensionMismatchError):
            normalized_coin_state([1.0, 0.0], 3)

    @pytest.mark.parametrize("alias", ["sigma+", "σ+", "σ⁺"])
    def test_sigma_plus_aliases(self, grover, alias):
        assert np.allclose(resolve_coin_state(grover, preset=alias), coin_eigenbasis(grover).sigma_plus)

    def test_eigen_presets_follow_alpha(self):
        coin = build_coin3(GROVER_RHO, np.pi)
        vector = resolve_coin_state(coin, preset="sigma2-")
        assert np.allclose(vector, np.array([1.0, 0.0, 1.0]) / np.sqrt(2.0))

    def test_standard_labels(self, grover):
        assert np.allclose(resolve_coin_state(grover, preset="S"), [0.0, 1.0, 0.0])
        assert np.allclose(resolve_coin_state(build_coin2(0.5), preset="R"), [0.0, 1.0])

    def test_explicit_amplitudes(self, grover):
        vector = resolve_coin_state(grover, amplitudes=[0.6, 0.8j, 0.0])
        assert vector[1] == 0.8j

    def test_preset_errors(self, grover):
        with pytest.raises(ParameterError):
            resolve_coin_state(grover)
        with pytest.raises(ParameterError):
            resolve_coin_state(grover, preset="L", amplitudes=[1.0, 0.0, 0.0])
        with pytest.raises(ParameterError):
            resolve_coin_state(grover, preset="up")
        with pytest.raises(ParameterError):
            resolve_coin_state(build_coin2(0.5), preset="sigma+")

    def test_random_state_normalized(self):
        rng = np.random.default_rng(11)
        for dimension in (2, 3):
            vector = random_coin_state(dimension, rng)
            assert abs(np.linalg.norm(vector) - 1.0) < 1e-12
