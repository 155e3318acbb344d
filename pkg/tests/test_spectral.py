"""Unit tests for spectra and predicted decay rates."""

import numpy as np
import pytest

from src.shared.error_handling import (
    ConvergenceError,
    NumericalFaultError,
    ParameterError,
    PercolationError,
)
from src.shared.models import DecayProvenance, RingConfig, SpectralEstimate, SpectralMethod, WalkKind
from src.percolation.channel import PercolationChannel
from src.spectral.analyzer import (
    channel_decay_rate,
    dense_eigensystem,
    dense_spectrum,
    eigenvalue_multiplicity,
    leading_moduli,
    norm_growth_radius,
    predict_decay_rate,
    sub_leading_modulus,
)
from src.walk.coins import build_coin2, build_coin3
from src.walk.evolution import build_evolution

HADAMARD_RHO = 1.0 / np.sqrt(2.0)
GROVER_RHO = 1.0 / np.sqrt(3.0)


@pytest.fixture
def hadamard():
    return build_coin2(HADAMARD_RHO)


@pytest.fixture
def grover():
    return build_coin3(GROVER_RHO, 0.0)


@pytest.mark.unit
class TestDenseSpectrum:
    """Test suite for dense eigenvalue computations."""

    def test_sorted_by_modulus(self, hadamard):
        eigenvalues = dense_spectrum(build_evolution(RingConfig(4), hadamard))
        moduli = np.abs(eigenvalues)
        assert len(eigenvalues) == 16
        assert np.all(np.diff(moduli) <= 1e-15)
        assert moduli[0] < 1.0

    def test_dimension_limit(self, hadamard):
        with pytest.raises(ParameterError):
            dense_spectrum(build_evolution(RingConfig(4), hadamard), max_dimension=10)

    def test_eigensystem_residual(self, hadamard):
        values, vectors, residual = dense_eigensystem(build_evolution(RingConfig(3), hadamard))
        assert residual <= 1e-10
        assert vectors.shape == (12, 12)
        assert abs(values[0]) == pytest.approx(np.max(np.abs(values)))

    def test_bad_eigen_solve_reports_residual(self, hadamard, monkeypatch):
        real_eig = np.linalg.eig

        def shifted_eig(matrix):
            values, vectors = real_eig(matrix)
            return values + 1e-3, vectors

        monkeypatch.setattr(np.linalg, "eig", shifted_eig)
        with pytest.raises(ConvergenceError) as excinfo:
            dense_spectrum(build_evolution(RingConfig(3), hadamard))
        assert excinfo.value.residual == pytest.approx(1e-3, rel=1e-6)

    def test_failed_eigen_solve_reports_residual(self, hadamard, monkeypatch):
        def failing_eig(matrix):
            raise np.linalg.LinAlgError("no convergence")

        monkeypatch.setattr(np.linalg, "eig", failing_eig)
        with pytest.raises(ConvergenceError) as excinfo:
            dense_spectrum(build_evolution(RingConfig(3), hadamard))
        assert excinfo.value.residual == np.inf

    def test_sub_leading_cannot_exceed_leading(self):
        with pytest.raises(NumericalFaultError):
            SpectralEstimate(0.5, SpectralMethod.DENSE, 1, 0.0, sub_leading_modulus=0.9)

    @pytest.mark.parametrize("half_size", [2, 3, 4, 5])
    def test_lazy_unit_eigenvalue_multiplicities(self, grover, half_size):
        operator = build_evolution(RingConfig(half_size), grover)
        assert eigenvalue_multiplicity(dense_spectrum(operator.unitary)) == 2 * half_size
        assert eigenvalue_multiplicity(dense_spectrum(operator.projected)) == 2 * half_size - 2

    def test_sub_leading_modulus(self):
        eigenvalues = np.array([1.0, -1.0 + 1e-12, 0.9j, 0.5])
        assert sub_leading_modulus(eigenvalues) == pytest.approx(0.9)
        assert sub_leading_modulus(np.array([1.0, 1.0])) is None
        assert leading_moduli(eigenvalues) == (pytest.approx(1.0), pytest.approx(0.9))


@pytest.mark.unit
class TestNormGrowth:
    """Test suite for the matrix-free leading-modulus estimate."""

    @pytest.mark.parametrize("half_size", [2, 5])
    def test_agrees_with_dense(self, hadamard, half_size):
        operator = build_evolution(RingConfig(half_size), hadamard)
        estimate = norm_growth_radius(operator)
        assert estimate.method is SpectralMethod.NORM_GROWTH
        assert estimate.converged
        assert estimate.leading_modulus == pytest.approx(np.abs(dense_spectrum(operator)[0]), abs=1e-6)

    def test_diagonal_matrix(self):
        estimate = norm_growth_radius(np.diag([0.9, 0.5, 0.1]).astype(complex))
        assert estimate.leading_modulus == pytest.approx(0.9, abs=1e-7)

    def test_nilpotent_matrix(self):
        estimate = norm_growth_radius(np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex))
        assert estimate.leading_modulus == 0.0

    def test_rejects_expanding_operator(self):
        with pytest.raises(ParameterError):
            norm_growth_radius(2.0 * np.eye(3, dtype=complex))


@pytest.mark.unit
class TestDecayPrediction:
    """Test suite for decay rates predicted from spectra."""

    def test_two_state_rate(self, hadamard):
        ring = RingConfig(5)
        rate = predict_decay_rate(ring, hadamard, WalkKind.TWO_STATE)
        leading = np.abs(dense_spectrum(build_evolution(ring, hadamard))[0])
        assert rate.provenance is DecayProvenance.PREDICTED
        assert rate.gamma == pytest.approx(2.0 * (1.0 - leading))
        assert rate.gamma > 0.0

    def test_lazy_rate_uses_sub_leading(self, grover):
        rate = predict_decay_rate(RingConfig(3), grover, "lazy")
        assert rate.spectral.leading_modulus == pytest.approx(1.0, abs=1e-8)
        assert rate.gamma == pytest.approx(2.0 * (1.0 - rate.spectral.sub_leading_modulus))

    def test_percolated_mode_rejected(self, grover):
        with pytest.raises(ParameterError):
            predict_decay_rate(RingConfig(3), grover, WalkKind.PERCOLATED)

    def test_decay_rate_power_law(self):
        sizes = np.array([10, 20, 40, 80])
        gammas = [
            predict_decay_rate(RingConfig(int(n)), build_coin2(HADAMARD_RHO), WalkKind.TWO_STATE).gamma
            for n in sizes
        ]
        slope = np.polyfit(np.log(sizes), np.log(gammas), 1)[0]
        assert -3.3 <= slope <= -2.7


@pytest.mark.unit
class TestChannelDecay:
    """Test suite for channel decay rates."""

    def test_robust_coin_does_not_decay(self):
        channel = PercolationChannel.exact(RingConfig(2), build_coin3(GROVER_RHO, 0.0), 0.5)
        assert channel_decay_rate(channel).gamma < 1e-5

    def test_fragile_coin_decays(self):
        channel = PercolationChannel.exact(RingConfig(2), build_coin3(GROVER_RHO, np.pi), 0.5)
        rate = channel_decay_rate(channel)
        assert 0.0 < rate.gamma <= 1.0
        assert rate.spectral.method is SpectralMethod.NORM_GROWTH

    def test_deflated_single_configuration_reduces_to_lazy_walk(self, grover):
        ring = RingConfig(3)
        channel = PercolationChannel.exact(ring, grover, 1.0)
        deflated = channel_decay_rate(channel, deflate_trapped=True)
        lazy = predict_decay_rate(ring, grover, WalkKind.LAZY)
        sub_leading = lazy.spectral.sub_leading_modulus
        assert deflated.gamma == pytest.approx(1.0 - sub_leading ** 2, rel=1e-4)

    def test_single_configuration_without_deflation_is_trapped(self, grover):
        channel = PercolationChannel.exact(RingConfig(3), grover, 1.0)
        assert channel_decay_rate(channel).gamma < 1e-6

    def test_sampled_channel_rejected(self, grover):
        channel = PercolationChannel.from_samples(RingConfig(2), grover, 0.5, 100, seed=1)
        with pytest.raises(PercolationError):
            channel_decay_rate(channel)
