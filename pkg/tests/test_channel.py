"""Unit tests for the exact percolation channel."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.shared.error_handling import (
    DimensionMismatchError,
    NumericalFaultError,
    ParameterError,
    PercolationError,
)
from src.shared.models import DensityMatrix, RingConfig
from src.percolation.channel import (
    ENUMERATED,
    FACTORIZED,
    PercolationChannel,
    channel_step,
    channel_survival,
    evolve_density,
)
from src.percolation.monte_carlo import averaged_survival
from src.walk.coins import build_coin3, coin_eigenbasis
from src.walk.evolution import build_evolution, initial_state

GROVER_RHO = 1.0 / np.sqrt(3.0)


def random_density(dimension, seed):
    rng = np.random.default_rng(seed)
    factor = rng.normal(size=(dimension, dimension)) + 1j * rng.normal(size=(dimension, dimension))
    density = factor @ factor.conj().T
    return density / np.trace(density).real


@pytest.fixture
def ring():
    return RingConfig(2)


@pytest.fixture
def fragile():
    return build_coin3(GROVER_RHO, np.pi)


@pytest.mark.unit
class TestPercolationChannel:
    """Test suite for the channel map Phi."""

    def test_exact_channel_shape(self, ring, fragile):
        channel = PercolationChannel.exact(ring, fragile, 0.5)
        assert channel.is_exact
        assert len(channel.configs) == 1 << ring.size
        assert channel.weights.sum() == pytest.approx(1.0, abs=1e-12)
        assert channel.unitarity_residual() <= 1e-12

    @pytest.mark.property
    @settings(deadline=None, max_examples=25)
    @given(p=st.floats(min_value=0.0, max_value=1.0), seed=st.integers(min_value=0, max_value=1000))
    def test_factorized_matches_enumerated(self, p, seed):
        ring = RingConfig(2)
        channel = PercolationChannel.exact(ring, build_coin3(0.45, np.pi), p)
        density = random_density(channel.dimension, seed)
        fast = channel.apply(density, FACTORIZED)
        slow = channel.apply(density, ENUMERATED)
        assert np.max(np.abs(fast - slow)) <= 1e-12

    def test_p_one_is_conjugation_by_projected_walk(self, ring, fragile):
        channel = PercolationChannel.exact(ring, fragile, 1.0)
        projected = build_evolution(ring, fragile).projected
        density = random_density(channel.dimension, 4)
        assert np.allclose(channel.apply(density), projected @ density @ projected.conj().T, atol=1e-14)

    def test_step_keeps_state_valid(self, ring, fragile):
        channel = PercolationChannel.exact(ring, fragile, 0.3)
        density = DensityMatrix(random_density(channel.dimension, 1))
        updated = channel_step(density, channel)
        assert updated.trace <= density.trace + 1e-12
        assert updated.hermiticity_residual() <= 1e-12
        assert updated.min_eigenvalue() >= -1e-10

    def test_evolve_density(self, ring, fragile):
        channel = PercolationChannel.exact(ring, fragile, 0.5)
        start = DensityMatrix.from_state(initial_state(ring, coin_eigenbasis(fragile).sigma_plus))
        evolved = evolve_density(start, channel, 20)
        series = channel_survival(channel, coin_eigenbasis(fragile).sigma_plus, 20)
        assert evolved.trace == pytest.approx(series.survival[-1], abs=1e-12)

    def test_channel_survival_conservation(self, ring, fragile):
        series = channel_survival(PercolationChannel.exact(ring, fragile, 0.55), [1.0, 0.0, 0.0], 200)
        assert series.conservation_residual() <= 1e-10
        assert series.is_monotone()
        assert series.metadata["mode"] == "exact-enumeration"

    def test_channel_matches_monte_carlo(self, fragile):
        ring = RingConfig(2)
        psi = coin_eigenbasis(fragile).sigma_plus
        n_realizations = 2000
        exact = channel_survival(PercolationChannel.exact(ring, fragile, 0.5), psi, 30).survival
        sampled = averaged_survival(ring, fragile, psi, 0.5, 30, n_realizations, master_seed=17).survival
        bound = 4.0 * np.sqrt(np.clip(exact * (1.0 - exact), 0.0, None) / n_realizations) + 1e-12
        assert np.all(np.abs(exact - sampled) <= bound)

    def test_sampled_channel(self, ring, fragile):
        channel = PercolationChannel.from_samples(ring, fragile, 0.5, 500, seed=3)
        assert not channel.is_exact
        assert channel.weights.sum() == pytest.approx(1.0, abs=1e-12)
        density = random_density(channel.dimension, 2)
        assert channel.apply(density).shape == density.shape
        with pytest.raises(PercolationError):
            channel.mix(density, FACTORIZED)
        with pytest.raises(PercolationError):
            channel_step(DensityMatrix(density), channel)
        with pytest.raises(PercolationError):
            channel_survival(channel, [1.0, 0.0, 0.0], 5)

    def test_bad_inputs(self, ring, fragile):
        channel = PercolationChannel.exact(ring, fragile, 0.5)
        with pytest.raises(DimensionMismatchError):
            channel.mix(np.eye(3))
        with pytest.raises(ParameterError):
            channel.mix(np.eye(channel.dimension), "spectral")
        with pytest.raises(ParameterError):
            PercolationChannel.from_samples(ring, fragile, 0.5, 0, seed=1)

    def test_statistics_count_applications(self, ring, fragile):
        channel = PercolationChannel.exact(ring, fragile, 0.5)
        channel.apply(np.eye(channel.dimension) / channel.dimension)
        stats = channel.statistics()
        assert stats["configurations"] == 16
        assert stats["applications"] == {FACTORIZED: 1}


@pytest.mark.unit
class TestDensityMatrix:
    """Test suite for density-matrix validation."""

    def test_non_hermitian_rejected(self):
        matrix = np.eye(3, dtype=complex)
        matrix[0, 1] = 0.5
        with pytest.raises(NumericalFaultError):
            DensityMatrix(matrix).validate()

    def test_negative_rejected(self):
        with pytest.raises(NumericalFaultError):
            DensityMatrix(np.diag([1.0, -0.1]).astype(complex)).validate()

    def test_pure_state(self):
        state = initial_state(RingConfig(2), [0.0, 1.0, 0.0])
        density = DensityMatrix.from_state(state)
        density.validate()
        assert density.trace == pytest.approx(1.0)
        assert density.diagonal()[state.ring.source_index * 3 + 1] == pytest.approx(1.0)
