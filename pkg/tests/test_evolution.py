"""Unit tests for ring geometry, step operators and survival evolution."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.shared.error_handling import DimensionMismatchError, NormalizationError, ParameterError
from src.shared.models import EdgeConfig, RingConfig, WalkKind, WalkState
from src.walk.coins import build_coin2, build_coin3, coin_eigenbasis, random_coin_state
from src.walk.evolution import (
    build_evolution,
    evolve_state,
    evolve_survival,
    initial_state,
    shift_targets,
    step_operator,
)

HADAMARD_RHO = 1.0 / np.sqrt(2.0)
GROVER_RHO = 1.0 / np.sqrt(3.0)


@pytest.fixture
def hadamard():
    return build_coin2(HADAMARD_RHO)


@pytest.fixture
def grover():
    return build_coin3(GROVER_RHO, 0.0)


@pytest.mark.unit
class TestRingConfig:
    """Test suite for ring geometry."""

    def test_indices(self):
        ring = RingConfig(3)
        assert ring.size == 6
        assert ring.sink_vertex == 3
        assert ring.sink_index == 5
        assert ring.index(-2) == 0
        assert ring.index(0) == 2
        assert ring.index(3) == 5
        assert ring.vertex(0) == -2
        assert list(ring.vertex_labels) == [-2, -1, 0, 1, 2, 3]

    def test_labels_wrap(self):
        ring = RingConfig(3)
        assert ring.index(4) == ring.index(-2)

    def test_edge_endpoints_wrap(self):
        ring = RingConfig(2)
        assert ring.edge_endpoints(3) == (3, 0)

    @pytest.mark.parametrize("half_size", [0, -1, 1.5])
    def test_rejects_bad_size(self, half_size):
        with pytest.raises(ParameterError):
            RingConfig(half_size)

    @pytest.mark.parametrize("source", [3, -3])
    def test_rejects_source_at_or_beyond_sink(self, source):
        with pytest.raises(ParameterError):
            RingConfig(3, source=source)


@pytest.mark.unit
class TestStepOperator:
    """Test suite for the (percolated) conditional shift."""

    @pytest.mark.parametrize("dimension", [2, 3])
    def test_full_ring_moves_walker(self, dimension):
        ring = RingConfig(3)
        targets = shift_targets(ring, dimension)
        right, left = dimension - 1, 0
        for j in range(ring.size):
            k = (j + 1) % ring.size
            assert targets[j * dimension + right] == k * dimension + right
            assert targets[k * dimension + left] == j * dimension + left

    def test_stay_component_fixed(self):
        targets = shift_targets(RingConfig(2), 3)
        assert all(targets[j * 3 + 1] == j * 3 + 1 for j in range(4))

    def test_broken_edge_reflects(self):
        ring = RingConfig(2)
        broken = EdgeConfig(0b1110, 4)
        targets = shift_targets(ring, 3, broken)
        assert targets[0 * 3 + 2] == 0 * 3 + 0
        assert targets[1 * 3 + 0] == 1 * 3 + 2

    def test_empty_configuration_is_local(self):
        ring = RingConfig(2)
        step = step_operator(ring, 3, EdgeConfig.empty(ring.size))
        assert np.count_nonzero(np.kron(np.ones((4, 4)) - np.eye(4), np.ones((3, 3))) * step) == 0

    @pytest.mark.property
    @settings(deadline=None)
    @given(mask=st.integers(min_value=0, max_value=(1 << 8) - 1))
    def test_every_configuration_is_a_permutation(self, mask):
        ring = RingConfig(4)
        targets = shift_targets(ring, 3, EdgeConfig(mask, 8))
        assert sorted(targets) == list(range(ring.size * 3))

    def test_full_configuration_matches_ideal_step(self):
        ring = RingConfig(3)
        assert np.array_equal(step_operator(ring, 3, EdgeConfig.full(6)), step_operator(ring, 3))

    def test_width_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            shift_targets(RingConfig(3), 3, EdgeConfig.full(4))


@pytest.mark.unit
class TestEvolutionOperator:
    """Test suite for U, the sink projector and pi U."""

    @pytest.mark.parametrize("half_size", [1, 2, 5])
    def test_unitarity_and_projection(self, half_size, hadamard, grover):
        ring = RingConfig(half_size)
        for coin in (hadamard, grover):
            operator = build_evolution(ring, coin)
            identity = np.eye(operator.dimension)
            assert np.max(np.abs(operator.unitary.conj().T @ operator.unitary - identity)) <= 1e-12
            assert np.allclose(operator.projector @ operator.projector, operator.projector)
            assert np.allclose(operator.projected, operator.projector @ operator.unitary)
            assert np.linalg.norm(operator.projected, 2) <= 1.0 + 1e-12

    def test_unitary_factorization(self, grover):
        ring = RingConfig(3)
        operator = build_evolution(ring, grover)
        layer = np.kron(np.eye(ring.size), grover.matrix)
        assert np.allclose(operator.unitary, operator.step @ layer, atol=1e-15)

    def test_kind_mismatch(self, hadamard):
        with pytest.raises(DimensionMismatchError):
            build_evolution(RingConfig(2), hadamard, WalkKind.LAZY)

    def test_initial_state_at_source(self):
        ring = RingConfig(3, source=-1)
        state = initial_state(ring, [0.0, 1.0, 0.0])
        assert state.as_grid()[ring.index(-1)][1] == 1.0
        assert state.norm_squared == pytest.approx(1.0)

    def test_state_norm_above_one_rejected(self):
        ring = RingConfig(2)
        amplitudes = np.zeros(ring.size * 3, dtype=complex)
        amplitudes[:2] = 1.0 / np.sqrt(2.0) + 1e-9
        with pytest.raises(NormalizationError):
            WalkState(ring=ring, dimension=3, amplitudes=amplitudes)


@pytest.mark.unit
class TestSurvivalEvolution:
    """Test suite for survival-probability series."""

    def test_series_shape(self, hadamard):
        series = evolve_survival(RingConfig(3), hadamard, [1.0, 0.0], 50)
        assert series.steps == 50
        assert series.survival.shape == (51,)
        assert series.absorbed_flux.shape == (51, 2)
        assert series.survival[0] == pytest.approx(1.0)
        assert series.metadata["N"] == 3

    @pytest.mark.parametrize("steps", [0, -3, 2.5])
    def test_rejects_bad_steps(self, hadamard, steps):
        with pytest.raises(ParameterError):
            evolve_survival(RingConfig(3), hadamard, [1.0, 0.0], steps)

    def test_diagonal_coin_reaches_sink_in_n_steps(self):
        ring = RingConfig(5)
        series = evolve_survival(ring, build_coin2(1.0), [1.0, 0.0], 10)
        assert np.allclose(series.survival[:5], 1.0)
        assert series.survival[5] < 1e-15
        assert series.channel_flux("L")[5] == pytest.approx(1.0)

    def test_hadamard_decays(self, hadamard):
        series = evolve_survival(RingConfig(5), hadamard, [1.0, 0.0], 1000)
        assert series.survival[1000] < 1e-3

    @pytest.mark.parametrize("coin_state", ["sigma+", "L", "S"])
    def test_conservation_and_monotonicity(self, grover, coin_state):
        psi = {
            "sigma+": coin_eigenbasis(grover).sigma_plus,
            "L": [1.0, 0.0, 0.0],
            "S": [0.0, 1.0, 0.0],
        }[coin_state]
        series = evolve_survival(RingConfig(5), grover, psi, 500)
        assert series.conservation_residual() <= 1e-10
        assert series.is_monotone()

    def test_two_state_survival_independent_of_coin_state(self, hadamard):
        ring = RingConfig(4)
        operator = build_evolution(ring, hadamard)
        rng = np.random.default_rng(5)
        runs = [
            evolve_survival(ring, hadamard, random_coin_state(2, rng), 200, operator)
            for _ in range(5)
        ]
        for run in runs[1:]:
            assert np.max(np.abs(run.survival - runs[0].survival)) < 1e-10

    def test_evolve_state_matches_survival(self, grover):
        ring = RingConfig(3)
        operator = build_evolution(ring, grover)
        psi = coin_eigenbasis(grover).sigma_plus
        state = evolve_state(operator, initial_state(ring, psi), 40)
        series = evolve_survival(ring, grover, psi, 40, operator)
        assert state.norm_squared == pytest.approx(series.survival[-1], abs=1e-12)

    def test_evolve_state_zero_steps(self, grover):
        ring = RingConfig(2)
        state = initial_state(ring, [1.0, 0.0, 0.0])
        assert np.array_equal(evolve_state(build_evolution(ring, grover), state, 0).amplitudes, state.amplitudes)
