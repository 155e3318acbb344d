"""Unit tests for stationary states and transport efficiency."""

import numpy as np
import pytest

from src.shared.error_handling import ParameterError
from src.shared.models import EfficiencyMethod, RingConfig
from src.trapping.efficiency import (
    efficiency_closed_form,
    efficiency_line_estimate,
    line_quotient,
    line_trapping_profile,
    simulated_efficiency,
    trapping_coin_block,
    transport_efficiency,
    worst_case_coin_state,
)
from src.trapping.stationary import (
    orthonormal_trapped_basis,
    sink_free_basis,
    stationary_state,
    stationary_states,
    trapped_component,
    trapping_probability,
    trapping_profile,
)
from src.walk.coins import (
    build_coin3,
    coin_eigenbasis,
    compose_coin_state,
    decompose_coin_state,
    random_coin_state,
)
from src.walk.evolution import build_evolution, evolve_survival, initial_state

GROVER_RHO = 1.0 / np.sqrt(3.0)


@pytest.fixture
def grover():
    return build_coin3(GROVER_RHO, 0.0)


@pytest.mark.unit
class TestStationaryStates:
    """Test suite for the trapped subspace."""

    @pytest.mark.parametrize("alpha", [0.0, 1.1, np.pi])
    def test_raw_states_are_fixed_by_u(self, alpha):
        ring = RingConfig(3)
        coin = build_coin3(0.45, alpha)
        unitary = build_evolution(ring, coin).unitary
        raw = stationary_states(ring, coin)
        assert raw.raw_labels == (-2, -1, 0, 1, 2, 3)
        for state in raw.raw_states:
            assert np.linalg.norm(unitary @ state - state) <= 1e-12

    def test_state_support(self, grover):
        ring = RingConfig(3)
        state = stationary_state(ring, grover, 0).reshape(ring.size, 3)
        occupied = np.flatnonzero(np.linalg.norm(state, axis=1))
        assert list(occupied) == [ring.index(0), ring.index(1)]

    def test_wraparound_state(self, grover):
        ring = RingConfig(2)
        state = stationary_state(ring, grover, 2).reshape(ring.size, 3)
        assert np.linalg.norm(state[ring.index(2)]) > 0
        assert np.linalg.norm(state[ring.index(-1)]) > 0

    @pytest.mark.parametrize("half_size", [2, 3, 6])
    def test_sink_free_basis_is_orthonormal(self, grover, half_size):
        ring = RingConfig(half_size)
        basis = sink_free_basis(ring, grover)
        assert basis.dimension == 2 * half_size - 2
        assert basis.vector_labels == tuple(range(-half_size + 1, half_size - 1))
        assert basis.gram_residual() <= 1e-10
        projector = basis.projector()
        assert np.allclose(projector @ projector, projector, atol=1e-12)

    def test_sink_free_states_avoid_sink(self, grover):
        ring = RingConfig(4)
        basis = sink_free_basis(ring, grover)
        sink = basis.vectors.reshape(basis.dimension, ring.size, 3)[:, ring.sink_index]
        assert np.max(np.abs(sink)) == 0.0

    def test_trapped_states_are_fixed_by_projected_walk(self, grover):
        ring = RingConfig(4)
        operator = build_evolution(ring, grover)
        basis = sink_free_basis(ring, grover)
        for vector in basis.vectors:
            assert np.linalg.norm(operator.projected @ vector - vector) <= 1e-12

    def test_with_sink_states(self, grover):
        basis = orthonormal_trapped_basis(stationary_states(RingConfig(3), grover), include_sink_states=True)
        assert basis.dimension == 6
        with pytest.raises(ParameterError):
            trapped_component(basis, initial_state(RingConfig(3), [1.0, 0.0, 0.0]))

    def test_trapping_requires_orthonormal_basis(self, grover):
        ring = RingConfig(3)
        with pytest.raises(ParameterError):
            trapped_component(stationary_states(ring, grover), initial_state(ring, [1.0, 0.0, 0.0]))

    def test_profile_sums_to_trapped_weight(self, grover):
        ring = RingConfig(4)
        basis = sink_free_basis(ring, grover)
        state = initial_state(ring, coin_eigenbasis(grover).sigma_plus)
        profile = trapping_profile(basis, state)
        assert set(profile) == set(ring.vertex_labels)
        assert profile[ring.sink_vertex] == pytest.approx(0.0, abs=1e-15)
        assert profile[1] == pytest.approx(trapping_probability(basis, state, 1))
        trapped = np.linalg.norm(trapped_component(basis, state)) ** 2
        assert sum(profile.values()) == pytest.approx(trapped, abs=1e-12)


@pytest.mark.unit
class TestTransportEfficiency:
    """Test suite for the transport efficiency estimators."""

    def test_grover_sigma_plus_n2(self, grover):
        psi = coin_eigenbasis(grover).sigma_plus
        report = transport_efficiency(RingConfig(2), grover, psi)
        assert report.method is EfficiencyMethod.EXACT_PROJECTOR
        assert report.eta == pytest.approx(5.0 / 11.0, abs=1e-8)
        assert report.estimates[EfficiencyMethod.CLOSED_FORM.value] == pytest.approx(5.0 / 11.0, abs=1e-8)

    @pytest.mark.parametrize("half_size", [2, 3, 4, 5])
    @pytest.mark.parametrize("rho", [0.2, GROVER_RHO, 0.8])
    def test_closed_form_matches_projector(self, half_size, rho):
        rng = np.random.default_rng(half_size)
        coin = build_coin3(rho, float(rng.uniform(0.0, 2.0 * np.pi)))
        ring = RingConfig(half_size)
        basis = sink_free_basis(ring, coin)
        eigenbasis = coin_eigenbasis(coin)
        for _ in range(4):
            psi = random_coin_state(3, rng)
            h_plus, _, h2 = decompose_coin_state(psi, eigenbasis)
            closed = efficiency_closed_form(half_size, rho, abs(h_plus) ** 2, abs(h2) ** 2)
            assert transport_efficiency(ring, coin, psi, basis).eta == pytest.approx(closed, abs=1e-8)

    @pytest.mark.parametrize("half_size, rho, alpha", [(2, 0.3, 0.0), (5, GROVER_RHO, 2.5), (7, 0.9, np.pi)])
    def test_sigma1_minus_is_never_trapped(self, half_size, rho, alpha):
        coin = build_coin3(rho, alpha)
        report = transport_efficiency(RingConfig(half_size), coin, coin_eigenbasis(coin).sigma1_minus)
        assert report.eta == pytest.approx(1.0, abs=1e-10)

    def test_efficiency_independent_of_alpha(self):
        psi_weights = []
        for alpha in (0.0, 1.0, np.pi):
            coin = build_coin3(GROVER_RHO, alpha)
            psi_weights.append(transport_efficiency(RingConfig(3), coin, coin_eigenbasis(coin).sigma_plus).eta)
        assert np.allclose(psi_weights, psi_weights[0], atol=1e-10)

    def test_plateau_matches_limiting_survival(self, grover):
        ring = RingConfig(2)
        psi = coin_eigenbasis(grover).sigma_plus
        report = transport_efficiency(ring, grover, psi)
        series = evolve_survival(ring, grover, psi, 500)
        assert series.survival[-1] == pytest.approx(report.limiting_survival, abs=1e-6)
        assert simulated_efficiency(series).eta == pytest.approx(report.eta, abs=1e-6)

    def test_line_estimate_close_for_large_ring(self, grover):
        ring = RingConfig(20)
        psi = coin_eigenbasis(grover).sigma_plus
        report = transport_efficiency(ring, grover, psi)
        h_plus, _, h2 = decompose_coin_state(psi, coin_eigenbasis(grover))
        assert efficiency_line_estimate(20, GROVER_RHO, h_plus, h2) == pytest.approx(report.eta, abs=1e-6)

    def test_line_profile_matches_exact_profile_near_source(self, grover):
        ring = RingConfig(20)
        psi = coin_eigenbasis(grover).sigma_plus
        exact = transport_efficiency(ring, grover, psi).trapping_probabilities
        line = line_trapping_profile(20, GROVER_RHO, 1.0, 0.0)
        for m in (-2, -1, 0, 1, 2):
            assert line[m] == pytest.approx(exact[m], abs=1e-6)

    def test_line_quotient_range(self):
        for rho in (0.1, 0.5, 0.9):
            assert 0.0 < line_quotient(rho) < 1.0

    def test_closed_form_size_range(self):
        with pytest.raises(ParameterError):
            efficiency_closed_form(6, GROVER_RHO, 1.0, 0.0)

    def test_worst_case_state_is_sigma_plus(self, grover):
        ring = RingConfig(3)
        vector, eta = worst_case_coin_state(ring, grover)
        sigma_plus = coin_eigenbasis(grover).sigma_plus
        assert abs(np.vdot(sigma_plus, vector)) == pytest.approx(1.0, abs=1e-8)
        assert eta == pytest.approx(transport_efficiency(ring, grover, sigma_plus).eta, abs=1e-10)

    def test_coin_block_gives_efficiency(self, grover):
        ring = RingConfig(4)
        basis = sink_free_basis(ring, grover)
        block = trapping_coin_block(basis)
        psi = random_coin_state(3, np.random.default_rng(2))
        expected = transport_efficiency(ring, grover, psi, basis).eta
        assert 1.0 - np.vdot(psi, block @ psi).real == pytest.approx(expected, abs=1e-12)


@pytest.mark.property
class TestEfficiencyInvariances:
    """Efficiency depends only on |h+|^2 and |h2|^2, whatever the coin phase."""

    @pytest.mark.parametrize("rho", [0.3, GROVER_RHO, 0.8])
    def test_alpha_and_h1_phase_leave_eta_unchanged(self, rho):
        rng = np.random.default_rng(17)
        ring = RingConfig(3)
        for _ in range(5):
            weights = rng.dirichlet(np.ones(3))
            phases = np.exp(2j * np.pi * rng.uniform(size=3))
            etas = []
            for alpha in (0.0, 1.3, np.pi):
                coin = build_coin3(rho, alpha)
                eigenbasis = coin_eigenbasis(coin)
                basis = sink_free_basis(ring, coin)
                for h1_phase in np.exp(2j * np.pi * rng.uniform(size=4)):
                    h = np.sqrt(weights) * phases
                    h[1] = np.sqrt(weights[1]) * h1_phase
                    psi = compose_coin_state(tuple(h), eigenbasis)
                    etas.append(transport_efficiency(ring, coin, psi, basis).eta)
            assert np.ptp(etas) <= 1e-10

    @pytest.mark.parametrize("half_size, alpha", [(3, 0.0), (5, 1.3)])
    def test_sigma_plus_beats_random_search(self, half_size, alpha):
        ring = RingConfig(half_size)
        coin = build_coin3(GROVER_RHO, alpha)
        basis = sink_free_basis(ring, coin)
        block = trapping_coin_block(basis)
        rng = np.random.default_rng(half_size)
        samples = rng.normal(size=(10_000, 3)) + 1j * rng.normal(size=(10_000, 3))
        samples /= np.linalg.norm(samples, axis=1, keepdims=True)
        sampled = 1.0 - np.einsum("si,ij,sj->s", samples.conj(), block, samples).real
        eta_plus = transport_efficiency(ring, coin, coin_eigenbasis(coin).sigma_plus, basis).eta
        assert eta_plus <= sampled.min() + 1e-9
