"""Random unitary channel of the percolated walk with sink projection."""

import logging
from collections import Counter
from threading import Lock
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.shared.error_handling import (
    DimensionMismatchError,
    NumericalFaultError,
    ParameterError,
    PercolationError,
)
from src.shared.models import (
    CoinOperator,
    DensityMatrix,
    EdgeConfig,
    PercolationMode,
    RingConfig,
    SurvivalSeries,
)
from src.percolation.configurations import (
    EXACT_ENUMERATION_MAX_EDGES,
    enumerate_configs,
    realization_stream,
    sample_config_sequence,
)
from src.walk.evolution import (
    coin_layer,
    initial_state,
    shift_targets,
    shifted_coin_layer,
    sink_slice,
)

logger = logging.getLogger(__name__)

FACTORIZED = "factorized"
ENUMERATED = "enumerated"

# Stacked U_K are kept in memory up to this many complex entries
STACK_MAX_ENTRIES = 1 << 22
CHUNK_SIZE = 256


class PercolationChannel:
    """
    Phi(X) = pi (sum_K p_K U_K X U_K^dagger) pi.

    In exact mode the weights are p^|K| (1-p)^(2N-|K|) over every
    configuration with non-zero weight, and the mixture can be applied
    either term by term or in the edge-factorized form: with F the
    unbroken shift, S_K = F D_K where D_K swaps (j, R) and (j+1, L) for
    each broken edge j, so the mixture over K is a sequence of independent
    two-outcome mixings, one per edge. In sampled mode the weights are
    empirical frequencies and only the term-by-term form applies.
    """

    def __init__(
        self,
        ring: RingConfig,
        coin3: CoinOperator,
        p: float,
        configs: List[Tuple[EdgeConfig, float]],
        mode: PercolationMode = PercolationMode.EXACT
    ):
        """
        Initialize channel from an explicit configuration list.

        Args:
            ring: Ring geometry
            coin3: Lazy coin
            p: Edge presence probability
            configs: (configuration, weight) pairs
            mode: Exact enumeration or Monte Carlo sampling

        Raises:
            PercolationError: If the weights do not sum to one
        """
        if coin3.dimension != 3:
            raise DimensionMismatchError("the percolation channel uses the lazy (three-state) coin")
        if not 0.0 <= p <= 1.0:
            raise ParameterError(f"edge probability must lie in [0, 1], got {p}")

        total = float(sum(weight for _, weight in configs))
        if abs(total - 1.0) > 1e-12:
            raise PercolationError(f"configuration weights sum to {total}, expected 1")

        self.ring = ring
        self.coin = coin3
        self.p = float(p)
        self.mode = mode
        self.configs = configs
        self.weights = np.array([weight for _, weight in configs])
        self.dimension = ring.size * 3

        self._layer = coin_layer(ring, coin3)
        self._layer_adjoint = self._layer.conj().T
        self._sink = sink_slice(ring, 3)
        full = shift_targets(ring, 3)
        self._unbroken_source = np.argsort(full)
        self._swap_pairs = [
            (j * 3 + 2, ((j + 1) % ring.size) * 3 + 0) for j in range(ring.size)
        ]
        self._stack: Optional[np.ndarray] = None
        self._lock = Lock()
        self._applications: Counter = Counter()

    @classmethod
    def exact(
        cls,
        ring: RingConfig,
        coin3: CoinOperator,
        p: float,
        max_edges: int = EXACT_ENUMERATION_MAX_EDGES
    ) -> "PercolationChannel":
        """Channel over every configuration (2N <= max_edges)."""
        configs = enumerate_configs(ring, p, max_edges)
        logger.debug(f"Exact channel: N={ring.half_size}, p={p}, configurations={len(configs)}")
        return cls(ring, coin3, p, configs, PercolationMode.EXACT)

    @classmethod
    def from_samples(
        cls,
        ring: RingConfig,
        coin3: CoinOperator,
        p: float,
        n_samples: int,
        seed: int
    ) -> "PercolationChannel":
        """Channel with empirical configuration frequencies."""
        if n_samples < 1:
            raise ParameterError(f"n_samples must be >= 1, got {n_samples}")
        table = sample_config_sequence(p, realization_stream(seed, 0), n_samples, ring.size)
        counts = Counter(EdgeConfig.from_array(row).mask for row in table)
        configs = [
            (EdgeConfig(mask, ring.size), count / n_samples)
            for mask, count in sorted(counts.items())
        ]
        return cls(ring, coin3, p, configs, PercolationMode.MONTE_CARLO)

    @property
    def is_exact(self) -> bool:
        return self.mode is PercolationMode.EXACT

    @property
    def is_single_configuration(self) -> bool:
        return len(self.configs) == 1

    def unitary(self, config: EdgeConfig) -> np.ndarray:
        """U_K = S_K (I x C)."""
        return shifted_coin_layer(shift_targets(self.ring, 3, config), self._layer)

    def projected_unitaries(self) -> Iterator[Tuple[float, np.ndarray]]:
        """(p_K, pi U_K) pairs in configuration order."""
        for config, weight in self.configs:
            projected = self.unitary(config)
            projected[self._sink] = 0.0
            yield weight, projected

    def unitarity_residual(self) -> float:
        """Largest max-entry deviation of U_K^dagger U_K from I over all configurations."""
        identity = np.eye(self.dimension)
        worst = 0.0
        for config, _ in self.configs:
            unitary = self.unitary(config)
            worst = max(worst, float(np.max(np.abs(unitary.conj().T @ unitary - identity))))
        return worst

    def statistics(self) -> Dict[str, object]:
        """Application counts per method plus the channel's shape."""
        return {
            "mode": self.mode.value,
            "configurations": len(self.configs),
            "applications": dict(self._applications),
        }

    def _stacked_unitaries(self) -> Optional[np.ndarray]:
        if len(self.configs) * self.dimension ** 2 > STACK_MAX_ENTRIES:
            return None
        if self._stack is None:
            with self._lock:
                if self._stack is None:
                    self._stack = np.array([self.unitary(config) for config, _ in self.configs])
        return self._stack

    def _mix_enumerated(self, matrix: np.ndarray) -> np.ndarray:
        stack = self._stacked_unitaries()
        result = np.zeros_like(matrix)
        for start in range(0, len(self.configs), CHUNK_SIZE):
            stop = min(start + CHUNK_SIZE, len(self.configs))
            if stack is not None:
                chunk = stack[start:stop]
            else:
                chunk = np.array([self.unitary(config) for config, _ in self.configs[start:stop]])
            conjugated = chunk @ matrix @ chunk.conj().transpose(0, 2, 1)
            result += np.tensordot(self.weights[start:stop], conjugated, axes=1)
        return result

    def _mix_factorized(self, matrix: np.ndarray) -> np.ndarray:
        mixed = self._layer @ matrix @ self._layer_adjoint
        if self.p < 1.0:
            for right, left in self._swap_pairs:
                swapped = mixed.copy()
                swapped[[right, left], :] = swapped[[left, right], :]
                swapped[:, [right, left]] = swapped[:, [left, right]]
                mixed = self.p * mixed + (1.0 - self.p) * swapped
        source = self._unbroken_source
        return mixed[np.ix_(source, source)]

    def mix(self, matrix: np.ndarray, method: str = FACTORIZED) -> np.ndarray:
        """
        sum_K p_K U_K X U_K^dagger, before the sink projection.

        Raises:
            PercolationError: If the factorized form is requested for a sampled channel
        """
        if matrix.shape != (self.dimension, self.dimension):
            raise DimensionMismatchError(
                f"operator of shape {matrix.shape} on a space of dimension {self.dimension}"
            )
        if method == FACTORIZED:
            if not self.is_exact:
                raise PercolationError("the factorized form holds for exact channels only")
            mixed = self._mix_factorized(matrix)
        elif method == ENUMERATED:
            mixed = self._mix_enumerated(matrix)
        else:
            raise ParameterError(f"unknown channel method {method!r}")
        self._applications[method] += 1
        return mixed

    def project(self, matrix: np.ndarray) -> np.ndarray:
        """pi X pi."""
        projected = matrix.copy()
        projected[self._sink, :] = 0.0
        projected[:, self._sink] = 0.0
        return projected

    def apply(self, matrix: np.ndarray, method: Optional[str] = None) -> np.ndarray:
        """Phi(X); exact channels default to the factorized form."""
        if method is None:
            method = FACTORIZED if self.is_exact else ENUMERATED
        return self.project(self.mix(matrix, method))


def channel_step(
    density: DensityMatrix,
    channel: PercolationChannel,
    method: Optional[str] = None,
    validate: bool = True
) -> DensityMatrix:
    """
    One step of the percolated walk on a density matrix.

    Args:
        density: Current density matrix
        channel: Exact percolation channel
        method: 'factorized' (default) or 'enumerated'
        validate: Check hermiticity, positivity and trace contraction

    Returns:
        Next density matrix

    Raises:
        PercolationError: For a sampled channel
        NumericalFaultError: If the output is not a valid sub-normalized state
    """
    if not channel.is_exact:
        raise PercolationError("channel_step requires an exact-enumeration channel")

    updated = DensityMatrix(channel.apply(density.matrix, method))
    if validate:
        updated.validate()
        if updated.trace > density.trace + 1e-12:
            raise NumericalFaultError(
                f"trace increased from {density.trace:.15f} to {updated.trace:.15f}"
            )
    return updated


def evolve_density(
    density: DensityMatrix,
    channel: PercolationChannel,
    steps: int,
    validate: bool = False
) -> DensityMatrix:
    """Apply ``steps`` channel steps."""
    for _ in range(steps):
        density = channel_step(density, channel, validate=validate)
    return density


def channel_survival(
    channel: PercolationChannel,
    psi_c: Sequence[complex],
    steps: int,
    validate: bool = False
) -> SurvivalSeries:
    """
    Ensemble survival trace(rho(t)) from the exact channel.

    The absorbed flux per coin component is the sink diagonal of the
    mixture before projection.
    """
    if steps < 1:
        raise ParameterError(f"steps must be >= 1, got {steps}")
    if not channel.is_exact:
        raise PercolationError("channel survival requires an exact-enumeration channel")

    sink = sink_slice(channel.ring, 3)
    density = DensityMatrix.from_state(initial_state(channel.ring, psi_c))
    survival = np.empty(steps + 1)
    flux = np.zeros((steps + 1, 3))
    survival[0] = density.trace

    for t in range(1, steps + 1):
        mixed = channel.mix(density.matrix)
        flux[t] = np.real(np.diag(mixed))[sink]
        updated = DensityMatrix(channel.project(mixed))
        if validate:
            updated.validate()
        density = updated
        survival[t] = density.trace

    return SurvivalSeries(
        survival=survival,
        absorbed_flux=flux,
        labels=channel.coin.labels,
        metadata={
            "N": channel.ring.half_size,
            "rho": channel.coin.rho,
            "alpha": channel.coin.alpha,
            "p": channel.p,
            "steps": steps,
            "mode": channel.mode.value,
        },
    )
