"""Step operators, sink projection and survival-probability evolution."""

import itertools
import logging
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from src.shared.error_handling import DimensionMismatchError, ParameterError
from src.shared.models import (
    COIN_LABELS,
    CoinOperator,
    EdgeConfig,
    EvolutionOperator,
    RingConfig,
    SurvivalSeries,
    WalkKind,
    WalkState,
)
from src.walk.coins import normalized_coin_state

logger = logging.getLogger(__name__)


def _check_coin_dimension(dimension: int) -> None:
    if dimension not in COIN_LABELS:
        raise DimensionMismatchError(f"coin dimension must be 2 or 3, got {dimension}")


def shift_targets(
    ring: RingConfig,
    dimension: int,
    edges: Optional[EdgeConfig] = None
) -> np.ndarray:
    """
    Destination index of every basis state under the (percolated) shift.

    Over a present edge e_j the state (j, R) moves to (j+1, R) and
    (j+1, L) moves to (j, L). Over a broken edge both are reflected in
    place: (j, R) -> (j, L) and (j+1, L) -> (j+1, R). The stay component
    is never moved. ``edges=None`` means every edge is present.

    Args:
        ring: Ring geometry
        dimension: Coin dimension (2 or 3)
        edges: Optional edge configuration

    Returns:
        Integer array ``targets`` with S|i> = |targets[i]>

    Raises:
        DimensionMismatchError: If the mask width is not 2N
    """
    _check_coin_dimension(dimension)
    if edges is not None and edges.width != ring.size:
        raise DimensionMismatchError(
            f"edge mask width {edges.width} does not match ring with {ring.size} edges"
        )

    left, right = 0, dimension - 1
    targets = np.arange(ring.size * dimension)
    for j in range(ring.size):
        k = (j + 1) % ring.size
        outgoing_right = j * dimension + right
        outgoing_left = k * dimension + left
        if edges is None or edges.present(j):
            targets[outgoing_right] = k * dimension + right
            targets[outgoing_left] = j * dimension + left
        else:
            targets[outgoing_right] = j * dimension + left
            targets[outgoing_left] = k * dimension + right
    return targets


def step_operator(
    ring: RingConfig,
    dimension: int,
    edges: Optional[EdgeConfig] = None
) -> np.ndarray:
    """Dense permutation matrix of the conditional shift."""
    targets = shift_targets(ring, dimension, edges)
    size = len(targets)
    step = np.zeros((size, size), dtype=complex)
    step[targets, np.arange(size)] = 1.0
    return step


def coin_layer(ring: RingConfig, coin: CoinOperator) -> np.ndarray:
    """I_P (x) C acting on the position-major space."""
    return np.kron(np.eye(ring.size), coin.matrix)


def shifted_coin_layer(targets: np.ndarray, layer: np.ndarray) -> np.ndarray:
    """
    S (I x C) for a permutation S given by its targets.

    Built by row placement, so the result does not depend on how a
    matrix product would be rounded.
    """
    unitary = np.empty_like(layer)
    unitary[targets] = layer
    return unitary


def sink_slice(ring: RingConfig, dimension: int) -> slice:
    """Amplitude indices belonging to the sink vertex."""
    start = ring.sink_index * dimension
    return slice(start, start + dimension)


def sink_projector(ring: RingConfig, dimension: int) -> np.ndarray:
    """pi = (I_P - |N><N|) (x) I_C."""
    diagonal = np.ones(ring.size * dimension)
    diagonal[sink_slice(ring, dimension)] = 0.0
    return np.diag(diagonal).astype(complex)


def build_evolution(
    ring: RingConfig,
    coin: CoinOperator,
    kind: Optional[WalkKind] = None
) -> EvolutionOperator:
    """
    Assemble U = S (I x C), the sink projector and pi U as dense matrices.

    Args:
        ring: Ring geometry
        coin: Two-state or lazy coin
        kind: Optional walk family the coin must match

    Returns:
        EvolutionOperator

    Raises:
        DimensionMismatchError: If the coin dimension does not match the walk kind
    """
    _check_coin_dimension(coin.dimension)
    if kind is not None and kind.coin_dimension != coin.dimension:
        raise DimensionMismatchError(
            f"{kind.value} walk needs a {kind.coin_dimension}-dimensional coin, "
            f"got dimension {coin.dimension}"
        )

    targets = shift_targets(ring, coin.dimension)
    step = step_operator(ring, coin.dimension)
    unitary = shifted_coin_layer(targets, coin_layer(ring, coin))
    projector = sink_projector(ring, coin.dimension)
    projected = unitary.copy()
    projected[sink_slice(ring, coin.dimension)] = 0.0

    logger.debug(
        f"Built evolution operator: N={ring.half_size}, d={coin.dimension}, "
        f"dimension={unitary.shape[0]}"
    )
    return EvolutionOperator(
        ring=ring,
        coin=coin,
        step=step,
        unitary=unitary,
        projector=projector,
        projected=projected,
    )


def initial_state(ring: RingConfig, psi_c: Sequence[complex]) -> WalkState:
    """
    Place the coin state at the source vertex.

    Raises:
        NormalizationError: If the coin state is not normalized
    """
    dimension = len(psi_c)
    _check_coin_dimension(dimension)
    vector = normalized_coin_state(psi_c, dimension)

    amplitudes = np.zeros(ring.size * dimension, dtype=complex)
    start = ring.source_index * dimension
    amplitudes[start:start + dimension] = vector
    return WalkState(ring=ring, dimension=dimension, amplitudes=amplitudes)


def propagate(
    unitary: np.ndarray,
    amplitudes: np.ndarray,
    sink: slice
) -> Tuple[np.ndarray, np.ndarray]:
    """
    One step: apply U, record the weight arriving at the sink per coin
    component, then project it out.

    Returns:
        (projected amplitudes, absorbed flux per coin component)
    """
    evolved = unitary @ amplitudes
    flux = np.abs(evolved[sink]) ** 2
    evolved[sink] = 0.0
    return evolved, flux


def survival_trajectory(
    state: WalkState,
    unitaries: Iterable[np.ndarray],
    steps: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Run ``steps`` propagation steps with the given sequence of unitaries.

    Returns:
        (survival of length steps+1, flux of shape (steps+1, d), final amplitudes)
    """
    dimension = state.dimension
    sink = sink_slice(state.ring, dimension)

    survival = np.empty(steps + 1)
    flux = np.zeros((steps + 1, dimension))
    amplitudes = state.amplitudes.copy()
    survival[0] = state.norm_squared

    for t, unitary in enumerate(itertools.islice(unitaries, steps), start=1):
        amplitudes, flux[t] = propagate(unitary, amplitudes, sink)
        survival[t] = np.vdot(amplitudes, amplitudes).real

    return survival, flux, amplitudes


def evolve_survival(
    ring: RingConfig,
    coin: CoinOperator,
    psi_c: Sequence[complex],
    steps: int,
    operator: Optional[EvolutionOperator] = None
) -> SurvivalSeries:
    """
    Survival probability of the walk started at the source with coin psi_c.

    Args:
        ring: Ring geometry
        coin: Coin operator
        psi_c: Normalized initial coin state
        steps: Number of steps T >= 1
        operator: Prebuilt evolution operator to reuse

    Returns:
        SurvivalSeries with survival[0..T] and the absorbed flux per coin channel

    Raises:
        ParameterError: If steps < 1
    """
    if isinstance(steps, bool) or int(steps) != steps or steps < 1:
        raise ParameterError(f"steps must be a positive integer, got {steps}")
    steps = int(steps)

    if operator is None:
        operator = build_evolution(ring, coin)
    elif operator.coin.dimension != coin.dimension:
        raise DimensionMismatchError("prebuilt operator does not match the coin")

    state = initial_state(ring, psi_c)
    survival, flux, _ = survival_trajectory(state, itertools.repeat(operator.unitary), steps)

    logger.debug(
        f"Evolved survival: N={ring.half_size}, d={coin.dimension}, T={steps}, "
        f"final={survival[-1]:.6e}"
    )
    return SurvivalSeries(
        survival=survival,
        absorbed_flux=flux,
        labels=coin.labels,
        metadata={
            "N": ring.half_size,
            "rho": coin.rho,
            "alpha": coin.alpha,
            "steps": steps,
            "source": ring.source,
        },
    )


def evolve_state(operator: EvolutionOperator, state: WalkState, steps: int) -> WalkState:
    """Apply (pi U)^steps to a walk state."""
    if steps < 0:
        raise ParameterError(f"steps must be >= 0, got {steps}")
    amplitudes = state.amplitudes.copy()
    for _ in range(steps):
        amplitudes = operator.projected @ amplitudes
    return WalkState(ring=state.ring, dimension=state.dimension, amplitudes=amplitudes)
