"""Edge configurations of the dynamically percolated ring."""

import logging
from typing import List, Tuple

import numpy as np

from src.shared.error_handling import DimensionMismatchError, ParameterError, PercolationError
from src.shared.models import EdgeConfig, RingConfig
from src.walk.evolution import step_operator

logger = logging.getLogger(__name__)

EXACT_ENUMERATION_MAX_EDGES = 16


def _check_probability(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"edge probability must lie in [0, 1], got {p}")


def config_probability(config: EdgeConfig, p: float) -> float:
    """p_K = p^|K| (1 - p)^(2N - |K|)."""
    _check_probability(p)
    present = config.count
    return float(p ** present * (1.0 - p) ** (config.width - present))


def realization_stream(master_seed: int, realization: int) -> np.random.Generator:
    """
    Independent random stream of one realization.

    Streams are addressed by (master seed, realization index), so any
    subset of realizations can be regenerated on its own.
    """
    if realization < 0:
        raise ParameterError(f"realization index must be >= 0, got {realization}")
    sequence = np.random.SeedSequence(master_seed, spawn_key=(realization,))
    return np.random.Generator(np.random.PCG64(sequence))


def sample_config(p: float, rng: np.random.Generator, width: int) -> EdgeConfig:
    """Draw one configuration: each edge present independently with probability p."""
    _check_probability(p)
    return EdgeConfig.from_array(rng.random(width) < p)


def sample_config_sequence(
    p: float,
    rng: np.random.Generator,
    steps: int,
    width: int
) -> np.ndarray:
    """
    Presence table of shape (steps, width); row t - 1 holds step t.

    Row t depends only on the stream and t, not on how many steps are drawn.
    """
    _check_probability(p)
    return rng.random((steps, width)) < p


def config_at(
    master_seed: int,
    realization: int,
    step: int,
    p: float,
    width: int
) -> EdgeConfig:
    """Configuration used at a given step (1-based) of a given realization."""
    if step < 1:
        raise ParameterError(f"steps are counted from 1, got {step}")
    table = sample_config_sequence(p, realization_stream(master_seed, realization), step, width)
    return EdgeConfig.from_array(table[step - 1])


def percolated_step(ring: RingConfig, config: EdgeConfig) -> np.ndarray:
    """
    Shift S_K of the lazy walk on the ring with edge configuration K.

    Broken edges reflect the directional components in place; the stay
    component is never moved.

    Raises:
        DimensionMismatchError: If the mask width is not 2N
    """
    if config.width != ring.size:
        raise DimensionMismatchError(
            f"edge mask width {config.width} does not match ring with {ring.size} edges"
        )
    return step_operator(ring, 3, config)


def enumerate_configs(
    ring: RingConfig,
    p: float,
    max_edges: int = EXACT_ENUMERATION_MAX_EDGES
) -> List[Tuple[EdgeConfig, float]]:
    """
    All configurations with non-zero weight and their probabilities.

    Raises:
        PercolationError: If 2N exceeds the enumeration cutoff
    """
    _check_probability(p)
    if ring.size > max_edges:
        raise PercolationError(
            f"exact enumeration is limited to 2N <= {max_edges}, ring has {ring.size} edges"
        )

    configs = []
    for mask in range(1 << ring.size):
        config = EdgeConfig(mask, ring.size)
        weight = config_probability(config, p)
        if weight > 0.0:
            configs.append((config, weight))
    return configs
