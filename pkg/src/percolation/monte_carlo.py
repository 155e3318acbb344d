"""Monte Carlo realizations of the dynamically percolated lazy walk."""

import logging
from concurrent.futures import ThreadPoolExecutor
from threading import Lock
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.shared.error_handling import DimensionMismatchError, ParameterError
from src.shared.models import CoinOperator, EdgeConfig, RingConfig, SurvivalSeries
from src.percolation.configurations import realization_stream, sample_config_sequence
from src.walk.evolution import (
    coin_layer,
    initial_state,
    shift_targets,
    shifted_coin_layer,
    survival_trajectory,
)

logger = logging.getLogger(__name__)

# Rings up to this many edges cache every U_K they meet
CACHE_MAX_EDGES = 16

Trajectory = Tuple[np.ndarray, np.ndarray, np.ndarray]


class PercolatedWalk:
    """
    Lazy walk whose edges are redrawn independently at every step.

    Each realization draws its configurations from its own stream, derived
    from (master seed, realization index); U_K = S_K (I x C) is cached per
    configuration on small rings.
    """

    def __init__(self, ring: RingConfig, coin3: CoinOperator):
        """
        Initialize percolated walk.

        Args:
            ring: Ring geometry
            coin3: Lazy coin

        Raises:
            DimensionMismatchError: If the coin is not three-dimensional
        """
        if coin3.dimension != 3:
            raise DimensionMismatchError("percolated walks use the lazy (three-state) coin")

        self.ring = ring
        self.coin = coin3
        self._layer = coin_layer(ring, coin3)
        self._cache: Dict[int, np.ndarray] = {}
        self._lock = Lock()
        self._bit_weights = (1 << np.arange(ring.size, dtype=np.int64)) if ring.size <= 62 else None

    def unitary(self, config: EdgeConfig) -> np.ndarray:
        """U_K for one configuration."""
        cached = self._cache.get(config.mask)
        if cached is not None:
            return cached

        unitary = shifted_coin_layer(shift_targets(self.ring, 3, config), self._layer)
        if self.ring.size <= CACHE_MAX_EDGES:
            with self._lock:
                unitary = self._cache.setdefault(config.mask, unitary)
        return unitary

    @property
    def cached_configs(self) -> int:
        return len(self._cache)

    def _config(self, present: np.ndarray) -> EdgeConfig:
        if self._bit_weights is not None:
            return EdgeConfig(int(present @ self._bit_weights), self.ring.size)
        return EdgeConfig.from_array(present)

    def _unitaries(self, table: np.ndarray) -> Iterator[np.ndarray]:
        for present in table:
            yield self.unitary(self._config(present))

    def trajectory(
        self,
        psi_c: Sequence[complex],
        p: float,
        steps: int,
        master_seed: int,
        realization: int = 0
    ) -> Trajectory:
        """
        One realization.

        Returns:
            (survival, absorbed flux, final amplitudes)
        """
        state = initial_state(self.ring, psi_c)
        stream = realization_stream(master_seed, realization)
        table = sample_config_sequence(p, stream, steps, self.ring.size)
        return survival_trajectory(state, self._unitaries(table), steps)

    def ensemble(
        self,
        psi_c: Sequence[complex],
        p: float,
        steps: int,
        n_realizations: int,
        master_seed: int,
        first_realization: int = 0,
        workers: int = 1
    ) -> List[Trajectory]:
        """Trajectories of realizations first .. first + n - 1, in index order."""
        indices = range(first_realization, first_realization + n_realizations)

        def run(index: int) -> Trajectory:
            return self.trajectory(psi_c, p, steps, master_seed, index)

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                return list(executor.map(run, indices))
        return [run(index) for index in indices]


def _check_run(steps: int, n_realizations: int = 1) -> None:
    if isinstance(steps, bool) or int(steps) != steps or steps < 1:
        raise ParameterError(f"steps must be a positive integer, got {steps}")
    if n_realizations < 1:
        raise ParameterError(f"n_realizations must be >= 1, got {n_realizations}")


def realization_survival(
    ring: RingConfig,
    coin3: CoinOperator,
    psi_c: Sequence[complex],
    p: float,
    steps: int,
    seed: int,
    realization: int = 0,
    walk: Optional[PercolatedWalk] = None
) -> SurvivalSeries:
    """
    Survival series of one percolated realization.

    Args:
        ring: Ring geometry
        coin3: Lazy coin
        psi_c: Normalized initial coin state
        p: Edge presence probability
        steps: Number of steps T >= 1
        seed: Master seed
        realization: Realization index within the master seed
        walk: Prebuilt PercolatedWalk to reuse its configuration cache

    Returns:
        SurvivalSeries
    """
    _check_run(steps)
    walk = walk or PercolatedWalk(ring, coin3)
    survival, flux, _ = walk.trajectory(psi_c, p, int(steps), seed, realization)
    return SurvivalSeries(
        survival=survival,
        absorbed_flux=flux,
        labels=coin3.labels,
        metadata={
            "N": ring.half_size,
            "rho": coin3.rho,
            "alpha": coin3.alpha,
            "p": p,
            "steps": int(steps),
            "seed": seed,
            "realization": realization,
        },
    )


def averaged_survival(
    ring: RingConfig,
    coin3: CoinOperator,
    psi_c: Sequence[complex],
    p: float,
    steps: int,
    n_realizations: int,
    master_seed: int,
    first_realization: int = 0,
    workers: int = 1,
    walk: Optional[PercolatedWalk] = None
) -> SurvivalSeries:
    """
    Arithmetic mean of the realization survival series.

    Realization i uses the stream derived from (master_seed, i); the sum
    runs in index order, so the result does not depend on ``workers``.

    Returns:
        SurvivalSeries with the standard error of the mean survival
    """
    _check_run(steps, n_realizations)
    walk = walk or PercolatedWalk(ring, coin3)
    logger.info(
        f"Averaging {n_realizations} percolated realizations: N={ring.half_size}, "
        f"rho={coin3.rho:.6f}, alpha={coin3.alpha:.6f}, p={p}, T={steps}"
    )

    trajectories = walk.ensemble(
        psi_c, p, int(steps), n_realizations, master_seed, first_realization, workers
    )

    total = np.zeros(int(steps) + 1)
    total_sq = np.zeros(int(steps) + 1)
    total_flux = np.zeros((int(steps) + 1, 3))
    for survival, flux, _ in trajectories:
        total += survival
        total_sq += survival ** 2
        total_flux += flux

    mean = total / n_realizations
    if n_realizations > 1:
        variance = np.maximum(total_sq / n_realizations - mean ** 2, 0.0)
        standard_error = np.sqrt(variance / (n_realizations - 1))
    else:
        standard_error = np.zeros_like(mean)

    logger.info(f"Averaged survival at T={steps}: {mean[-1]:.6e}")
    return SurvivalSeries(
        survival=mean,
        absorbed_flux=total_flux / n_realizations,
        labels=coin3.labels,
        metadata={
            "N": ring.half_size,
            "rho": coin3.rho,
            "alpha": coin3.alpha,
            "p": p,
            "steps": int(steps),
            "master_seed": master_seed,
            "realizations": n_realizations,
            "first_realization": first_realization,
        },
        standard_error=standard_error,
    )


def averaged_occupation(
    ring: RingConfig,
    coin3: CoinOperator,
    psi_c: Sequence[complex],
    p: float,
    steps: int,
    n_realizations: int,
    master_seed: int,
    workers: int = 1,
    walk: Optional[PercolatedWalk] = None
) -> np.ndarray:
    """Realization-averaged |amplitude|^2 per (vertex, coin) index after ``steps`` steps."""
    _check_run(steps, n_realizations)
    walk = walk or PercolatedWalk(ring, coin3)
    trajectories = walk.ensemble(psi_c, p, int(steps), n_realizations, master_seed, 0, workers)

    total = np.zeros(ring.size * 3)
    for _, _, final in trajectories:
        total += np.abs(final) ** 2
    return total / n_realizations
