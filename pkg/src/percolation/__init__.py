"""Dynamically percolated lazy walks: Monte Carlo and exact channel."""

from src.percolation.channel import (
    PercolationChannel,
    channel_step,
    channel_survival,
    evolve_density,
)
from src.percolation.configurations import (
    config_at,
    config_probability,
    enumerate_configs,
    percolated_step,
    realization_stream,
    sample_config,
)
from src.percolation.monte_carlo import (
    PercolatedWalk,
    averaged_occupation,
    averaged_survival,
    realization_survival,
)

__all__ = [
    'PercolationChannel',
    'channel_step',
    'channel_survival',
    'evolve_density',
    'config_at',
    'config_probability',
    'enumerate_configs',
    'percolated_step',
    'realization_stream',
    'sample_config',
    'PercolatedWalk',
    'averaged_occupation',
    'averaged_survival',
    'realization_survival',
]
