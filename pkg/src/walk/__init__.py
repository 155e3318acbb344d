"""Walk construction and exact evolution."""

from src.walk.coins import (
    CoinEigenbasis,
    build_coin2,
    build_coin3,
    coin_eigenbasis,
    compose_coin_state,
    decompose_coin_state,
    resolve_coin_state,
)
from src.walk.evolution import (
    build_evolution,
    evolve_survival,
    initial_state,
    step_operator,
)

__all__ = [
    'CoinEigenbasis',
    'build_coin2',
    'build_coin3',
    'coin_eigenbasis',
    'compose_coin_state',
    'decompose_coin_state',
    'resolve_coin_state',
    'build_evolution',
    'evolve_survival',
    'initial_state',
    'step_operator',
]
