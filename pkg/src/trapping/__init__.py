"""Trapped states, transport efficiency and robustness checks of the lazy walk."""

from src.trapping.common_eigenstates import common_eigenstate_check, stationary_state_robustness
from src.trapping.efficiency import (
    efficiency_closed_form,
    efficiency_line_estimate,
    line_trapping_profile,
    transport_efficiency,
    worst_case_coin_state,
)
from src.trapping.stationary import (
    orthonormal_trapped_basis,
    sink_free_basis,
    stationary_states,
    trapping_probability,
    trapping_profile,
)

__all__ = [
    'common_eigenstate_check',
    'stationary_state_robustness',
    'efficiency_closed_form',
    'efficiency_line_estimate',
    'line_trapping_profile',
    'transport_efficiency',
    'worst_case_coin_state',
    'orthonormal_trapped_basis',
    'sink_free_basis',
    'stationary_states',
    'trapping_probability',
    'trapping_profile',
]
