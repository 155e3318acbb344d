"""Transport efficiency of the lazy walk: exact, closed-form and line estimates."""

import logging
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from src.shared.error_handling import ParameterError
from src.shared.models import (
    CoinOperator,
    EfficiencyMethod,
    EfficiencyReport,
    RingConfig,
    SurvivalSeries,
    TrappedBasis,
)
from src.trapping.stationary import sink_free_basis, trapping_profile
from src.walk.coins import coin_eigenbasis, decompose_coin_state, normalized_coin_state
from src.walk.evolution import initial_state

logger = logging.getLogger(__name__)

CLOSED_FORM_SIZES = (2, 3, 4, 5)


def _check_rho(rho: float) -> None:
    if not 0.0 < rho < 1.0:
        raise ParameterError(f"lazy walk requires 0 < rho < 1, got {rho}")


def transport_efficiency(
    ring: RingConfig,
    coin3: CoinOperator,
    psi_c: Sequence[complex],
    basis: Optional[TrappedBasis] = None
) -> EfficiencyReport:
    """
    Exact transport efficiency eta = 1 - ||P_trap psi_in||^2.

    The report also carries the eigenbasis decomposition of psi_c, the
    per-vertex trapping probabilities and, when the source is antipodal to
    the sink, the closed-form (N <= 5) and line estimates for comparison.

    Args:
        ring: Ring geometry
        coin3: Lazy coin
        psi_c: Normalized initial coin state
        basis: Prebuilt sink-free basis to reuse

    Returns:
        EfficiencyReport with method exact-projector
    """
    vector = normalized_coin_state(psi_c, 3)
    if basis is None:
        basis = sink_free_basis(ring, coin3)

    profile = trapping_profile(basis, initial_state(ring, vector))
    limiting = sum(p for m, p in profile.items() if m != ring.sink_vertex)
    eta = float(np.clip(1.0 - limiting, 0.0, 1.0))

    decomposition = decompose_coin_state(vector, coin_eigenbasis(coin3))
    h_plus, _, h2 = decomposition

    estimates: Dict[str, float] = {}
    if ring.source == 0:
        if ring.half_size in CLOSED_FORM_SIZES:
            estimates[EfficiencyMethod.CLOSED_FORM.value] = efficiency_closed_form(
                ring.half_size, coin3.rho, abs(h_plus) ** 2, abs(h2) ** 2
            )
        estimates[EfficiencyMethod.LINE_ESTIMATE.value] = efficiency_line_estimate(
            ring.half_size, coin3.rho, h_plus, h2
        )

    logger.debug(f"Transport efficiency: N={ring.half_size}, rho={coin3.rho}, eta={eta:.12f}")
    return EfficiencyReport(
        eta=eta,
        method=EfficiencyMethod.EXACT_PROJECTOR,
        limiting_survival=float(limiting),
        trapping_probabilities=profile,
        decomposition=decomposition,
        estimates=estimates,
    )


def efficiency_closed_form(
    half_size: int,
    rho: float,
    h_plus_sq: float,
    h2_sq: float
) -> float:
    """
    Closed-form efficiency of small rings (N = 2 .. 5).

    Only |h+|^2 and |h2|^2 enter; the sigma1- component is never trapped.

    Args:
        half_size: N in {2, 3, 4, 5}
        rho: Coin parameter in (0, 1)
        h_plus_sq: |h+|^2
        h2_sq: |h2|^2

    Returns:
        eta

    Raises:
        ParameterError: If N is outside the tabulated range or the weights exceed one
    """
    if half_size not in CLOSED_FORM_SIZES:
        raise ParameterError(f"closed form exists for N in {CLOSED_FORM_SIZES}, got {half_size}")
    _check_rho(rho)
    if h_plus_sq < 0 or h2_sq < 0 or h_plus_sq + h2_sq > 1.0 + 1e-12:
        raise ParameterError(
            f"eigenbasis weights must be non-negative with sum <= 1, got {h_plus_sq}, {h2_sq}"
        )

    r2 = rho ** 2
    r4 = r2 ** 2

    if half_size == 2:
        return (
            1.0
            - 2.0 * (1.0 - r2) / (4.0 - 3.0 * r2) * h2_sq
            - 2.0 / (4.0 - r2) * h_plus_sq
        )

    if half_size == 3:
        prefactor = 4.0 * (2.0 - r2)
        sigma2_term = (1.0 - r2) * h2_sq / (16.0 - 20.0 * r2 + 5.0 * r4)
        plus_term = h_plus_sq / (16.0 - 12.0 * r2 + r4)
    elif half_size == 4:
        prefactor = 2.0 * (16.0 - 16.0 * r2 + 3.0 * r4)
        sigma2_term = (1.0 - r2) * h2_sq / (64.0 - 7.0 * r2 * (r2 - 4.0) ** 2)
        plus_term = h_plus_sq / (64.0 - r2 * (r4 - 24.0 * r2 + 80.0))
    else:
        r6 = r4 * r2
        r8 = r4 * r4
        prefactor = 8.0 * (2.0 - r2) * (r4 - 8.0 * r2 + 8.0)
        sigma2_term = (1.0 - r2) * h2_sq / (
            (3.0 * r2 - 4.0) * (3.0 * r6 - 36.0 * r4 + 96.0 * r2 - 64.0)
        )
        plus_term = h_plus_sq / (r8 - 40.0 * r6 + 240.0 * r4 - 448.0 * r2 + 256.0)

    return 1.0 - prefactor * (sigma2_term + plus_term)


def line_quotient(rho: float) -> float:
    """Q = (2 - rho^2 - 2 sqrt(1 - rho^2)) / rho^2, the per-vertex decay of trapping on a line."""
    _check_rho(rho)
    return (2.0 - rho ** 2 - 2.0 * np.sqrt(1.0 - rho ** 2)) / rho ** 2


def line_trapping_profile(
    half_size: int,
    rho: float,
    h_plus: complex,
    h2: complex
) -> Dict[int, float]:
    """
    Infinite-line trapping probabilities restricted to m = -N+1 .. N-1.

    Right of the source the weight follows |h+ + h2|^2, left of it
    |h+ - h2|^2, both falling off as Q^(2|m|).
    """
    if half_size < 1:
        raise ParameterError(f"half_size must be >= 1, got {half_size}")
    q = line_quotient(rho)
    r2 = rho ** 2
    tail = (2.0 - 2.0 * r2) / r2 ** 2

    profile = {0: q / r2 * (abs(h_plus) ** 2 + (1.0 - r2) * abs(h2) ** 2)}
    for m in range(1, half_size):
        decay = q ** (2 * m)
        profile[m] = tail * decay * abs(h_plus + h2) ** 2
        profile[-m] = tail * decay * abs(h_plus - h2) ** 2
    return dict(sorted(profile.items()))


def efficiency_line_estimate(
    half_size: int,
    rho: float,
    h_plus: complex,
    h2: complex
) -> float:
    """
    Efficiency of a ring of size 2N estimated from the infinite-line result.

    Args:
        half_size: N
        rho: Coin parameter in (0, 1)
        h_plus: sigma+ amplitude of the initial coin state
        h2: sigma2- amplitude of the initial coin state

    Returns:
        Estimated eta
    """
    if half_size < 1:
        raise ParameterError(f"half_size must be >= 1, got {half_size}")
    q = line_quotient(rho)
    r2 = rho ** 2
    weight_plus = abs(h_plus) ** 2
    weight_two = abs(h2) ** 2

    ring_tail = np.sqrt(1.0 - r2) * (1.0 - q ** (2 * (half_size - 1))) * (weight_plus + weight_two)
    return float(1.0 - q / r2 * (ring_tail + (1.0 - r2) * weight_two + weight_plus))


def trapping_coin_block(basis: TrappedBasis) -> np.ndarray:
    """
    Source block M of the trapping projector.

    For a walker started at the source, eta(psi_c) = 1 - psi_c^dagger M psi_c.
    """
    start = basis.ring.source_index * 3
    block = basis.projector()[start:start + 3, start:start + 3]
    return 0.5 * (block + block.conj().T)


def worst_case_coin_state(
    ring: RingConfig,
    coin3: CoinOperator,
    basis: Optional[TrappedBasis] = None
) -> Tuple[np.ndarray, float]:
    """
    Initial coin state with the lowest transport efficiency.

    Returns:
        (coin state, its eta)
    """
    if basis is None:
        basis = sink_free_basis(ring, coin3)
    block = trapping_coin_block(basis)
    values, vectors = np.linalg.eigh(block)
    return vectors[:, -1], float(1.0 - values[-1])


def simulated_efficiency(series: SurvivalSeries) -> EfficiencyReport:
    """eta read off the last step of a simulated survival series."""
    return EfficiencyReport(
        eta=float(np.clip(1.0 - series.survival[-1], 0.0, 1.0)),
        method=EfficiencyMethod.SIMULATED,
        limiting_survival=float(series.survival[-1]),
    )
