"""Shift and coin conditions for eigenstates shared by every percolated step."""

import logging
from typing import List, Optional, Union

import numpy as np

from src.shared.error_handling import DimensionMismatchError, NormalizationError
from src.shared.models import CommonEigenstateReport, CoinOperator, RingConfig, WalkState
from src.trapping.stationary import stationary_states

logger = logging.getLogger(__name__)

EIGENSTATE_TOL = 1e-10

# Swaps L and R, keeps S
REFLECTION = np.array([
    [0.0, 0.0, 1.0],
    [0.0, 1.0, 0.0],
    [1.0, 0.0, 0.0],
], dtype=complex)


def common_eigenstate_check(
    state: Union[WalkState, np.ndarray],
    coin3: CoinOperator,
    ring: Optional[RingConfig] = None,
    tol: float = EIGENSTATE_TOL
) -> CommonEigenstateReport:
    """
    Check whether a state is an eigenvector of U_K for every edge configuration K.

    Shift conditions: xi_L at vertex m equals xi_R at vertex m+1.
    Coin conditions: R C xi^m = beta xi^m with one beta for every vertex
    carrying amplitude. The state is normalized before testing.

    Args:
        state: Walk state (or amplitude vector) of a lazy walk
        coin3: Lazy coin
        ring: Ring geometry, required when a bare vector is passed
        tol: Residual tolerance

    Returns:
        CommonEigenstateReport, with beta set only when every condition holds

    Raises:
        NormalizationError: For the zero state
        DimensionMismatchError: For non-lazy inputs
    """
    if isinstance(state, WalkState):
        ring = state.ring
        amplitudes = state.amplitudes
    else:
        if ring is None:
            raise DimensionMismatchError("ring geometry required for a bare amplitude vector")
        amplitudes = np.asarray(state, dtype=complex)

    if coin3.dimension != 3 or amplitudes.shape != (ring.size * 3,):
        raise DimensionMismatchError("common eigenstate check applies to lazy walks only")

    norm = np.linalg.norm(amplitudes)
    if norm < tol:
        raise NormalizationError("the zero state cannot be a common eigenstate")
    grid = (amplitudes / norm).reshape(ring.size, 3)

    failures: List[str] = []

    # xi_L^{m} vs xi_R^{m+1}, wrapping around the ring
    shift_residual = float(np.max(np.abs(grid[:, 0] - np.roll(grid[:, 2], -1))))
    if shift_residual > tol:
        failures.append("shift")

    reflected = grid @ (REFLECTION @ coin3.matrix).T
    coin_residuals = {}
    vertex_betas = {}
    for j in range(ring.size):
        xi = grid[j]
        weight = np.vdot(xi, xi).real
        if weight < tol ** 2:
            continue
        beta = np.vdot(xi, reflected[j]) / weight
        m = ring.vertex(j)
        vertex_betas[m] = complex(beta)
        coin_residuals[m] = float(np.linalg.norm(reflected[j] - beta * xi) / np.sqrt(weight))

    if any(residual > tol for residual in coin_residuals.values()):
        failures.append("coin")

    betas = np.array(list(vertex_betas.values()))
    beta_spread = float(np.max(np.abs(betas - betas[0]))) if len(betas) else 0.0
    if beta_spread > tol:
        failures.append("beta-consistency")

    passes = not failures
    return CommonEigenstateReport(
        passes=passes,
        beta=complex(np.mean(betas)) if passes else None,
        shift_residual=shift_residual,
        coin_residuals=coin_residuals,
        vertex_betas=vertex_betas,
        beta_spread=beta_spread,
        failures=failures,
    )


def stationary_state_robustness(
    ring: RingConfig,
    coin3: CoinOperator,
    tol: float = EIGENSTATE_TOL
) -> List[CommonEigenstateReport]:
    """Common-eigenstate report for each sink-free stationary state, in ascending n."""
    raw = stationary_states(ring, coin3)
    reports = []
    for n in raw.raw_labels:
        if n > ring.half_size - 2:
            continue
        report = common_eigenstate_check(raw.raw_state(n), coin3, ring=ring, tol=tol)
        reports.append(report)
        logger.debug(f"Stationary state n={n}: passes={report.passes}, failures={report.failures}")
    return reports
