"""Stationary (trapped) states of the lazy walk and trapping probabilities."""

import logging
from typing import Dict, List, Tuple, Union

import numpy as np

from src.shared.error_handling import DimensionMismatchError, ParameterError, TrappingError
from src.shared.models import CoinOperator, RingConfig, TrappedBasis, WalkState
from src.walk.evolution import build_evolution

logger = logging.getLogger(__name__)

EIGENVECTOR_TOL = 1e-10
DEPENDENCE_TOL = 1e-10


def stationary_state(ring: RingConfig, coin3: CoinOperator, n: int) -> np.ndarray:
    """
    Unnormalized two-vertex eigenvector |s_n> of U with eigenvalue one.

    Supported on vertex n (L and S components) and vertex n+1 (S and R
    components), with n+1 taken mod 2N.
    """
    rho, alpha = coin3.rho, coin3.alpha
    side = np.sqrt(1.0 - rho ** 2)
    stay = rho / np.sqrt(2.0)

    state = np.zeros(ring.size * 3, dtype=complex)
    here = ring.index(n) * 3
    there = ring.index(n + 1) * 3
    state[here + 0] = side
    state[here + 1] = stay
    state[there + 1] += stay
    state[there + 2] = np.exp(1j * alpha) * side
    return state


def stationary_states(ring: RingConfig, coin3: CoinOperator) -> TrappedBasis:
    """
    Build the 2N raw stationary states |s_n>, n = -N+1 .. N.

    Args:
        ring: Ring geometry
        coin3: Lazy coin of the (rho, alpha) family

    Returns:
        TrappedBasis holding only the raw part

    Raises:
        DimensionMismatchError: If the coin is not a lazy coin
        TrappingError: If some |s_n> is not fixed by U (coin outside the family)
    """
    if coin3.dimension != 3 or coin3.alpha is None:
        raise DimensionMismatchError("stationary states exist for lazy coins only")

    labels = tuple(ring.vertex_labels)
    raw = np.array([stationary_state(ring, coin3, n) for n in labels])

    unitary = build_evolution(ring, coin3).unitary
    for n, state in zip(labels, raw):
        residual = np.linalg.norm(unitary @ state - state) / np.linalg.norm(state)
        if residual > EIGENVECTOR_TOL:
            raise TrappingError(
                f"|s_{n}> is not stationary (residual {residual:.3e}); "
                f"coin is outside the lazy family"
            )

    return TrappedBasis(ring=ring, coin=coin3, raw_states=raw, raw_labels=labels)


def _modified_gram_schmidt(
    candidates: List[Tuple[int, np.ndarray]],
    tol: float
) -> Tuple[List[int], List[np.ndarray], List[int]]:
    """Two-pass modified Gram-Schmidt in the given order."""
    kept_labels: List[int] = []
    kept: List[np.ndarray] = []
    rejected: List[int] = []

    for label, vector in candidates:
        work = vector / np.linalg.norm(vector)
        for _ in range(2):
            for basis_vector in kept:
                work = work - np.vdot(basis_vector, work) * basis_vector
        norm = np.linalg.norm(work)
        if norm < tol:
            rejected.append(label)
            continue
        kept_labels.append(label)
        kept.append(work / norm)

    return kept_labels, kept, rejected


def orthonormal_trapped_basis(
    raw: TrappedBasis,
    include_sink_states: bool = False,
    tol: float = DEPENDENCE_TOL
) -> TrappedBasis:
    """
    Orthonormalize the stationary states in ascending n.

    The sink-free subset uses n = -N+1 .. N-2; the two states touching the
    sink (n = N-1, N) are added only with ``include_sink_states``.

    Raises:
        ParameterError: If no raw states are present
        TrappingError: On unexpected linear dependence
    """
    if raw.raw_states.size == 0:
        raise ParameterError("no raw stationary states to orthonormalize")

    ring = raw.ring
    upper = ring.half_size if include_sink_states else ring.half_size - 2
    candidates = [(n, raw.raw_state(n)) for n in raw.raw_labels if n <= upper]

    labels, vectors, rejected = _modified_gram_schmidt(candidates, tol)
    if rejected:
        raise TrappingError(
            f"stationary states {rejected} are linearly dependent on earlier ones"
        )

    dimension = ring.size * 3
    matrix = np.array(vectors) if vectors else np.zeros((0, dimension), dtype=complex)
    basis = TrappedBasis(
        ring=ring,
        coin=raw.coin,
        raw_states=raw.raw_states,
        raw_labels=raw.raw_labels,
        vectors=matrix,
        vector_labels=tuple(labels),
        rejected_labels=tuple(rejected),
        include_sink_states=include_sink_states,
        order="ascending-n",
        dependence_tol=tol,
    )

    residual = basis.gram_residual()
    if residual > tol:
        raise TrappingError(f"orthonormalized basis has Gram residual {residual:.3e}")

    logger.debug(
        f"Trapped basis: N={ring.half_size}, vectors={basis.dimension}, "
        f"include_sink_states={include_sink_states}"
    )
    return basis


def sink_free_basis(ring: RingConfig, coin3: CoinOperator, tol: float = DEPENDENCE_TOL) -> TrappedBasis:
    """Orthonormal sink-free trapped basis in one call."""
    return orthonormal_trapped_basis(stationary_states(ring, coin3), tol=tol)


def _amplitudes(state: Union[WalkState, np.ndarray], basis: TrappedBasis) -> np.ndarray:
    amplitudes = state.amplitudes if isinstance(state, WalkState) else np.asarray(state, dtype=complex)
    if amplitudes.shape != (basis.ring.size * 3,):
        raise DimensionMismatchError(
            f"state of shape {amplitudes.shape} does not live on the lazy ring"
        )
    return amplitudes


def trapped_component(basis: TrappedBasis, state: Union[WalkState, np.ndarray]) -> np.ndarray:
    """P_trap |psi> for an orthonormal sink-free basis."""
    if not basis.is_orthonormalized:
        raise ParameterError("trapping requires an orthonormalized basis")
    if basis.include_sink_states:
        raise ParameterError("trapping requires the sink-free basis")
    amplitudes = _amplitudes(state, basis)
    coefficients = basis.vectors.conj() @ amplitudes
    return basis.vectors.T @ coefficients


def trapping_probability(
    basis: TrappedBasis,
    state: Union[WalkState, np.ndarray],
    vertex: int
) -> float:
    """
    p_T(m) = sum_i |<m, i| P_trap |psi_in>|^2.

    Args:
        basis: Orthonormal sink-free trapped basis
        state: Initial walk state
        vertex: Vertex label m

    Returns:
        Non-negative trapping probability
    """
    component = trapped_component(basis, state)
    start = basis.ring.index(vertex) * 3
    return float(np.sum(np.abs(component[start:start + 3]) ** 2))


def trapping_profile(basis: TrappedBasis, state: Union[WalkState, np.ndarray]) -> Dict[int, float]:
    """p_T(m) for every vertex label, sink included."""
    component = trapped_component(basis, state)
    per_vertex = np.sum(np.abs(component.reshape(basis.ring.size, 3)) ** 2, axis=1)
    return {m: float(per_vertex[basis.ring.index(m)]) for m in basis.ring.vertex_labels}
