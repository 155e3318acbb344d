"""Spectra of the projected walk operator and of the percolation channel."""

import logging
from typing import Optional, Tuple, Union

import numpy as np

from src.shared.error_handling import (
    ConvergenceError,
    DimensionMismatchError,
    ParameterError,
    PercolationError,
    SpectralError,
)
from src.shared.models import (
    CoinOperator,
    DecayProvenance,
    DecayRate,
    EvolutionOperator,
    RingConfig,
    SpectralEstimate,
    SpectralMethod,
    WalkKind,
)
from src.percolation.channel import PercolationChannel
from src.trapping.stationary import sink_free_basis
from src.walk.evolution import build_evolution

logger = logging.getLogger(__name__)

DENSE_MAX_DIMENSION = 2000
TRAPPED_CUTOFF = 1e-8
DENSE_RESIDUAL_TOL = 1e-8
NORM_GROWTH_T_MAX = 2 ** 50
NORM_GROWTH_MIN_STEPS = 100
CHANNEL_PATIENCE = 100
CHANNEL_MAX_ITERATIONS = 1_000_000

MatrixLike = Union[np.ndarray, EvolutionOperator]


def _as_square(operator: MatrixLike) -> np.ndarray:
    matrix = operator.projected if isinstance(operator, EvolutionOperator) else operator
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {matrix.shape}")
    return matrix


def dense_eigensystem(operator: MatrixLike) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    Eigenvalues, eigenvectors (columns) and the residual max ||A v - lambda v||.

    Raises:
        ConvergenceError: If the eigen-solve fails
    """
    matrix = _as_square(operator)
    try:
        eigenvalues, eigenvectors = np.linalg.eig(matrix)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"dense eigen-solve failed: {exc}", residual=float("inf")) from exc

    residual = float(np.max(np.linalg.norm(matrix @ eigenvectors - eigenvectors * eigenvalues, axis=0)))
    order = np.argsort(-np.abs(eigenvalues), kind="stable")
    return eigenvalues[order], eigenvectors[:, order], residual


def dense_spectrum(
    operator: MatrixLike,
    max_dimension: int = DENSE_MAX_DIMENSION,
    residual_tol: float = DENSE_RESIDUAL_TOL
) -> np.ndarray:
    """
    All eigenvalues, sorted by descending modulus.

    An EvolutionOperator contributes its projected matrix pi U.

    Raises:
        ParameterError: If the dimension exceeds max_dimension
        ConvergenceError: If the eigen-solve fails or its residual exceeds
            residual_tol (relative to the 1-norm); the error carries the residual
    """
    matrix = _as_square(operator)
    if matrix.shape[0] > max_dimension:
        raise ParameterError(
            f"dense spectra are limited to dimension {max_dimension}, got {matrix.shape[0]}"
        )
    eigenvalues, _, residual = dense_eigensystem(matrix)
    if residual > residual_tol * max(1.0, float(np.linalg.norm(matrix, 1))):
        raise ConvergenceError(
            f"dense eigen-solve residual {residual:.3e} exceeds {residual_tol:.1e}",
            residual=residual,
        )
    return eigenvalues


def eigenvalue_multiplicity(
    eigenvalues: np.ndarray,
    target: complex = 1.0,
    tol: float = TRAPPED_CUTOFF
) -> int:
    """Number of eigenvalues within tol of target."""
    return int(np.sum(np.abs(np.asarray(eigenvalues) - target) < tol))


def sub_leading_modulus(
    eigenvalues: np.ndarray,
    cutoff: float = 1.0 - TRAPPED_CUTOFF
) -> Optional[float]:
    """Largest modulus strictly below cutoff, or None."""
    moduli = np.abs(np.asarray(eigenvalues))
    below = moduli[moduli < cutoff]
    return float(np.max(below)) if below.size else None


def leading_moduli(
    eigenvalues: np.ndarray,
    cutoff: float = 1.0 - TRAPPED_CUTOFF
) -> Tuple[float, Optional[float]]:
    """(leading modulus, sub-leading modulus below cutoff)."""
    moduli = np.abs(np.asarray(eigenvalues))
    if moduli.size == 0:
        raise SpectralError("empty spectrum")
    return float(np.max(moduli)), sub_leading_modulus(eigenvalues, cutoff)


def norm_growth_radius(
    operator: MatrixLike,
    t_max: int = NORM_GROWTH_T_MAX,
    tol: float = 1e-8,
    start: Optional[np.ndarray] = None,
    seed: int = 0,
    patience: int = 3,
    min_steps: int = NORM_GROWTH_MIN_STEPS
) -> SpectralEstimate:
    """
    Leading modulus as the limit of ||A^t x||^(1/t).

    Powers are formed by repeated squaring with the scale kept in log
    form, so the estimate at t = 2^k costs k products. The estimate is
    converged once it changes by less than tol (relative) across
    ``patience`` consecutive doublings, each spanning at least
    ``min_steps`` steps. Complex leading pairs only perturb the estimate
    at order 1/t, so the doubling sequence still converges.

    Args:
        operator: Matrix (or EvolutionOperator) with norm <= 1 + 1e-10
        t_max: Largest power reached
        tol: Relative change tolerance
        start: Start vector; a seeded generic complex vector by default
        seed: Seed of the default start vector
        patience: Consecutive small changes required
        min_steps: Minimum span of a doubling that may count as converged

    Returns:
        SpectralEstimate, flagged unconverged if t_max is reached first

    Raises:
        ParameterError: If the operator norm exceeds 1 + 1e-10
    """
    matrix = _as_square(operator)
    operator_norm = float(np.linalg.norm(matrix, 2))
    if operator_norm > 1.0 + 1e-10:
        raise ParameterError(f"norm growth needs a contraction, operator norm is {operator_norm}")

    if start is None:
        rng = np.random.default_rng(seed)
        start = rng.normal(size=matrix.shape[0]) + 1j * rng.normal(size=matrix.shape[0])
    vector = np.asarray(start, dtype=complex)
    vector = vector / np.linalg.norm(vector)

    power = matrix.copy()
    log_scale = 0.0
    exponent = 1
    previous: Optional[float] = None
    change = np.inf
    stable = 0
    doublings = 0

    while True:
        image_norm = np.linalg.norm(power @ vector)
        if image_norm == 0.0:
            logger.debug(f"Norm growth: image vanished at t={exponent}")
            return SpectralEstimate(
                leading_modulus=0.0,
                method=SpectralMethod.NORM_GROWTH,
                iterations=doublings,
                residual=0.0,
                effective_steps=exponent,
            )

        estimate = float(np.exp((log_scale + np.log(image_norm)) / exponent))
        if previous is not None:
            change = abs(estimate - previous) / max(estimate, np.finfo(float).tiny)
            if change < tol and exponent // 2 >= min_steps:
                stable += 1
            else:
                stable = 0
            if stable >= patience:
                logger.debug(f"Norm growth converged: estimate={estimate:.12f}, t={exponent}")
                return SpectralEstimate(
                    leading_modulus=min(estimate, 1.0 + 1e-10),
                    method=SpectralMethod.NORM_GROWTH,
                    iterations=doublings,
                    residual=change,
                    effective_steps=exponent,
                )

        if exponent * 2 > t_max:
            break

        squared = power @ power
        scale = np.linalg.norm(squared)
        if scale == 0.0:
            return SpectralEstimate(
                leading_modulus=0.0,
                method=SpectralMethod.NORM_GROWTH,
                iterations=doublings + 1,
                residual=0.0,
                effective_steps=exponent * 2,
            )
        power = squared / scale
        log_scale = 2.0 * log_scale + np.log(scale)
        exponent *= 2
        doublings += 1
        previous = estimate

    logger.warning(
        f"Norm growth did not converge within t_max={t_max}: "
        f"estimate={estimate:.12f}, last change={change:.3e}"
    )
    return SpectralEstimate(
        leading_modulus=min(estimate, 1.0 + 1e-10),
        method=SpectralMethod.NORM_GROWTH,
        iterations=doublings,
        residual=float(change),
        converged=False,
        effective_steps=exponent,
    )


def predict_decay_rate(
    ring: RingConfig,
    coin: CoinOperator,
    mode: Union[WalkKind, str],
    trapped_tol: float = TRAPPED_CUTOFF
) -> DecayRate:
    """
    Decay rate predicted from the dense spectrum of pi U.

    Two-state walks use the leading eigenvalue, gamma = 2 (1 - |lambda_l|);
    lazy walks exclude the trapped eigenvalue-one block and use the largest
    modulus below 1 - trapped_tol, gamma = 2 (1 - |lambda_sl|).

    Raises:
        ParameterError: For the percolated mode (use channel_decay_rate)
        SpectralError: If a lazy spectrum has no eigenvalue below the cutoff
    """
    kind = WalkKind(mode)
    if kind is WalkKind.PERCOLATED:
        raise ParameterError("percolated decay rates come from channel_decay_rate")

    operator = build_evolution(ring, coin, kind)
    eigenvalues = dense_spectrum(operator)
    leading = float(np.abs(eigenvalues[0]))

    if kind is WalkKind.TWO_STATE:
        governing = leading
        sub_leading = None
    else:
        sub_leading = sub_leading_modulus(eigenvalues, 1.0 - trapped_tol)
        if sub_leading is None:
            raise SpectralError(
                f"no eigenvalue below the trapped cutoff for N={ring.half_size}, rho={coin.rho}"
            )
        governing = sub_leading

    gamma = max(0.0, 2.0 * (1.0 - governing))
    logger.debug(
        f"Predicted decay: kind={kind.value}, N={ring.half_size}, rho={coin.rho}, "
        f"|lambda|={governing:.12f}, gamma={gamma:.6e}"
    )
    return DecayRate(
        gamma=gamma,
        provenance=DecayProvenance.PREDICTED,
        spectral=SpectralEstimate(
            leading_modulus=min(leading, 1.0 + 1e-10),
            method=SpectralMethod.DENSE,
            iterations=1,
            residual=0.0,
            sub_leading_modulus=sub_leading,
        ),
    )


def _random_density(dimension: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    factor = rng.normal(size=(dimension, dimension)) + 1j * rng.normal(size=(dimension, dimension))
    return factor @ factor.conj().T


def channel_decay_rate(
    channel: PercolationChannel,
    tol: float = 1e-8,
    max_iterations: int = CHANNEL_MAX_ITERATIONS,
    patience: int = CHANNEL_PATIENCE,
    deflate_trapped: bool = False,
    seed: int = 0
) -> DecayRate:
    """
    gamma = 1 - |lambda_l(Phi)| from iterating the channel map.

    The channel is applied to a generic positive seed and the Frobenius
    norm ratio of consecutive iterates is taken as |lambda_l|; it is
    converged once it changes by less than tol (relative) over
    ``patience`` consecutive iterations. A channel with a single
    configuration (p = 0 or 1) is conjugation by one pi U_K, whose leading
    modulus is obtained by norm growth and squared.

    With ``deflate_trapped`` the map is restricted to the orthogonal
    complement Q of the ideal walk's sink-free stationary states,
    X -> Q Phi(Q X Q) Q.

    Args:
        channel: Exact-enumeration channel
        tol: Relative change tolerance
        max_iterations: Iteration cap
        patience: Consecutive small changes required
        deflate_trapped: Remove the ideal trapped subspace
        seed: Seed of the start operator

    Returns:
        DecayRate with provenance predicted-from-spectrum

    Raises:
        PercolationError: For a sampled channel
        ConvergenceError: If the ratio does not settle within max_iterations
    """
    if not channel.is_exact:
        raise PercolationError("channel spectra need an exact-enumeration channel; sampled ones are biased")

    complement = None
    if deflate_trapped:
        complement = np.eye(channel.dimension) - sink_free_basis(channel.ring, channel.coin).projector()

    if channel.is_single_configuration:
        _, projected = next(channel.projected_unitaries())
        if complement is not None:
            projected = complement @ projected @ complement
        estimate = norm_growth_radius(projected, tol=tol, seed=seed)
        leading = estimate.leading_modulus ** 2
        logger.debug(f"Single-configuration channel: |lambda_l|={leading:.12f}")
        return DecayRate(
            gamma=max(0.0, 1.0 - leading),
            provenance=DecayProvenance.PREDICTED,
            spectral=SpectralEstimate(
                leading_modulus=min(leading, 1.0 + 1e-10),
                method=SpectralMethod.NORM_GROWTH,
                iterations=estimate.iterations,
                residual=estimate.residual,
                converged=estimate.converged,
                effective_steps=estimate.effective_steps,
            ),
        )

    current = _random_density(channel.dimension, seed)
    if complement is not None:
        current = complement @ current @ complement
    current = current / np.linalg.norm(current)

    previous: Optional[float] = None
    change = np.inf
    stable = 0
    estimate = 0.0

    for iteration in range(1, max_iterations + 1):
        image = channel.apply(current)
        if complement is not None:
            image = complement @ image @ complement
        estimate = float(np.linalg.norm(image))

        if estimate == 0.0:
            return DecayRate(
                gamma=1.0,
                provenance=DecayProvenance.PREDICTED,
                spectral=SpectralEstimate(0.0, SpectralMethod.NORM_GROWTH, iteration, 0.0),
            )

        if previous is not None:
            change = abs(estimate - previous) / estimate
            stable = stable + 1 if change < tol else 0
            if stable >= patience:
                leading = min(estimate, 1.0 + 1e-10)
                logger.info(
                    f"Channel spectrum converged: N={channel.ring.half_size}, p={channel.p}, "
                    f"|lambda_l|={leading:.12f}, iterations={iteration}"
                )
                return DecayRate(
                    gamma=max(0.0, 1.0 - leading),
                    provenance=DecayProvenance.PREDICTED,
                    spectral=SpectralEstimate(
                        leading_modulus=leading,
                        method=SpectralMethod.NORM_GROWTH,
                        iterations=iteration,
                        residual=change,
                        effective_steps=iteration,
                    ),
                )

        current = image / estimate
        previous = estimate

    raise ConvergenceError(
        f"channel spectrum did not converge in {max_iterations} iterations "
        f"(estimate {estimate:.12f})",
        residual=float(change),
        iterations=max_iterations,
    )
