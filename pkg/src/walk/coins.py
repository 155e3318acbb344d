"""Coin operators for the two-state and lazy walk families."""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from src.shared.error_handling import (
    DimensionMismatchError,
    NormalizationError,
    ParameterError,
)
from src.shared.models import COIN_LABELS, CoinOperator

logger = logging.getLogger(__name__)

NORMALIZATION_TOL = 1e-10

# Preset names resolved through the coin eigenbasis, with accepted aliases
EIGEN_PRESETS = {
    "sigma+": "sigma+",
    "σ+": "sigma+",
    "σ⁺": "sigma+",
    "sigma1-": "sigma1-",
    "σ1-": "sigma1-",
    "σ₁⁻": "sigma1-",
    "sigma2-": "sigma2-",
    "σ2-": "sigma2-",
    "σ₂⁻": "sigma2-",
}


@dataclass(frozen=True, eq=False)
class CoinEigenbasis:
    """Orthonormal eigenvectors of a lazy coin: C s+ = s+, C s1- = -s1-, C s2- = -s2-."""
    sigma_plus: np.ndarray
    sigma1_minus: np.ndarray
    sigma2_minus: np.ndarray

    def as_matrix(self) -> np.ndarray:
        """Basis vectors as columns in the order (sigma+, sigma1-, sigma2-)."""
        return np.column_stack([self.sigma_plus, self.sigma1_minus, self.sigma2_minus])

    def vector(self, name: str) -> np.ndarray:
        canonical = EIGEN_PRESETS.get(name)
        if canonical is None:
            raise ParameterError(f"unknown eigenbasis preset {name!r}")
        return {
            "sigma+": self.sigma_plus,
            "sigma1-": self.sigma1_minus,
            "sigma2-": self.sigma2_minus,
        }[canonical].copy()


def build_coin2(rho: float) -> CoinOperator:
    """
    Build the two-state coin [[rho, sqrt(1-rho^2)], [sqrt(1-rho^2), -rho]].

    rho = 1/sqrt(2) gives the Hadamard coin; rho = 1 the diagonal coin
    that carries the walker to the sink in exactly N steps.

    Args:
        rho: Coin parameter in (0, 1]

    Returns:
        CoinOperator of dimension 2

    Raises:
        ParameterError: If rho is outside (0, 1]
    """
    if not 0.0 < rho <= 1.0:
        raise ParameterError(f"two-state coin requires 0 < rho <= 1, got {rho}")

    off_diagonal = np.sqrt(1.0 - rho ** 2)
    matrix = np.array([[rho, off_diagonal], [off_diagonal, -rho]], dtype=complex)
    return CoinOperator(dimension=2, matrix=matrix, rho=float(rho))


def build_coin3(rho: float, alpha: float) -> CoinOperator:
    """
    Build the lazy coin of the (rho, alpha) family in the (L, S, R) basis.

    The coin is Hermitian and unitary with spectrum {+1, -1, -1}.
    rho = 1/sqrt(3), alpha = 0 is the Grover coin.

    Args:
        rho: Coin parameter in (0, 1)
        alpha: Phase in [0, 2 pi)

    Returns:
        CoinOperator of dimension 3

    Raises:
        ParameterError: If rho or alpha is out of range
    """
    if not 0.0 < rho < 1.0:
        raise ParameterError(f"lazy coin requires 0 < rho < 1, got {rho}")
    if not 0.0 <= alpha < 2.0 * np.pi:
        raise ParameterError(f"lazy coin requires 0 <= alpha < 2 pi, got {alpha}")

    rho_sq = rho ** 2
    mixing = rho * np.sqrt(2.0 - 2.0 * rho_sq)
    phase = np.exp(1j * alpha)

    matrix = np.array([
        [-rho_sq, mixing, np.conj(phase) * (1.0 - rho_sq)],
        [mixing, 2.0 * rho_sq - 1.0, np.conj(phase) * mixing],
        [phase * (1.0 - rho_sq), phase * mixing, -rho_sq],
    ], dtype=complex)
    return CoinOperator(dimension=3, matrix=matrix, rho=float(rho), alpha=float(alpha))


def coin_eigenbasis(coin3: CoinOperator) -> CoinEigenbasis:
    """
    Eigenbasis of a lazy coin.

    Args:
        coin3: Coin built by build_coin3

    Returns:
        CoinEigenbasis (sigma+, sigma1-, sigma2-)

    Raises:
        DimensionMismatchError: If the coin is not three-dimensional
    """
    if coin3.dimension != 3 or coin3.alpha is None:
        raise DimensionMismatchError("coin eigenbasis is defined for lazy coins only")

    rho = coin3.rho
    phase = np.exp(1j * coin3.alpha)
    side = np.sqrt((1.0 - rho ** 2) / 2.0)

    sigma_plus = np.array([side, rho, side * phase], dtype=complex)
    sigma1_minus = np.array(
        [rho / np.sqrt(2.0), -np.sqrt(1.0 - rho ** 2), rho / np.sqrt(2.0) * phase],
        dtype=complex,
    )
    sigma2_minus = np.array([1.0, 0.0, -phase], dtype=complex) / np.sqrt(2.0)
    return CoinEigenbasis(sigma_plus, sigma1_minus, sigma2_minus)


def normalized_coin_state(psi_c: Sequence[complex], dimension: int) -> np.ndarray:
    """
    Validate a coin state and return it as a complex vector.

    Raises:
        DimensionMismatchError: If the length differs from the coin dimension
        NormalizationError: If the state is not normalized
    """
    vector = np.asarray(psi_c, dtype=complex)
    if vector.shape != (dimension,):
        raise DimensionMismatchError(
            f"coin state of shape {vector.shape} for coin dimension {dimension}"
        )
    norm_sq = float(np.vdot(vector, vector).real)
    if abs(norm_sq - 1.0) > NORMALIZATION_TOL:
        raise NormalizationError(f"coin state must be normalized, squared norm is {norm_sq}")
    return vector


def decompose_coin_state(
    psi_c: Sequence[complex],
    basis: CoinEigenbasis
) -> Tuple[complex, complex, complex]:
    """
    Expand a coin state as h+ sigma+ + h1 sigma1- + h2 sigma2-.

    Returns:
        (h+, h1, h2)
    """
    vector = normalized_coin_state(psi_c, 3)
    coefficients = basis.as_matrix().conj().T @ vector
    return complex(coefficients[0]), complex(coefficients[1]), complex(coefficients[2])


def compose_coin_state(
    coefficients: Tuple[complex, complex, complex],
    basis: CoinEigenbasis
) -> np.ndarray:
    """Inverse of decompose_coin_state (no normalization check)."""
    return basis.as_matrix() @ np.asarray(coefficients, dtype=complex)


def resolve_coin_state(
    coin: CoinOperator,
    preset: Optional[str] = None,
    amplitudes: Optional[Sequence[complex]] = None
) -> np.ndarray:
    """
    Resolve a named preset or explicit amplitudes into a coin vector.

    Eigenbasis presets (sigma+, sigma1-, sigma2-) resolve at the coin's own
    (rho, alpha); standard-basis labels (L, R and S for lazy coins) are
    accepted for any coin.

    Raises:
        ParameterError: If neither or both inputs are given, or the preset is unknown
    """
    if (preset is None) == (amplitudes is None):
        raise ParameterError("give exactly one of a coin preset or explicit amplitudes")

    if amplitudes is not None:
        return normalized_coin_state(amplitudes, coin.dimension)

    labels = COIN_LABELS[coin.dimension]
    if preset in labels:
        vector = np.zeros(coin.dimension, dtype=complex)
        vector[labels.index(preset)] = 1.0
        return vector

    if preset in EIGEN_PRESETS:
        if coin.dimension != 3:
            raise ParameterError(f"preset {preset!r} applies to lazy coins only")
        return coin_eigenbasis(coin).vector(preset)

    raise ParameterError(
        f"unknown coin preset {preset!r}; use one of {list(labels)} "
        f"or sigma+, sigma1-, sigma2-"
    )


def random_coin_state(dimension: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random normalized coin state."""
    vector = rng.normal(size=dimension) + 1j * rng.normal(size=dimension)
    return vector / np.linalg.norm(vector)
