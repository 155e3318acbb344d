"""Data models for the ring walk toolkit."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.shared.error_handling import (
    DimensionMismatchError,
    NormalizationError,
    NumericalFaultError,
    ParameterError,
)


# Coin basis order per coin dimension
COIN_LABELS: Dict[int, Tuple[str, ...]] = {
    2: ("L", "R"),
    3: ("L", "S", "R"),
}

UNITARITY_TOL = 1e-12
NORM_TOL = 1e-12


class WalkKind(Enum):
    """Walk families handled by the toolkit."""
    TWO_STATE = "two-state"
    LAZY = "lazy"
    PERCOLATED = "percolated"

    @property
    def coin_dimension(self) -> int:
        """Coin dimension the walk family requires."""
        return 2 if self is WalkKind.TWO_STATE else 3


class SpectralMethod(Enum):
    """How a spectral estimate was obtained."""
    DENSE = "dense"
    NORM_GROWTH = "norm-growth"


class DecayProvenance(Enum):
    """Origin of a decay rate."""
    PREDICTED = "predicted-from-spectrum"
    FITTED = "fitted-from-series"


class FitAxis(Enum):
    """Abscissa of a log-linear fit."""
    TIME = "t"
    LOG_TIME = "ln t"


class EfficiencyMethod(Enum):
    """How a transport efficiency was obtained."""
    EXACT_PROJECTOR = "exact-projector"
    CLOSED_FORM = "closed-form"
    LINE_ESTIMATE = "line-estimate"
    SIMULATED = "simulated"


class PercolationMode(Enum):
    """Percolation channel construction modes."""
    EXACT = "exact-enumeration"
    MONTE_CARLO = "monte-carlo"


# Walk Models
@dataclass(frozen=True)
class RingConfig:
    """
    Ring of 2N vertices labelled m = -N+1 .. N.

    Internal index j = m + N - 1, so the sink (m = N) sits at j = 2N - 1.
    Edge e_j joins internal vertices j and (j + 1) mod 2N.
    """
    half_size: int
    source: int = 0

    def __post_init__(self):
        if isinstance(self.half_size, bool) or int(self.half_size) != self.half_size:
            raise ParameterError(f"half_size must be an integer, got {self.half_size!r}")
        if self.half_size < 1:
            raise ParameterError(f"half_size must be >= 1, got {self.half_size}")
        if not (-self.half_size + 1 <= self.source <= self.half_size - 1):
            raise ParameterError(
                f"source vertex {self.source} must lie in "
                f"[{-self.half_size + 1}, {self.half_size - 1}] (the sink is m={self.half_size})"
            )

    @property
    def size(self) -> int:
        """Number of vertices (and of edges)."""
        return 2 * self.half_size

    @property
    def sink_vertex(self) -> int:
        return self.half_size

    @property
    def sink_index(self) -> int:
        return 2 * self.half_size - 1

    @property
    def source_index(self) -> int:
        return self.index(self.source)

    @property
    def vertex_labels(self) -> range:
        return range(-self.half_size + 1, self.half_size + 1)

    def index(self, vertex: int) -> int:
        """Internal index of a vertex label, with labels taken mod 2N."""
        return (vertex + self.half_size - 1) % self.size

    def vertex(self, index: int) -> int:
        """Vertex label of an internal index."""
        if not 0 <= index < self.size:
            raise ParameterError(f"index {index} outside ring of size {self.size}")
        return index - self.half_size + 1

    def edge_endpoints(self, edge: int) -> Tuple[int, int]:
        """Internal indices joined by edge e_j."""
        return edge, (edge + 1) % self.size


@dataclass(frozen=True, eq=False)
class CoinOperator:
    """Coin unitary with its family parameters."""
    dimension: int
    matrix: np.ndarray
    rho: float
    alpha: Optional[float] = None

    def __post_init__(self):
        if self.matrix.shape != (self.dimension, self.dimension):
            raise DimensionMismatchError(
                f"coin matrix shape {self.matrix.shape} does not match dimension {self.dimension}"
            )
        residual = self.unitarity_residual()
        if residual > UNITARITY_TOL:
            raise ParameterError(f"coin is not unitary: residual {residual:.3e}")

    @property
    def labels(self) -> Tuple[str, ...]:
        return COIN_LABELS[self.dimension]

    def unitarity_residual(self) -> float:
        """Max-entry norm of C^dagger C - I."""
        gram = self.matrix.conj().T @ self.matrix
        return float(np.max(np.abs(gram - np.eye(self.dimension))))


@dataclass(eq=False)
class WalkState:
    """Pure walker state, position-major amplitude vector."""
    ring: RingConfig
    dimension: int
    amplitudes: np.ndarray

    def __post_init__(self):
        expected = self.ring.size * self.dimension
        if self.amplitudes.shape != (expected,):
            raise DimensionMismatchError(
                f"amplitude vector of shape {self.amplitudes.shape}, expected ({expected},)"
            )
        if self.norm_squared > 1.0 + NORM_TOL:
            raise NormalizationError(f"state norm squared {self.norm_squared:.15f} exceeds 1")

    @property
    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def as_grid(self) -> np.ndarray:
        """Amplitudes reshaped to (2N, d), rows in internal index order."""
        return self.amplitudes.reshape(self.ring.size, self.dimension)


@dataclass(eq=False)
class EvolutionOperator:
    """Dense step S, walk unitary U = S (I x C), sink projector and pi U."""
    ring: RingConfig
    coin: CoinOperator
    step: np.ndarray
    unitary: np.ndarray
    projector: np.ndarray
    projected: np.ndarray

    @property
    def dimension(self) -> int:
        return self.unitary.shape[0]


@dataclass(eq=False)
class SurvivalSeries:
    """
    Survival probability per step plus the weight removed at the sink.

    absorbed_flux has one row per step (row 0 is zero) and one column per
    coin component in basis order. Ensemble averages also carry the
    standard error of the mean survival.
    """
    survival: np.ndarray
    absorbed_flux: np.ndarray
    labels: Tuple[str, ...]
    metadata: Dict = field(default_factory=dict)
    standard_error: Optional[np.ndarray] = None

    @property
    def steps(self) -> int:
        return len(self.survival) - 1

    @property
    def cumulative_absorbed(self) -> np.ndarray:
        return np.cumsum(self.absorbed_flux.sum(axis=1))

    def channel_flux(self, label: str) -> np.ndarray:
        """Absorbed flux arriving through one coin component."""
        try:
            column = self.labels.index(label)
        except ValueError:
            raise ParameterError(f"unknown coin channel {label!r}, have {self.labels}")
        return self.absorbed_flux[:, column]

    def conservation_residual(self) -> float:
        """Max deviation of survival + cumulative absorbed flux from 1."""
        return float(np.max(np.abs(self.survival + self.cumulative_absorbed - 1.0)))

    def is_monotone(self, tol: float = 1e-14) -> bool:
        return bool(np.all(np.diff(self.survival) <= tol))


# Spectral Models
@dataclass
class SpectralEstimate:
    """Leading (and optionally sub-leading) eigenvalue modulus."""
    leading_modulus: float
    method: SpectralMethod
    iterations: int
    residual: float
    converged: bool = True
    sub_leading_modulus: Optional[float] = None
    effective_steps: Optional[int] = None

    def __post_init__(self):
        if self.sub_leading_modulus is not None and self.sub_leading_modulus > self.leading_modulus + NORM_TOL:
            raise NumericalFaultError(
                f"sub-leading modulus {self.sub_leading_modulus} exceeds leading {self.leading_modulus}"
            )


@dataclass
class DecayRate:
    """Asymptotic decay rate of the survival probability."""
    gamma: float
    provenance: DecayProvenance
    window: Optional[Tuple[int, int]] = None
    r_squared: Optional[float] = None
    spectral: Optional[SpectralEstimate] = None

    def __post_init__(self):
        if self.gamma < 0:
            raise ParameterError(f"decay rate must be non-negative, got {self.gamma}")


@dataclass
class PowerLawFit:
    """Slope of ln P against ln t."""
    exponent: float
    intercept: float
    window: Tuple[int, int]
    r_squared: float


# Trapping Models
@dataclass(eq=False)
class TrappedBasis:
    """
    Stationary states of the lazy walk.

    raw_states holds |s_n> for n = -N+1 .. N as rows (unnormalized); once
    orthonormalized, vectors holds the orthonormal rows built from the
    labels in vector_labels.
    """
    ring: RingConfig
    coin: CoinOperator
    raw_states: np.ndarray
    raw_labels: Tuple[int, ...]
    vectors: Optional[np.ndarray] = None
    vector_labels: Tuple[int, ...] = ()
    rejected_labels: Tuple[int, ...] = ()
    include_sink_states: bool = False
    order: str = "ascending-n"
    dependence_tol: float = 1e-10

    @property
    def is_orthonormalized(self) -> bool:
        return self.vectors is not None

    @property
    def dimension(self) -> int:
        return 0 if self.vectors is None else self.vectors.shape[0]

    def raw_state(self, n: int) -> np.ndarray:
        return self.raw_states[self.raw_labels.index(n)]

    def projector(self) -> np.ndarray:
        """P = sum_n |phi_n><phi_n| over the orthonormal rows."""
        if self.vectors is None:
            raise ParameterError("projector requires an orthonormalized basis")
        return self.vectors.T @ self.vectors.conj()

    def gram_residual(self) -> float:
        if self.vectors is None or self.dimension == 0:
            return 0.0
        gram = self.vectors.conj() @ self.vectors.T
        return float(np.max(np.abs(gram - np.eye(self.dimension))))


@dataclass
class EfficiencyReport:
    """Transport efficiency with its trapping breakdown."""
    eta: float
    method: EfficiencyMethod
    limiting_survival: Optional[float] = None
    trapping_probabilities: Dict[int, float] = field(default_factory=dict)
    decomposition: Optional[Tuple[complex, complex, complex]] = None
    estimates: Dict[str, float] = field(default_factory=dict)


@dataclass
class CommonEigenstateReport:
    """Outcome of the shift and coin condition checks for one state."""
    passes: bool
    beta: Optional[complex]
    shift_residual: float
    coin_residuals: Dict[int, float] = field(default_factory=dict)
    vertex_betas: Dict[int, complex] = field(default_factory=dict)
    beta_spread: float = 0.0
    failures: List[str] = field(default_factory=list)


# Percolation Models
@dataclass(frozen=True)
class EdgeConfig:
    """Edge configuration as a bitmask: edge j present iff bit j is set."""
    mask: int
    width: int

    def __post_init__(self):
        if self.width < 1:
            raise DimensionMismatchError(f"edge mask width must be >= 1, got {self.width}")
        if not 0 <= self.mask < (1 << self.width):
            raise DimensionMismatchError(
                f"mask {self.mask:#x} does not fit in {self.width} bits"
            )

    @classmethod
    def full(cls, width: int) -> "EdgeConfig":
        return cls((1 << width) - 1, width)

    @classmethod
    def empty(cls, width: int) -> "EdgeConfig":
        return cls(0, width)

    @classmethod
    def from_array(cls, present: np.ndarray) -> "EdgeConfig":
        """Build from a boolean vector indexed by edge."""
        present = np.asarray(present, dtype=bool)
        mask = 0
        for j in np.flatnonzero(present):
            mask |= 1 << int(j)
        return cls(mask, len(present))

    @property
    def count(self) -> int:
        """Number of present edges |K|."""
        return bin(self.mask).count("1")

    def present(self, edge: int) -> bool:
        return bool((self.mask >> edge) & 1)

    def as_array(self) -> np.ndarray:
        return np.array([(self.mask >> j) & 1 for j in range(self.width)], dtype=bool)


@dataclass
class PercolationParams:
    """Dynamical percolation settings."""
    p: float
    mode: PercolationMode = PercolationMode.MONTE_CARLO
    realizations: int = 1000
    master_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ParameterError(f"edge probability must lie in [0, 1], got {self.p}")
        if self.realizations < 1:
            raise ParameterError(f"realizations must be >= 1, got {self.realizations}")


@dataclass(eq=False)
class DensityMatrix:
    """Sub-normalized density matrix on the position-coin space."""
    matrix: np.ndarray

    @classmethod
    def from_state(cls, state: WalkState) -> "DensityMatrix":
        return cls(np.outer(state.amplitudes, state.amplitudes.conj()))

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def hermiticity_residual(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def min_eigenvalue(self) -> float:
        hermitian = 0.5 * (self.matrix + self.matrix.conj().T)
        return float(np.linalg.eigvalsh(hermitian)[0])

    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.matrix)).copy()

    def validate(self, hermitian_tol: float = 1e-10, positivity_tol: float = 1e-8) -> None:
        """
        Check hermiticity and positivity.

        Raises:
            NumericalFaultError: If either check fails
        """
        residual = self.hermiticity_residual()
        if residual > hermitian_tol:
            raise NumericalFaultError(f"density matrix not Hermitian (residual {residual:.3e})")
        lowest = self.min_eigenvalue()
        if lowest < -positivity_tol:
            raise NumericalFaultError(f"density matrix not positive (eigenvalue {lowest:.3e})")
