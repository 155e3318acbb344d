"""Serializable experiment and sweep specifications."""

import math
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.shared.config import settings
from src.shared.models import COIN_LABELS, CoinOperator, RingConfig, WalkKind
from src.walk.coins import EIGEN_PRESETS, build_coin2, build_coin3, resolve_coin_state

SWEEP_AXES = ("alpha", "rho", "p", "N")
SWEEP_QUANTITIES = ("gamma_fit", "gamma_predicted", "eta", "plateau")

# Sweep axis name -> ExperimentSpec field
AXIS_FIELDS = {"alpha": "alpha", "rho": "rho", "p": "p", "N": "half_size"}


class ExperimentSpec(BaseModel):
    """One walk experiment, fully reproducible from its JSON form."""

    model_config = ConfigDict(extra="forbid")

    kind: WalkKind = Field(WalkKind.TWO_STATE, description="Walk family")
    half_size: int = Field(5, ge=1, description="N; the ring has 2N vertices")
    rho: float = Field(1.0 / math.sqrt(2.0), gt=0.0, le=1.0, description="Coin parameter rho")
    alpha: float = Field(0.0, ge=0.0, lt=2.0 * math.pi, description="Lazy coin phase alpha")
    p: float = Field(0.5, ge=0.0, le=1.0, description="Edge presence probability")
    coin_state: Optional[str] = Field(None, description="Coin preset: sigma+, sigma1-, sigma2-, L, S, R")
    amplitudes: Optional[List[Tuple[float, float]]] = Field(
        None, description="Explicit coin amplitudes as (re, im) pairs"
    )
    source: int = Field(0, description="Source vertex label")
    steps: int = Field(1000, ge=1, description="Number of steps T")
    realizations: int = Field(1000, ge=1, description="Monte Carlo realizations")
    seed: int = Field(default_factory=lambda: settings.default_seed, description="Master seed")
    output: Optional[str] = Field(None, description="Output path")
    format: Literal["csv", "json"] = Field("csv", description="Output format")

    @model_validator(mode="after")
    def check_consistency(self) -> "ExperimentSpec":
        """Cross-field checks that mirror the library preconditions."""
        dimension = self.kind.coin_dimension
        if dimension == 3 and not self.rho < 1.0:
            raise ValueError(f"{self.kind.value} walks need rho < 1, got {self.rho}")

        if self.coin_state is not None and self.amplitudes is not None:
            raise ValueError("give either coin_state or amplitudes, not both")
        if self.coin_state is None and self.amplitudes is None:
            self.coin_state = "L" if dimension == 2 else "sigma+"

        if self.coin_state is not None:
            known = set(COIN_LABELS[dimension])
            if dimension == 3:
                known |= set(EIGEN_PRESETS)
            if self.coin_state not in known:
                raise ValueError(
                    f"coin state {self.coin_state!r} is not valid for {self.kind.value} walks"
                )
        else:
            if len(self.amplitudes) != dimension:
                raise ValueError(f"expected {dimension} amplitudes, got {len(self.amplitudes)}")
            norm_sq = sum(re * re + im * im for re, im in self.amplitudes)
            if abs(norm_sq - 1.0) > 1e-10:
                raise ValueError(f"amplitudes must be normalized, squared norm is {norm_sq}")

        if not -self.half_size + 1 <= self.source <= self.half_size - 1:
            raise ValueError(f"source {self.source} must lie in [{-self.half_size + 1}, {self.half_size - 1}]")
        return self

    def ring(self) -> RingConfig:
        return RingConfig(half_size=self.half_size, source=self.source)

    def coin(self) -> CoinOperator:
        if self.kind is WalkKind.TWO_STATE:
            return build_coin2(self.rho)
        return build_coin3(self.rho, self.alpha)

    def coin_vector(self, coin: Optional[CoinOperator] = None) -> np.ndarray:
        """Initial coin state resolved at this spec's (rho, alpha)."""
        coin = coin or self.coin()
        if self.amplitudes is not None:
            return resolve_coin_state(coin, amplitudes=[complex(re, im) for re, im in self.amplitudes])
        return resolve_coin_state(coin, preset=self.coin_state)

    def to_json(self) -> str:
        return self.model_dump_json()

    @classmethod
    def from_json(cls, text: str) -> "ExperimentSpec":
        return cls.model_validate_json(text)


class SweepSpec(BaseModel):
    """A base experiment swept along one axis."""

    model_config = ConfigDict(extra="forbid")

    base: ExperimentSpec = Field(..., description="Experiment at every grid point")
    axis: Literal["alpha", "rho", "p", "N"] = Field(..., description="Swept parameter")
    grid: List[float] = Field(..., min_length=2, description="Strictly increasing grid")
    quantity: Literal["gamma_fit", "gamma_predicted", "eta", "plateau"] = Field(
        ..., description="Derived quantity per grid point"
    )

    @field_validator("grid")
    @classmethod
    def check_increasing(cls, grid: List[float]) -> List[float]:
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("sweep grid must be strictly increasing")
        return grid

    @model_validator(mode="after")
    def check_axis_values(self) -> "SweepSpec":
        if self.axis == "N" and any(value != int(value) or value < 1 for value in self.grid):
            raise ValueError("N grid points must be positive integers")
        return self

    def point(self, value: float) -> ExperimentSpec:
        """Experiment at one grid point, validated afresh."""
        update = self.base.model_dump()
        update[AXIS_FIELDS[self.axis]] = int(value) if self.axis == "N" else float(value)
        return ExperimentSpec.model_validate(update)

    def to_json(self) -> str:
        return self.model_dump_json()

    @classmethod
    def from_json(cls, text: str) -> "SweepSpec":
        return cls.model_validate_json(text)

    @staticmethod
    def grid_range(start: float, stop: float, step: float) -> List[float]:
        """Inclusive grid start, start + step, ..., stop."""
        if step <= 0:
            raise ValueError(f"grid step must be positive, got {step}")
        count = int(round((stop - start) / step)) + 1
        return [start + index * step for index in range(count)]
