"""Shared data models and utilities for the ring walk toolkit."""

from .models import (
    COIN_LABELS,
    WalkKind,
    SpectralMethod,
    DecayProvenance,
    FitAxis,
    EfficiencyMethod,
    PercolationMode,
    RingConfig,
    CoinOperator,
    WalkState,
    EvolutionOperator,
    SurvivalSeries,
    SpectralEstimate,
    DecayRate,
    PowerLawFit,
    TrappedBasis,
    EfficiencyReport,
    CommonEigenstateReport,
    EdgeConfig,
    PercolationParams,
    DensityMatrix,
)

__all__ = [
    "COIN_LABELS",
    "WalkKind",
    "SpectralMethod",
    "DecayProvenance",
    "FitAxis",
    "EfficiencyMethod",
    "PercolationMode",
    "RingConfig",
    "CoinOperator",
    "WalkState",
    "EvolutionOperator",
    "SurvivalSeries",
    "SpectralEstimate",
    "DecayRate",
    "PowerLawFit",
    "TrappedBasis",
    "EfficiencyReport",
    "CommonEigenstateReport",
    "EdgeConfig",
    "PercolationParams",
    "DensityMatrix",
]
