"""Configuration management for the ring walk toolkit."""

from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import Optional


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="RINGWALK_",
        case_sensitive=False
    )

    # Output Configuration
    output_dir: str = "results"

    # Logging Configuration
    log_level: str = "INFO"
    log_file: Optional[str] = None

    # Reproducibility
    default_seed: int = 20240521
    workers: int = 1

    # Numerical Tolerances
    unitarity_tol: float = 1e-12
    conservation_tol: float = 1e-10
    degeneracy_tol: float = 1e-8
    dependence_tol: float = 1e-10
    eigenstate_tol: float = 1e-10
    survival_floor: float = 1e-12

    # Spectral Estimation
    norm_growth_tol: float = 1e-8
    channel_patience: int = 100
    channel_max_iterations: int = 1_000_000

    # Percolation
    exact_enumeration_max_edges: int = 16

    @property
    def csv_float_format(self) -> str:
        """Float format giving a lossless double round-trip."""
        return "%.17g"


# Global settings instance
settings = Settings()
