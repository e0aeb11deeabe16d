"""Configuration management for entcut.

This module handles loading and validating environment variables using Pydantic.
It provides type-safe access to configuration values throughout the application.
Run parameters for the command line live in ``cli.reports.RunConfig``; the only
environment variable consulted for them is ``ENTCUT_CONFIG``.
"""

from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables.

    Attributes:
        LOG_LEVEL: Logging level
        LOG_FILE: Log file name
        LOG_DIR: Directory for rotating log files
        ENTCUT_CONFIG: Optional path to a JSON run configuration used as CLI defaults
        TENSOR_POWER_CAP: Largest composite dimension of a dense tensor-power matrix
        PURE_POWER_CAP: Largest length of a tensor-power state vector
        OPTIMIZATION_CAP: Largest composite dimension accepted by E_R / E_F searches
        NEIGHBOR_THETA_STEPS: Number of mixing angles tried per block in the
            dense-neighbour scan
    """

    # Logging
    LOG_LEVEL: str = Field(default="INFO")
    LOG_FILE: str = Field(default="entcut.log")
    LOG_DIR: str = Field(default="logs")

    # Run configuration
    ENTCUT_CONFIG: Optional[str] = Field(default=None)

    # Resource caps
    TENSOR_POWER_CAP: int = Field(default=1024, gt=0)
    PURE_POWER_CAP: int = Field(default=2**20, gt=0)
    OPTIMIZATION_CAP: int = Field(default=36, gt=0)

    # Constructions
    NEIGHBOR_THETA_STEPS: int = Field(default=64, gt=0)

    model_config = SettingsConfigDict(
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )


# Create a global settings instance
settings = Settings()


def get_settings() -> Settings:
    """Get the application settings.

    Returns:
        Settings: Application configuration instance
    """
    return settings
