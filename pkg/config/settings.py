#config/settings.py
"""
Central configuration management for the softmax mixture toolkit.
Handles environment variables, validation, and process-wide numerical defaults.
"""

import os
from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings with validation and type hints."""

    model_config = SettingsConfigDict(
        env_prefix="SOFTMIX_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application Configuration
    app_name: str = Field(default="softmix")
    app_version: str = Field(default="1.0.0")
    log_level: str = Field(default="INFO")
    log_dir: Optional[str] = Field(default=None)

    # Execution
    threads: Optional[int] = Field(default=None, ge=1)
    output_dir: str = Field(default="results")

    # Numerical defaults
    degree_cap: int = Field(default=25, ge=1)
    projection_max_sweeps: int = Field(default=5000, ge=1)
    projection_tol: float = Field(default=1e-10, gt=0)

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate log level is one of the standard Python logging levels."""
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in valid_levels:
            raise ValueError(f"Log level must be one of {valid_levels}")
        return v.upper()

    @property
    def logical_cores(self) -> int:
        return os.cpu_count() or 1


# Global settings instance
settings = Settings()


def get_settings() -> Settings:
    """Get the application settings instance."""
    return settings
