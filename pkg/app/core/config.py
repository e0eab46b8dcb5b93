"""
Core configuration module for the misperception lab.

This module handles all application configuration using Pydantic Settings
for type safety and validation.
"""

import logging
import sys
from functools import lru_cache
from pathlib import Path
from typing import TextIO

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


class Settings(BaseSettings):
    """
    Application settings with environment variable support.

    All settings can be overridden via environment variables
    with the prefix 'MISPERCEPTION_'.
    """

    model_config = SettingsConfigDict(
        env_prefix="MISPERCEPTION_", env_file=".env", case_sensitive=False
    )

    # Server Configuration
    host: str = "127.0.0.1"
    port: int = 8765
    proxy_port: int = 8766
    upstream: str = "127.0.0.1:8765"
    upstream_timeout_seconds: float = 5.0

    # Asset Configuration
    corpus_file_path: str = str(DATA_DIR / "corpus.jsonl")
    pilot_rules_path: str = str(DATA_DIR / "rules" / "pilot.json")
    study_rules_path: str = str(DATA_DIR / "rules" / "study.json")
    lexicon_path: str = str(DATA_DIR / "lexicon.json")
    keywords_path: str = str(DATA_DIR / "keywords.json")
    candidates_path: str = str(DATA_DIR / "candidates.jsonl")

    # Output Configuration
    audit_path: str = "audit.jsonl"
    output_dir: str = "reports"

    # Reproducibility
    seed: int = 0
    epsilon: float = 0.001

    # Logging Configuration
    log_level: str = "INFO"
    log_format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    # Application Information
    app_name: str = "Misperception Lab"
    app_version: str = "0.1.0"
    app_description: str = (
        "Simulates, detects and analyzes malware-induced misperception of social-media content"
    )

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate log level is one of the standard levels."""
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        v = v.upper()
        if v not in valid_levels:
            raise ValueError(f"log_level must be one of {valid_levels}")
        return v

    @field_validator("epsilon")
    @classmethod
    def validate_epsilon(cls, v: float) -> float:
        if v < 0:
            raise ValueError("epsilon must be >= 0")
        return v


@lru_cache
def get_settings() -> Settings:
    """
    Get cached application settings.

    Uses lru_cache to ensure settings are loaded only once
    during the application lifecycle.

    Returns:
        Settings: Application configuration object
    """
    return Settings()


def configure_logging(settings: Settings, stream: TextIO | None = None) -> None:
    """Configure root logging from settings; stdout stays reserved for command output."""
    logging.basicConfig(
        level=settings.log_level,
        format=settings.log_format,
        handlers=[logging.StreamHandler(stream or sys.stderr)],
        force=True,
    )
