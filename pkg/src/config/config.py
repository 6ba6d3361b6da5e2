import os
from datetime import date
from typing import Optional

from dotenv import load_dotenv
from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

# Load environment variables
load_dotenv()

_LOG_LEVELS = {"TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL"}


class Settings(BaseSettings):
    """Application settings and numerical defaults."""

    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8", extra="ignore")

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_DIR: str = "logs"
    LOG_TO_FILE: bool = False

    # Ranking
    PAPERRANK_DAMPING: float = 0.99
    AUTHORRANK_DAMPING: float = 0.9
    RANK_TOLERANCE: float = 1e-10
    RANK_MAX_ITERS: int = 10_000
    GENERATION_MAX: int = 50

    # Groups
    TOWN_RADIUS_KM: float = 30.0

    # Execution
    THREADS: int = os.cpu_count() or 1

    # Ingest
    INGEST_STRICT: bool = False
    MIN_PAPER_YEAR: int = 1200
    MAX_PAPER_YEAR: Optional[int] = None

    @field_validator("LOG_LEVEL")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        level = v.upper()
        if level not in _LOG_LEVELS:
            raise ValueError(f"LOG_LEVEL must be one of {sorted(_LOG_LEVELS)}")
        return level

    @field_validator("PAPERRANK_DAMPING", "AUTHORRANK_DAMPING")
    @classmethod
    def validate_damping(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError("damping must lie strictly between 0 and 1")
        return v

    @field_validator("RANK_TOLERANCE", "TOWN_RADIUS_KM")
    @classmethod
    def validate_positive(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("must be positive")
        return v

    @field_validator("RANK_MAX_ITERS", "GENERATION_MAX", "THREADS")
    @classmethod
    def validate_count(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be at least 1")
        return v

    @property
    def max_paper_year(self) -> int:
        """Latest acceptable publication year."""
        return self.MAX_PAPER_YEAR if self.MAX_PAPER_YEAR is not None else date.today().year


# Global settings instance
settings = Settings()
