"""
Configuration settings for the linear loop ANT analyzer.
Uses Pydantic BaseSettings to load environment variables with dotenv support.
"""

import os

from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings

# Load environment variables from .env file
load_dotenv()

# Clean environment variables that might have inline comments
for _name in ("LOG_LEVEL", "DEFAULT_HORIZON", "INT_BUDGET", "DEFAULT_SEED", "MAX_WORKERS"):
    if _name in os.environ:
        os.environ[_name] = os.environ[_name].split("#")[0].strip()


class Settings(BaseSettings):
    """Application settings, loaded from environment variables."""

    # Application settings
    APP_NAME: str = Field("Linear Loop ANT Analyzer", description="Name of the application")
    APP_VERSION: str = Field("0.1.0", description="Application version")
    LOG_LEVEL: str = Field("INFO", description="Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)")

    # Analysis settings
    DEFAULT_HORIZON: int = Field(500, description="Number of loop iterations simulated by default")
    INT_BUDGET: int = Field(2000, description="Branch-and-bound node budget for integer emptiness")
    DEFAULT_SEED: int = Field(42, description="Seed used by the random program generator")
    OUTPUT_FORMAT: str = Field("text", description="Default report format (text, json, smt2)")
    MAX_WORKERS: int = Field(1, description="Worker threads for per-condition and corpus analysis")
    CORPUS_DIR: str = Field("corpus", description="Default directory for generated corpora")

    class Config:
        """Pydantic configuration."""

        env_file = ".env"
        env_file_encoding = "utf-8"
        case_sensitive = True


# Create a global instance of settings
settings = Settings(
    APP_NAME=os.environ.get("APP_NAME", "Linear Loop ANT Analyzer"),
    APP_VERSION=os.environ.get("APP_VERSION", "0.1.0"),
    LOG_LEVEL=os.environ.get("LOG_LEVEL", "INFO"),
    DEFAULT_HORIZON=int(os.environ.get("DEFAULT_HORIZON", "500")),
    INT_BUDGET=int(os.environ.get("INT_BUDGET", "2000")),
    DEFAULT_SEED=int(os.environ.get("DEFAULT_SEED", "42")),
    OUTPUT_FORMAT=os.environ.get("OUTPUT_FORMAT", "text"),
    MAX_WORKERS=int(os.environ.get("MAX_WORKERS", "1")),
    CORPUS_DIR=os.environ.get("CORPUS_DIR", "corpus"),
)

# Constants for application
DEFAULT_HORIZON = settings.DEFAULT_HORIZON
INT_BUDGET = settings.INT_BUDGET
DEFAULT_SEED = settings.DEFAULT_SEED
