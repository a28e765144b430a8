# Process settings from environment / .env
from functools import lru_cache
from pathlib import Path

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Process-level settings.

    Everything that changes *what* is simulated lives in the run-config file
    (see app.core.run_config); this class only holds how the process runs.
    """

    LOG_LEVEL: str = "INFO"

    # Where output files go when --out is a bare file name
    OUTPUT_DIR: Path = Path("results")

    # Passed to scipy.fft as `workers` (-1 = all cores)
    FFT_WORKERS: int = -1

    # Thread pool size for scenario sweeps (1 = sequential)
    SWEEP_WORKERS: int = 1

    DEFAULT_SEED: int = 12345

    model_config = SettingsConfigDict(
        env_prefix="POPPER_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


@lru_cache
def get_settings() -> Settings:
    return Settings()

