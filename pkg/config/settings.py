from pathlib import Path
from pydantic_settings import BaseSettings
from pydantic import Field

BASE_DIR = Path(__file__).resolve().parent.parent


class Settings(BaseSettings):
    # Logging
    log_level: str = Field(default="INFO")
    log_file: str = Field(default="")
    log_rate_limit: bool = Field(default=True)

    # Randomness
    seed: int = Field(default=42, ge=0, lt=2**64)

    # Designers
    restarts: int = Field(default=10, ge=1)
    twouser_restarts: int = Field(default=5, ge=1)
    max_iters: int = Field(default=1000, ge=1)
    epsilon: float = Field(default=1e-6, gt=0)
    subproblem_tol: float = Field(default=1e-8, gt=0)
    subproblem_max_iters: int = Field(default=10_000, ge=1)
    descent_tol: float = Field(default=1e-12, gt=0)

    # Source model
    symbols_per_item: int = Field(default=20, ge=1)
    items: int = Field(default=1000, ge=1)
    sample_size: int = Field(default=1000, ge=1)
    eval_sample_size: int = Field(default=100_000, ge=1)

    # Guards
    grid_budget: int = Field(default=10_000_000, ge=1)
    rejection_min_rate: float = Field(default=1e-4, gt=0)
    rejection_window: int = Field(default=1_000_000, ge=1)

    # Experiments
    jobs: int = Field(default=1, ge=1)
    results_subdir: str = Field(default="results")

    @property
    def data_dir(self) -> Path:
        return BASE_DIR / "data"

    @property
    def results_dir(self) -> Path:
        return BASE_DIR / self.results_subdir

    class Config:
        env_file = str(BASE_DIR / ".env")
        env_file_encoding = "utf-8"
        env_prefix = "ESC_"


settings = Settings()
