from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    # Logging
    LOG_LEVEL: str = "INFO"

    # Directories
    OUTPUT_DIR: str = "./results"

    # Worker Settings
    THREADS: int = 1
    SEED: int = 20240501

    # Enumeration budgets
    ENUMERATION_BUDGET: int = 200000
    SWEEP_BUDGET: int = 50000
    SUBSET_STATE_BUDGET: int = 100000
    EXACT_COUNT_BUDGET: int = 16

    # Lattice searches
    LATTICE_MARGIN: int = 2
    SUPPORT_RADIUS: int = 8
    COMPLEXITY_LENGTH: int = 12
    COMPLEXITY_BOX: int = 4

    # Entropy estimation
    DEFAULT_EPSILON: str = "1/4"
    DEFAULT_DELTA: str = "1/1000"
    PERTURBATION_BUDGET: int = 256
    PERTURBATIONS_PER_LIFT: int = 2
    POWER_ITERATION_TOLERANCE: float = 1e-9
    POWER_ITERATION_MAX: int = 200000
    GAP_MARGIN: float = 1e-6
    REPORT_TOLERANCE: float = 1e-6

    # Reporting
    FLOAT_DIGITS: int = 9

    class Config:
        env_file = ".env"
        env_prefix = "SOFICLAB_"
        case_sensitive = True


settings = Settings()
