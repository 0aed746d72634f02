from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    APP_NAME: str = "fputwaves"
    VERSION: str = "1.0.0"
    LOG_LEVEL: str = "WARNING"

    OUTPUT_DIR: str = "output"
    N_JOBS: int = 1

    DEFAULT_C: float = 1.45
    DEFAULT_HALF_LENGTH: float = 40.0
    POINTS_PER_UNIT: int = 8
    CSV_SIGNIFICANT_DIGITS: int = 17

    class Config:
        env_file = ".env"
        env_prefix = "FPUTWAVES_"
        case_sensitive = True


settings = Settings()
