from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process defaults, overridable through TAPAUC_* variables or a .env file.

    Nothing here is required: every field has a default and every CLI flag
    takes precedence over the value loaded here.
    """

    model_config = SettingsConfigDict(
        env_prefix="TAPAUC_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    seed: int = 0
    workers: int = 1
    out_dir: str = "results"
    log_level: str = "INFO"
    fpr_cap: float = 0.5
    correlation_cutoff: float = 0.95
    data_dir: str = "data"
    progress: bool = True


def get_settings() -> Settings:
    return Settings()
