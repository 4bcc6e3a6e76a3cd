from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import List


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="WCP_",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    app_name: str = "WCP Race Server"
    app_env: str = "development"
    app_host: str = "0.0.0.0"
    app_port: int = 8000
    log_level: str = "INFO"
    log_format: str = "json"  # json | console

    # Analysis
    default_detector: str = "wcp"
    pair_budget: int = 10_000_000
    gc_history: bool = False
    check_invariants: bool = False

    # Oracle
    oracle_bound: int = 2000

    # HTTP surface
    max_upload_events: int = 1_000_000
    cors_origins: str = "*"

    @property
    def cors_origins_list(self) -> List[str]:
        """CORS origins as a list"""
        return [origin.strip() for origin in self.cors_origins.split(",") if origin.strip()]


settings = Settings()
