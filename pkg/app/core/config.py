from pydantic_settings import BaseSettings
import os


class Settings(BaseSettings):
    PROJECT_NAME: str = "Comment Edit"

    # Logging
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")
    LOG_FORMAT: str = "%(asctime)s %(levelname)s %(name)s: %(message)s"

    # Change-record store
    DATABASE_URL: str = os.getenv("DATABASE_URL", "sqlite:///./comment_edits.db")

    # Reproducibility
    SEED: int = 0
    DEFAULT_WORKERS: int = 1

    # Mining
    GIT_EXECUTABLE: str = "git"
    GIT_TIMEOUT_SECONDS: int = 120


    class Config:
        env_file = ".env"
        extra = "ignore"


settings = Settings()
