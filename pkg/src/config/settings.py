"""Rustlight compiler configuration module."""

from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Global compiler settings loaded from environment."""

    # === Logging ===
    log_level: str = Field(default="WARNING", alias="LOG_LEVEL")
    log_json: bool = Field(default=False, alias="RL_LOG_JSON")

    # === Borrow checking ===
    borrow_field_insensitive: bool = Field(default=False, alias="RL_BORROW_FIELD_INSENSITIVE")
    borrow_check_placement: Literal["post-elab", "pre-elab"] = Field(
        default="post-elab", alias="RL_BORROW_CHECK_PLACEMENT"
    )

    # === Dataflow ===
    debug_fixpoint_check: bool = Field(default=False, alias="RL_DEBUG_FIXPOINT")
    max_fixpoint_rounds: int = Field(default=64, alias="RL_MAX_FIXPOINT_ROUNDS")

    # === Interpreter ===
    call_depth_limit: int = Field(default=512, alias="RL_CALL_DEPTH_LIMIT")

    # === C backend ===
    c_compiler: str = Field(default="cc", alias="RL_CC")
    c_flags: str = Field(default="-std=c99 -Wall -Wextra -pedantic", alias="RL_CFLAGS")

    model_config = {"env_file": ".env", "extra": "ignore", "populate_by_name": True}


# Singleton instance
_settings: Settings | None = None


def get_settings() -> Settings:
    """Get or create the global Settings singleton."""
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def reset_settings() -> None:
    """Drop the cached Settings so the next call re-reads the environment."""
    global _settings
    _settings = None
