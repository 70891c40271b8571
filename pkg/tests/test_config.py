"""Settings from the environment and command line flags layered over them."""

from __future__ import annotations

from pathlib import Path

import pytest

from src.config.settings import get_settings, reset_settings
from src.core.errors import UsageError
from src.driver.pipeline import Mode, PipelineConfig, Stage


def test_defaults():
    settings = get_settings()
    assert settings.borrow_check_placement == "post-elab"
    assert settings.call_depth_limit == 512
    assert settings.borrow_field_insensitive is False


def test_environment_overrides(monkeypatch: pytest.MonkeyPatch):
    monkeypatch.setenv("RL_BORROW_CHECK_PLACEMENT", "pre-elab")
    monkeypatch.setenv("RL_BORROW_FIELD_INSENSITIVE", "true")
    reset_settings()
    config = PipelineConfig.from_settings(input=Path("a.rs"))
    assert config.placement == "pre-elab"
    assert config.field_insensitive is True


def test_flags_win_over_settings(monkeypatch: pytest.MonkeyPatch):
    monkeypatch.setenv("RL_BORROW_FIELD_INSENSITIVE", "true")
    reset_settings()
    config = PipelineConfig.from_settings(input=Path("a.rs"), field_insensitive=False)
    assert config.field_insensitive is False
    # unset flags fall through to the settings value
    assert PipelineConfig.from_settings(input=Path("a.rs"), field_insensitive=None).field_insensitive is True


def test_unknown_dump_selector():
    with pytest.raises(UsageError):
        PipelineConfig.from_settings(input=Path("a.rs"), dumps=["dataflow:everything"])


def test_stage_reach():
    check = PipelineConfig.from_settings(input=Path("a.rs"))
    assert check.last_stage() is Stage.BORROW_CHECK
    assert check.reaches(Stage.DROP_ELAB)
    assert not check.reaches(Stage.EMIT)

    pre = PipelineConfig.from_settings(input=Path("a.rs"), placement="pre-elab")
    assert not pre.reaches(Stage.DROP_ELAB)
    assert pre.model_copy(update={"dumps": ["rustir-elab"]}).reaches(Stage.DROP_ELAB)

    build = PipelineConfig.from_settings(input=Path("a.rs"), mode=Mode.BUILD)
    assert build.reaches(Stage.EMIT)
    assert not PipelineConfig.from_settings(input=Path("a.rs"), stage=Stage.LOWER).reaches(Stage.MOVE_CHECK)
