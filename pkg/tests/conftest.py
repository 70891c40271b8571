"""Shared fixtures: pipeline helpers over inline sources and the committed corpus."""

from __future__ import annotations

from collections.abc import Callable, Iterator
from pathlib import Path

import pytest

from src.config.settings import reset_settings
from src.corpus.loader import Corpus, load_corpus
from src.driver.pipeline import PipelineConfig, PipelineResult, run_pipeline
from src.frontend.parser import parse
from src.frontend.typecheck import typecheck
from src.ir import rustir as ir
from src.ir.lower import lower


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch: pytest.MonkeyPatch) -> Iterator[None]:
    """Each test sees the defaults, whatever the developer's environment holds."""
    for name in (
        "RL_BORROW_FIELD_INSENSITIVE",
        "RL_BORROW_CHECK_PLACEMENT",
        "RL_DEBUG_FIXPOINT",
        "RL_CALL_DEPTH_LIMIT",
    ):
        monkeypatch.delenv(name, raising=False)
    reset_settings()
    yield
    reset_settings()


def lower_source(source: str) -> ir.RirModule:
    return lower(typecheck(parse(source)))


def compile_source(source: str, **flags: object) -> PipelineResult:
    config = PipelineConfig.from_settings(input=Path("test.rs"), **flags)
    return run_pipeline(source, config)


def codes(result: PipelineResult) -> set[str]:
    return {d.code for d in result.diagnostics}


@pytest.fixture
def lower_rl() -> Callable[[str], ir.RirModule]:
    return lower_source


@pytest.fixture
def compile_rl() -> Callable[..., PipelineResult]:
    return compile_source


@pytest.fixture(scope="session")
def corpus() -> Corpus:
    return load_corpus()
