"""Pinned RustIR listings: lowering and drop elaboration compared byte for byte."""

from __future__ import annotations

from pathlib import Path

import pytest

from src.analysis.drop_elab import elaborate_module
from src.ir.dump import dump_module
from tests.conftest import compile_source, lower_source

GOLDEN = Path(__file__).parent / "golden"


def cases(suffix: str) -> list[Path]:
    return sorted(p.with_name(p.name.removesuffix(suffix) + ".rs") for p in GOLDEN.glob(f"*{suffix}"))


def expected(source: Path, suffix: str) -> str:
    return source.with_name(source.stem + suffix).read_text(encoding="utf-8")


def test_golden_sets_are_complete():
    assert len(cases(".rustir.txt")) >= 5
    assert len(cases(".rustir-elab.txt")) >= 5
    assert all(p.is_file() for p in cases(".rustir.txt") + cases(".rustir-elab.txt"))


@pytest.mark.parametrize("source", cases(".rustir.txt"), ids=lambda p: p.stem)
def test_lowering_matches_golden(source: Path):
    module = lower_source(source.read_text(encoding="utf-8"))
    assert dump_module(module) == expected(source, ".rustir.txt")


@pytest.mark.parametrize("source", cases(".rustir-elab.txt"), ids=lambda p: p.stem)
def test_drop_elaboration_matches_golden(source: Path):
    module = elaborate_module(lower_source(source.read_text(encoding="utf-8")))
    assert dump_module(module) == expected(source, ".rustir-elab.txt")


@pytest.mark.parametrize("source", cases(".rustir-elab.txt"), ids=lambda p: p.stem)
def test_elab_dump_selector_prints_the_golden(source: Path):
    result = compile_source(source.read_text(encoding="utf-8"), dumps=["rustir-elab"])
    assert result.dumps == [expected(source, ".rustir-elab.txt")]
