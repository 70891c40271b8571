"""The committed corpus: verdicts and codes against rustc, run results, placement agreement."""

from __future__ import annotations

import pytest

from src.analysis.drop_elab import elaborate_module
from src.config.settings import reset_settings
from src.corpus.loader import MAX_DIVERGENCES, Corpus, CorpusProgram, load_corpus
from src.driver.pipeline import compile_file
from src.ir.dump import dump_module

CORPUS = load_corpus()
PROGRAMS = CORPUS.programs
IDS = [p.name for p in PROGRAMS]


def test_corpus_size(corpus: Corpus):
    assert len(corpus.by_category("accept")) >= 15
    assert len(corpus.by_category("reject")) >= 15
    assert len(corpus.by_category("edge")) >= 10
    assert len(corpus.divergences) <= MAX_DIVERGENCES
    for program in corpus.programs:
        assert program.path.is_file(), program.name


def expected(program: CorpusProgram) -> tuple[str, set[str]]:
    for d in CORPUS.divergences:
        if d.name == program.name:
            return d.ours, set(d.codes)
    return program.verdict, set(program.codes)


@pytest.mark.parametrize("program", PROGRAMS, ids=IDS)
def test_verdict_and_codes(program: CorpusProgram):
    verdict, codes = expected(program)
    result = compile_file(program.path)
    assert ("accept" if result.ok else "reject") == verdict
    assert {d.code for d in result.diagnostics} == codes


@pytest.mark.parametrize("program", CORPUS.runnable(), ids=[p.name for p in CORPUS.runnable()])
def test_run_output(program: CorpusProgram):
    assert program.run is not None
    result = compile_file(program.path, mode="run", args=program.run.args)
    assert result.execution is not None
    execution = result.execution
    assert execution.outcome.render() == program.run.output
    assert execution.allocs == execution.frees
    if program.run.allocs is not None:
        assert execution.allocs == program.run.allocs


@pytest.mark.parametrize("program", PROGRAMS, ids=IDS)
def test_placements_agree(program: CorpusProgram):
    # raises InternalCompilerError on disagreement
    both = compile_file(program.path, check_after_elab=True)
    pre = compile_file(program.path, placement="pre-elab")
    assert both.ok == pre.ok


@pytest.mark.parametrize("program", PROGRAMS, ids=IDS)
def test_fixpoints_hold(program: CorpusProgram, monkeypatch: pytest.MonkeyPatch):
    monkeypatch.setenv("RL_DEBUG_FIXPOINT", "1")
    reset_settings()
    compile_file(program.path, check_after_elab=True)


@pytest.mark.parametrize("program", CORPUS.by_category("accept"), ids=lambda p: p.name)
def test_elaboration_is_idempotent(program: CorpusProgram):
    result = compile_file(program.path, stage="drop-elab", check_after_elab=True)
    assert result.elaborated is not None
    once = dump_module(result.elaborated)
    assert dump_module(elaborate_module(result.elaborated)) == once


def test_diagnostics_are_deterministic(corpus: Corpus):
    for program in corpus.by_category("reject"):
        first = compile_file(program.path)
        second = compile_file(program.path)
        assert [d.render("x.rs") for d in first.diagnostics] == [d.render("x.rs") for d in second.diagnostics]
