"""Command line: exit codes, stdout/stderr split, dumps, loan facts and C output."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from src.main import main

ACCEPT = "fn main() -> i32 {\n    let b = Box::new(41);\n    *b + 1\n}\n"
REJECT = "fn main() -> i32 {\n    let mut x = 1;\n    let r = &x;\n    x = 2;\n    *r\n}\n"


@pytest.fixture
def write(tmp_path: Path):
    def _write(source: str, name: str = "prog.rs") -> Path:
        path = tmp_path / name
        path.write_text(source, encoding="utf-8")
        return path

    return _write


def test_check_accepts(write, capsys: pytest.CaptureFixture[str]):
    assert main(["check", str(write(ACCEPT))]) == 0
    out, err = capsys.readouterr()
    assert out == ""
    assert "error[" not in err


def test_check_reports_diagnostics(write, capsys: pytest.CaptureFixture[str]):
    path = write(REJECT)
    assert main(["check", str(path)]) == 1
    err = capsys.readouterr().err
    assert f"{path}:4:" in err
    assert "error[RL0203]" in err


def test_json_diagnostics(write, capsys: pytest.CaptureFixture[str]):
    assert main(["check", str(write(REJECT)), "--diagnostics-format", "json"]) == 1
    lines = [line for line in capsys.readouterr().err.splitlines() if line.startswith("{")]
    records = [json.loads(line) for line in lines]
    assert [r["code"] for r in records] == ["RL0203"]
    assert records[0]["span"]["line"] == 4


def test_run_prints_result_and_trace(write, capsys: pytest.CaptureFixture[str]):
    assert main(["run", str(write(ACCEPT))]) == 0
    assert capsys.readouterr().out == "42\n"
    assert main(["run", str(write(ACCEPT)), "--trace"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "call main"
    assert lines[-1] == "42"


def test_run_trap_exits_one(write, capsys: pytest.CaptureFixture[str]):
    path = write("fn main(d: i32) -> i32 { 1 / d }")
    assert main(["run", str(path), "--args", "0"]) == 1
    assert capsys.readouterr().out.startswith("trap: DivByZero at bb")


def test_dump_selectors(write, capsys: pytest.CaptureFixture[str]):
    path = write(ACCEPT)
    assert main(["dump", str(path), "--dump", "rustir", "--dump", "dataflow:borrow"]) == 0
    out = capsys.readouterr().out
    assert "fn main" in out
    assert "bb0" in out


def test_dump_mode_needs_a_selector(write, capsys: pytest.CaptureFixture[str]):
    assert main(["dump", str(write(ACCEPT))]) == 2
    assert "--dump" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["check"],
        ["frobnicate", "x.rs"],
        ["check", "missing.rs"],
        ["check", "{path}", "--dump", "nonsense"],
        ["check", "{path}", "--stage", "nowhere"],
        ["build", "{path}", "--cc", "cc"],
    ],
)
def test_usage_errors(write, argv: list[str], capsys: pytest.CaptureFixture[str]):
    path = write(ACCEPT)
    assert main([a.format(path=path) for a in argv]) == 2
    assert capsys.readouterr().out == ""


def test_emit_loans(write, tmp_path: Path):
    facts = tmp_path / "loans.jsonl"
    assert main(["check", str(write(REJECT)), "--emit-loans", str(facts)]) == 1
    records = [json.loads(line) for line in facts.read_text(encoding="utf-8").splitlines()]
    assert len(records) == 1
    assert records[0]["function"] == "main"
    assert records[0]["source_place"] == "x"
    assert records[0]["mutable"] is False


def test_build_writes_c(write, tmp_path: Path, capsys: pytest.CaptureFixture[str]):
    out = tmp_path / "prog.c"
    assert main(["build", str(write(ACCEPT)), "-o", str(out)]) == 0
    assert "int32_t rl_main(void)" in out.read_text(encoding="utf-8")
    assert capsys.readouterr().out == ""


def test_build_to_stdout(write, capsys: pytest.CaptureFixture[str]):
    assert main(["build", str(write(ACCEPT))]) == 0
    assert "#include <stdint.h>" in capsys.readouterr().out


def test_rejected_program_is_not_built(write, tmp_path: Path):
    out = tmp_path / "prog.c"
    assert main(["build", str(write(REJECT)), "-o", str(out)]) == 1
    assert not out.exists()


@pytest.mark.parametrize(
    ("source", "args"),
    [
        ("fn helper() -> i32 { 1 }", []),
        ("fn main(a: i32) -> i32 { a }", ["1", "2"]),
        ("fn main(a: i32) -> i32 { a }", []),
        ("fn main(a: i32) -> i32 { a }", ["abc"]),
        ("fn main(a: i32) -> i32 { a }", ["true"]),
        ("fn main(b: bool) -> bool { b }", ["1"]),
    ],
)
def test_run_rejects_bad_entry_arguments(write, source: str, args: list[str], capsys: pytest.CaptureFixture[str]):
    argv = ["run", str(write(source))]
    if args:
        argv += ["--args", *args]
    assert main(argv) == 2
    out, err = capsys.readouterr()
    assert out == ""
    assert err.startswith("rustlight: ")


def test_build_without_entry_is_a_usage_error(write, capsys: pytest.CaptureFixture[str]):
    assert main(["build", str(write("fn helper() -> i32 { 1 }"))]) == 2
    assert "no function `main`" in capsys.readouterr().err


def test_undecodable_source_is_a_usage_error(tmp_path: Path, capsys: pytest.CaptureFixture[str]):
    path = tmp_path / "bad.rs"
    path.write_bytes(b"fn main() -> i32 { \xff\xfe 1 }\n")
    assert main(["check", str(path)]) == 2
    assert "not valid UTF-8" in capsys.readouterr().err
