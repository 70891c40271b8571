"""
Rustlight command line
──────────────────────
Compiler driver for the Rustlight language.

Usage:
    rustlight check FILE [--stage STAGE] [--dump SEL]...
    rustlight dump  FILE --dump SEL [--dump SEL]...
    rustlight build FILE -o out.c [--cc COMPILER]
    rustlight run   FILE [--args A ...] [--trace]

Exit codes:
    0  success
    1  diagnostics were reported, or the program trapped
    2  usage error
"""

from __future__ import annotations

import argparse
import shlex
import subprocess
import sys
from pathlib import Path

from dotenv import load_dotenv

from src.config.settings import get_settings
from src.core.diagnostics import Diagnostic
from src.core.errors import UsageError
from src.core.log import configure_logging, get_logger
from src.driver.pipeline import DUMP_SELECTORS, Mode, PipelineConfig, PipelineResult, Stage, run_pipeline
from src.interp.values import Trap

logger = get_logger("main")


# ─── Argument parsing ───


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rustlight", description="Rustlight compiler and borrow checker")
    commands = parser.add_subparsers(dest="mode", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", type=Path, help="Rustlight source file")
    common.add_argument(
        "--dump",
        action="append",
        default=[],
        metavar="SEL",
        help=f"print an intermediate form ({', '.join(DUMP_SELECTORS)})",
    )
    common.add_argument("--stage", choices=[s.value for s in Stage], help="stop after this stage")
    common.add_argument("--emit-loans", type=Path, metavar="PATH", help="write loan facts as JSON lines")
    common.add_argument(
        "--borrow-field-insensitive",
        action="store_true",
        default=None,
        help="treat any two places of the same local as overlapping",
    )
    common.add_argument(
        "--check-after-elab",
        action="store_true",
        help="borrow-check before and after drop elaboration and require equal verdicts",
    )
    common.add_argument("--diagnostics-format", choices=["text", "json"], default="text")

    commands.add_parser("check", parents=[common], help="type, move and borrow check")
    commands.add_parser("dump", parents=[common], help="print intermediate forms")

    build = commands.add_parser("build", parents=[common], help="emit C")
    build.add_argument("-o", "--output", type=Path, help="C output path (default: stdout)")
    build.add_argument(
        "--cc",
        nargs="?",
        const="",
        metavar="COMPILER",
        help="also compile the emitted C (default compiler from RL_CC)",
    )

    run = commands.add_parser("run", parents=[common], help="check, then interpret")
    run.add_argument("--args", nargs="*", default=[], metavar="ARG", help="arguments for the entry function")
    run.add_argument("--trace", action="store_true", help="print the execution trace")
    return parser


def resolve_cc(flag: str | None) -> str | None:
    if flag == "":
        return get_settings().c_compiler
    return flag


def config_from_args(ns: argparse.Namespace) -> PipelineConfig:
    return PipelineConfig.from_settings(
        input=ns.input,
        mode=Mode(ns.mode),
        stage=Stage(ns.stage) if ns.stage else None,
        dumps=ns.dump,
        field_insensitive=ns.borrow_field_insensitive,
        check_after_elab=ns.check_after_elab,
        output=getattr(ns, "output", None),
        cc=resolve_cc(getattr(ns, "cc", None)),
        trace=getattr(ns, "trace", False),
        args=getattr(ns, "args", []),
        emit_loans=ns.emit_loans,
        diagnostics_format=ns.diagnostics_format,
    )


# ─── Output ───


def report(diagnostics: list[Diagnostic], config: PipelineConfig) -> None:
    filename = str(config.input)
    for diag in diagnostics:
        if config.diagnostics_format == "json":
            print(diag.to_json(filename), file=sys.stderr)
        else:
            print(diag.render(filename), file=sys.stderr)


def compile_c(c_path: Path, compiler: str) -> int:
    settings = get_settings()
    binary = c_path.with_suffix("")
    cmd = [compiler, *shlex.split(settings.c_flags), str(c_path), "-o", str(binary)]
    logger.info("cc", cmd=" ".join(cmd))
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        print(proc.stderr, file=sys.stderr, end="")
        return 1
    return 0


def finish(result: PipelineResult, config: PipelineConfig) -> int:
    for text in result.dumps:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    if result.loans is not None and config.emit_loans is not None:
        config.emit_loans.write_text(result.loans, encoding="utf-8")
    if result.diagnostics:
        report(result.diagnostics, config)
        return 1

    if result.c_source is not None:
        if config.output is None:
            sys.stdout.write(result.c_source)
        else:
            config.output.write_text(result.c_source, encoding="utf-8")
            if config.cc:
                return compile_c(config.output, config.cc)

    if result.execution is not None:
        if config.trace:
            for line in result.execution.trace:
                print(line)
        print(result.execution.outcome.render())
        return 1 if isinstance(result.execution.outcome, Trap) else 0
    return 0


# ─── Entry point ───


def main(argv: list[str] | None = None) -> int:
    load_dotenv()
    settings = get_settings()
    configure_logging(settings.log_level, json=settings.log_json)

    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2

    try:
        config = config_from_args(ns)
        if config.mode is Mode.DUMP and not config.dumps:
            raise UsageError("dump needs at least one --dump selector")
        if config.cc and config.output is None:
            raise UsageError("--cc needs an output path (-o)")
        if not config.input.is_file():
            raise UsageError(f"no such file: {config.input}")
        try:
            source = config.input.read_text(encoding="utf-8")
        except UnicodeDecodeError as exc:
            raise UsageError(f"{config.input} is not valid UTF-8 (byte {exc.start})") from None
        result = run_pipeline(source, config)
        return finish(result, config)
    except UsageError as exc:
        print(f"rustlight: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
