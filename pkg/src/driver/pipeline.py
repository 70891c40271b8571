"""
Compilation pipeline.

parse → typecheck → lower → move-check → drop-elab → borrow-check → emit.
Borrow checking runs after drop elaboration by default; the placement is a
setting, and `check_after_elab` runs it at both placements and insists the
verdicts agree. The pipeline never prints: callers get a PipelineResult with
diagnostics, requested dumps and artifacts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import StrEnum
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, Field

from src.analysis.dataflow import format_flow
from src.analysis.drop_elab import elaborate_module
from src.analysis.init_analysis import InitAnalysis
from src.analysis.liveness import render_live, variable_liveness
from src.analysis.move_check import MoveAnalysis, move_check
from src.backend.c_emit import emit
from src.borrowck.check import BorrowAnalysis, borrow_check
from src.config.settings import Settings, get_settings
from src.core.diagnostics import Diagnostic, sort_diagnostics
from src.core.errors import CompileError, InternalCompilerError, UsageError
from src.core.log import get_logger
from src.driver.facts import loan_facts, render_facts
from src.frontend import ast
from src.frontend.parser import parse
from src.frontend.printer import print_module
from src.frontend.typecheck import TypedModule, typecheck
from src.interp.interpreter import Execution, bind_args, eval_module
from src.ir import rustir as ir
from src.ir.dump import dump_module
from src.ir.lower import lower

logger = get_logger("pipeline")


class Mode(StrEnum):
    CHECK = "check"
    BUILD = "build"
    RUN = "run"
    DUMP = "dump"


class Stage(StrEnum):
    PARSE = "parse"
    TYPECHECK = "typecheck"
    LOWER = "lower"
    MOVE_CHECK = "move-check"
    BORROW_CHECK = "borrow-check"
    DROP_ELAB = "drop-elab"
    EMIT = "emit"


STAGE_ORDER = list(Stage)
DUMP_SELECTORS = (
    "ast",
    "rustir",
    "rustir-elab",
    "dataflow:liveness",
    "dataflow:move",
    "dataflow:init",
    "dataflow:borrow",
)


class PipelineConfig(BaseModel):
    """What to run; command line flags layered over Settings."""

    input: Path
    mode: Mode = Mode.CHECK
    stage: Stage | None = None
    dumps: list[str] = Field(default_factory=list)
    field_insensitive: bool = False
    placement: Literal["post-elab", "pre-elab"] = "post-elab"
    check_after_elab: bool = False
    output: Path | None = None
    cc: str | None = None
    trace: bool = False
    args: list[str] = Field(default_factory=list)
    emit_loans: Path | None = None
    diagnostics_format: Literal["text", "json"] = "text"
    entry: str = "main"

    @classmethod
    def from_settings(cls, settings: Settings | None = None, **flags: object) -> PipelineConfig:
        settings = settings or get_settings()
        values: dict[str, object] = {
            "field_insensitive": settings.borrow_field_insensitive,
            "placement": settings.borrow_check_placement,
        }
        values.update({k: v for k, v in flags.items() if v is not None})
        config = cls.model_validate(values)
        for selector in config.dumps:
            if selector not in DUMP_SELECTORS:
                raise UsageError(f"unknown dump selector `{selector}` (expected one of {', '.join(DUMP_SELECTORS)})")
        return config

    def last_stage(self) -> Stage:
        if self.stage is not None:
            return self.stage
        if self.mode in (Mode.BUILD, Mode.RUN):
            return Stage.EMIT
        return Stage.BORROW_CHECK

    def reaches(self, stage: Stage) -> bool:
        last = self.last_stage()
        if last is Stage.BORROW_CHECK and stage is Stage.DROP_ELAB:
            # checking after elaboration needs the elaborated IR
            return self.placement == "post-elab" or self.check_after_elab or "rustir-elab" in self.dumps
        return STAGE_ORDER.index(stage) <= STAGE_ORDER.index(last)


@dataclass
class PipelineResult:
    source: str
    module: ast.RlModule | None = None
    typed: TypedModule | None = None
    rir: ir.RirModule | None = None
    elaborated: ir.RirModule | None = None
    diagnostics: list[Diagnostic] = field(default_factory=list)
    dumps: list[str] = field(default_factory=list)
    loans: str | None = None
    c_source: str | None = None
    execution: Execution | None = None

    @property
    def ok(self) -> bool:
        return not self.diagnostics


def _flow_dumps(selector: str, module: ir.RirModule) -> str:
    out: list[str] = []
    for fn in module.functions:
        match selector:
            case "dataflow:liveness":
                out.append(format_flow(fn, variable_liveness(fn), render_live))
            case "dataflow:move":
                move = MoveAnalysis(fn, module.adts)
                universe = move.universe
                out.append(
                    format_flow(fn, move.solve(), lambda s, u=universe, f=fn: u.render(f, module.adts, s))
                )
            case "dataflow:init":
                init = InitAnalysis(fn, module.adts)
                out.append(format_flow(fn, init.solve(), init.render))
            case "dataflow:borrow":
                borrow = BorrowAnalysis(fn, module)
                out.append(format_flow(fn, borrow.solve(), borrow.render))
    return "\n\n".join(out) + "\n"


def _borrow_check_module(module: ir.RirModule, field_insensitive: bool) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    for fn in module.functions:
        diags.extend(borrow_check(fn, module, field_insensitive))
    return diags


class Pipeline:
    def __init__(self, config: PipelineConfig) -> None:
        self.config = config

    def dump(self, result: PipelineResult, selector: str, text: str) -> None:
        if selector in self.config.dumps:
            result.dumps.append(text)

    def run(self, source: str) -> PipelineResult:
        config = self.config
        result = PipelineResult(source=source)
        try:
            self.front_end(result)
        except CompileError as err:
            result.diagnostics = sort_diagnostics(err.diagnostics)
            logger.info("stage_failed", input=str(config.input), diagnostics=len(result.diagnostics))
            return result
        if result.rir is None or not config.reaches(Stage.MOVE_CHECK):
            return result

        logger.info("stage", stage=Stage.MOVE_CHECK.value)
        rir = result.rir
        for fn in rir.functions:
            result.diagnostics.extend(move_check(fn, rir.adts))
        for selector in ("dataflow:liveness", "dataflow:move", "dataflow:init"):
            if selector in config.dumps:
                self.dump(result, selector, _flow_dumps(selector, rir))
        if result.diagnostics:
            result.diagnostics = sort_diagnostics(result.diagnostics)
            return result

        pre_elab: list[Diagnostic] | None = None
        if config.reaches(Stage.BORROW_CHECK) and (config.placement == "pre-elab" or config.check_after_elab):
            logger.info("stage", stage=Stage.BORROW_CHECK.value, placement="pre-elab")
            pre_elab = _borrow_check_module(rir, config.field_insensitive)

        if config.reaches(Stage.DROP_ELAB):
            logger.info("stage", stage=Stage.DROP_ELAB.value)
            result.elaborated = elaborate_module(rir)
            self.dump(result, "rustir-elab", dump_module(result.elaborated))

        post_elab: list[Diagnostic] | None = None
        if (
            config.reaches(Stage.BORROW_CHECK)
            and result.elaborated is not None
            and (config.placement == "post-elab" or config.check_after_elab)
        ):
            logger.info("stage", stage=Stage.BORROW_CHECK.value, placement="post-elab")
            post_elab = _borrow_check_module(result.elaborated, config.field_insensitive)

        if pre_elab is not None and post_elab is not None and bool(pre_elab) != bool(post_elab):
            raise InternalCompilerError(
                f"{config.input}: borrow-check verdicts differ before ({len(pre_elab)} errors) "
                f"and after ({len(post_elab)} errors) drop elaboration"
            )
        chosen = post_elab if config.placement == "post-elab" else pre_elab
        result.diagnostics = sort_diagnostics(chosen or [])

        checked = result.elaborated if config.placement == "post-elab" else rir
        if "dataflow:borrow" in config.dumps and checked is not None:
            self.dump(result, "dataflow:borrow", _flow_dumps("dataflow:borrow", checked))
        if config.emit_loans is not None and checked is not None:
            result.loans = render_facts(loan_facts(checked))
        if result.diagnostics or result.elaborated is None:
            return result

        if config.mode is Mode.BUILD and config.entry not in result.elaborated.by_name:
            raise UsageError(f"no function `{config.entry}` to use as the program entry")
        if config.reaches(Stage.EMIT) and config.mode is Mode.BUILD:
            logger.info("stage", stage=Stage.EMIT.value)
            result.c_source = emit(result.elaborated, source, config.entry)
        if config.mode is Mode.RUN:
            args = bind_args(result.elaborated, config.entry, config.args)
            result.execution = eval_module(result.elaborated, config.entry, args)
        return result

    def front_end(self, result: PipelineResult) -> None:
        config = self.config
        logger.info("stage", stage=Stage.PARSE.value, input=str(config.input))
        result.module = parse(result.source)
        self.dump(result, "ast", print_module(result.module))
        if not config.reaches(Stage.TYPECHECK):
            return
        logger.info("stage", stage=Stage.TYPECHECK.value)
        result.typed = typecheck(result.module)
        if not config.reaches(Stage.LOWER):
            return
        logger.info("stage", stage=Stage.LOWER.value)
        result.rir = lower(result.typed)
        self.dump(result, "rustir", dump_module(result.rir))


def run_pipeline(source: str, config: PipelineConfig) -> PipelineResult:
    return Pipeline(config).run(source)


def compile_file(path: Path | str, **flags: object) -> PipelineResult:
    """Convenience entry for tests and the corpus harness."""
    path = Path(path)
    config = PipelineConfig.from_settings(input=path, **flags)
    return run_pipeline(path.read_text(encoding="utf-8"), config)
