"""
Corpus manifest loader.

corpus/manifest.yaml lists every committed program with the verdict rustc gives
it; corpus/divergences.yaml records the programs where this compiler knowingly
disagrees (conservative rejections only).
"""

from __future__ import annotations

from pathlib import Path
from typing import Literal

import yaml
from pydantic import BaseModel, Field, model_validator

CORPUS_DIR = Path(__file__).resolve().parents[2] / "corpus"
MAX_DIVERGENCES = 5


class RunExpectation(BaseModel):
    args: list[str] = Field(default_factory=list)
    output: str
    allocs: int | None = None


class CorpusProgram(BaseModel):
    name: str
    category: Literal["accept", "reject", "edge"]
    verdict: Literal["accept", "reject"]
    codes: list[str] = Field(default_factory=list)
    rustc: str | None = None
    run: RunExpectation | None = None
    notes: str = ""

    @model_validator(mode="after")
    def _consistent(self) -> CorpusProgram:
        if self.verdict == "accept" and self.codes:
            raise ValueError(f"{self.name}: accepted program lists diagnostic codes")
        if self.verdict == "reject" and not self.codes:
            raise ValueError(f"{self.name}: rejected program needs its expected codes")
        if self.verdict == "reject" and self.run is not None:
            raise ValueError(f"{self.name}: rejected program cannot be run")
        return self

    @property
    def path(self) -> Path:
        return CORPUS_DIR / f"{self.name}.rs"


class Divergence(BaseModel):
    name: str
    rustc: Literal["accept"] = "accept"
    ours: Literal["reject"] = "reject"
    codes: list[str]
    reason: str


class Corpus(BaseModel):
    programs: list[CorpusProgram]
    divergences: list[Divergence] = Field(default_factory=list)

    @model_validator(mode="after")
    def _ledger(self) -> Corpus:
        if len(self.divergences) > MAX_DIVERGENCES:
            raise ValueError(f"divergence ledger has {len(self.divergences)} entries (at most {MAX_DIVERGENCES})")
        names = {p.name for p in self.programs}
        for d in self.divergences:
            if d.name not in names:
                raise ValueError(f"divergence `{d.name}` names no corpus program")
        return self

    def by_category(self, category: str) -> list[CorpusProgram]:
        return [p for p in self.programs if p.category == category]

    def runnable(self) -> list[CorpusProgram]:
        return [p for p in self.programs if p.run is not None]


def _read_yaml(path: Path) -> object:
    with path.open(encoding="utf-8") as fh:
        return yaml.safe_load(fh)


def load_corpus(root: Path = CORPUS_DIR) -> Corpus:
    manifest = _read_yaml(root / "manifest.yaml") or {}
    ledger_path = root / "divergences.yaml"
    ledger = _read_yaml(ledger_path) if ledger_path.exists() else {}
    assert isinstance(manifest, dict) and isinstance(ledger, dict | None)
    return Corpus.model_validate(
        {
            "programs": manifest.get("programs", []),
            "divergences": (ledger or {}).get("divergences", []),
        }
    )
