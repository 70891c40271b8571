"""Loan facts for `--emit-loans`: one JSON record per loan, in function then loan order."""

from __future__ import annotations

from pydantic import BaseModel

from src.borrowck.domain import collect_loans
from src.ir import rustir as ir


class LoanFact(BaseModel):
    function: str
    loan: int
    place: str
    source_place: str
    mutable: bool
    node: int
    region: int


def loan_facts(module: ir.RirModule) -> list[LoanFact]:
    facts: list[LoanFact] = []
    for fn in module.functions:
        for loan in collect_loans(fn).loans:
            if loan.place is None or loan.node is None:
                continue
            instr = fn.nodes[loan.node]
            assert isinstance(instr, ir.Assign) and isinstance(instr.rvalue, ir.Ref)
            facts.append(
                LoanFact(
                    function=fn.name,
                    loan=loan.id,
                    place=str(loan.place),
                    source_place=ir.describe_place(fn, module.adts, loan.place),
                    mutable=loan.mutable,
                    node=loan.node,
                    region=instr.rvalue.region,
                )
            )
    return facts


def render_facts(facts: list[LoanFact]) -> str:
    return "".join(fact.model_dump_json() + "\n" for fact in facts)
