"""Pretty-printer for the Rustlight AST; its output re-parses to an equal AST."""

from __future__ import annotations

from src.frontend import ast
from src.frontend.types import RlType

INDENT = "    "


def print_type(ty: RlType) -> str:
    return str(ty)


def print_expr(expr: ast.Expr) -> str:
    match expr:
        case ast.IntLit(value=v):
            return str(v)
        case ast.BoolLit(value=v):
            return "true" if v else "false"
        case ast.UnitLit():
            return "()"
        case ast.Var(name=n):
            return n
        case ast.FieldAccess(base=b, name=n):
            return f"{_postfix_operand(b)}.{n}"
        case ast.Deref(operand=o):
            return f"*{_unary_operand(o)}"
        case ast.Borrow(mutable=m, operand=o):
            return f"&{'mut ' if m else ''}{_unary_operand(o)}"
        case ast.BoxNew(operand=o):
            return f"Box::new({print_expr(o)})"
        case ast.Binary(op=op, lhs=l, rhs=r):
            return f"{_binary_operand(l)} {op} {_binary_operand(r)}"
        case ast.Unary(op=op, operand=o):
            return f"{op}{_unary_operand(o)}"
        case ast.Call(func=f, args=args):
            return f"{f}({', '.join(print_expr(a) for a in args)})"
        case ast.StructLit(name=n, fields=fields):
            inner = ", ".join(f"{k}: {print_expr(v)}" for k, v in fields)
            return f"{n} {{ {inner} }}" if inner else f"{n} {{}}"
        case ast.EnumLit(enum=e, variant=v, args=args):
            if not args:
                return f"{e}::{v}"
            return f"{e}::{v}({', '.join(print_expr(a) for a in args)})"
    raise TypeError(f"not an expression: {expr!r}")


def _binary_operand(expr: ast.Expr) -> str:
    text = print_expr(expr)
    return f"({text})" if isinstance(expr, ast.Binary) else text


def _unary_operand(expr: ast.Expr) -> str:
    text = print_expr(expr)
    return f"({text})" if isinstance(expr, ast.Binary) else text


def _postfix_operand(expr: ast.Expr) -> str:
    text = print_expr(expr)
    if isinstance(expr, (ast.Binary, ast.Unary, ast.Deref, ast.Borrow)):
        return f"({text})"
    return text


def _has_struct_lit(expr: ast.Expr) -> bool:
    match expr:
        case ast.StructLit():
            return True
        case ast.FieldAccess(base=o) | ast.Deref(operand=o) | ast.Borrow(operand=o) | ast.Unary(operand=o):
            return _has_struct_lit(o)
        case ast.Binary(lhs=l, rhs=r):
            return _has_struct_lit(l) or _has_struct_lit(r)
    return False


def _cond(expr: ast.Expr) -> str:
    """A condition may not hold a bare struct literal; parenthesize the whole thing."""
    text = print_expr(expr)
    return f"({text})" if _has_struct_lit(expr) else text


def _pattern(arm: ast.Arm) -> str:
    if arm.is_wildcard:
        return "_"
    head = f"{arm.enum}::{arm.variant}"
    if not arm.bindings:
        return head
    subs = []
    for b in arm.bindings:
        if b.name is None:
            subs.append("_")
        elif b.by_ref:
            subs.append(f"ref {'mut ' if b.mutable else ''}{b.name}")
        else:
            subs.append(f"{'mut ' if b.mutable else ''}{b.name}")
    return f"{head}({', '.join(subs)})"


def _block(block: ast.Block, depth: int) -> list[str]:
    lines = ["{"]
    for stmt in block.stmts:
        lines.extend(INDENT + line for line in _stmt(stmt, depth + 1))
    if block.tail is not None:
        lines.append(INDENT + print_expr(block.tail))
    lines.append("}")
    return lines


def _attach(head: str, block_lines: list[str]) -> list[str]:
    return [f"{head} {block_lines[0]}", *block_lines[1:]]


def _stmt(stmt: ast.Stmt, depth: int) -> list[str]:
    match stmt:
        case ast.Let(name=n, mutable=m, ty=ty, init=init):
            text = f"let {'mut ' if m else ''}{n}"
            if ty is not None:
                text += f": {print_type(ty)}"
            if init is not None:
                text += f" = {print_expr(init)}"
            return [text + ";"]
        case ast.Assign(target=t, value=v):
            return [f"{print_expr(t)} = {print_expr(v)};"]
        case ast.ExprStmt(expr=e):
            return [f"{print_expr(e)};"]
        case ast.If(cond=c, then=then, orelse=orelse):
            lines = _attach(f"if {_cond(c)}", _block(then, depth))
            if orelse is not None:
                else_lines = _block(orelse, depth)
                lines[-1] = f"{lines[-1]} else {else_lines[0]}"
                lines.extend(else_lines[1:])
            return lines
        case ast.While(cond=c, body=body):
            return _attach(f"while {_cond(c)}", _block(body, depth))
        case ast.Match(scrutinee=s, arms=arms):
            lines = [f"match {_cond(s)} {{"]
            for arm in arms:
                arm_lines = _attach(f"{_pattern(arm)} =>", _block(arm.body, depth + 1))
                arm_lines[-1] += ","
                lines.extend(INDENT + line for line in arm_lines)
            lines.append("}")
            return lines
        case ast.Return(value=v):
            return ["return;" if v is None else f"return {print_expr(v)};"]
        case ast.BlockStmt(block=b):
            return _block(b, depth)
    raise TypeError(f"not a statement: {stmt!r}")


def _item(item: ast.Item) -> list[str]:
    match item:
        case ast.StructDecl(name=n, fields=fields):
            if not fields:
                return [f"struct {n} {{}}"]
            return [
                f"struct {n} {{",
                *(f"{INDENT}{k}: {print_type(t)}," for k, t in fields),
                "}",
            ]
        case ast.EnumDecl(name=n, variants=variants):
            body = []
            for v in variants:
                if v.payload:
                    body.append(f"{INDENT}{v.name}({', '.join(print_type(t) for t in v.payload)}),")
                else:
                    body.append(f"{INDENT}{v.name},")
            return [f"enum {n} {{", *body, "}"]
        case ast.FnDecl(name=n, lifetimes=lts, params=params, ret=ret, body=body):
            generics = ""
            if lts:
                parts = []
                for lt in lts:
                    part = f"'{lt.name}"
                    if lt.outlives:
                        part += ": " + " + ".join(f"'{o}" for o in lt.outlives)
                    parts.append(part)
                generics = f"<{', '.join(parts)}>"
            ps = ", ".join(f"{'mut ' if p.mutable else ''}{p.name}: {print_type(p.ty)}" for p in params)
            head = f"fn {n}{generics}({ps})"
            if str(ret) != "()":
                head += f" -> {print_type(ret)}"
            return _attach(head, _block(body, 0))
    raise TypeError(f"not an item: {item!r}")


def print_module(module: ast.RlModule) -> str:
    chunks = ["\n".join(_item(item)) for item in module.items]
    return "\n\n".join(chunks) + "\n"
