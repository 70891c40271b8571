"""
Rustlight parser.

A Lark LALR grammar for a strict subset of Rust surface syntax, plus a
Transformer that builds the frozen AST. As in Rust, a struct literal cannot
appear bare in condition position: `if x { .. }` and `while n { .. }` open the
body block, and `if (S { .. }).f { .. }` needs the parentheses.
"""

from __future__ import annotations

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken

from src.core.diagnostics import Kind, Span, make
from src.core.errors import CompileError
from src.core.log import get_logger
from src.frontend import ast
from src.frontend.types import BOOL, I32, UNIT, AdtTy, BoxTy, RefTy, RlType

logger = get_logger("parser")

GRAMMAR = r"""
    start: item*

    ?item: struct_decl
         | enum_decl
         | fn_decl

    struct_decl: "struct" IDENT "{" [field_decl ("," field_decl)* [","]] "}"
    field_decl: IDENT ":" type

    enum_decl: "enum" IDENT "{" [variant_decl ("," variant_decl)* [","]] "}"
    variant_decl: IDENT ["(" type ("," type)* [","] ")"]

    fn_decl: "fn" IDENT [generics] "(" [param ("," param)* [","]] ")" ["->" type] block
    generics: "<" lifetime_param ("," lifetime_param)* [","] ">"
    lifetime_param: LIFETIME [":" LIFETIME ("+" LIFETIME)*]
    param: [MUT] IDENT ":" type

    ?type: "(" ")"                    -> unit_type
         | "bool"                     -> bool_type
         | "i32"                      -> i32_type
         | "Box" "<" type ">"         -> box_type
         | "&" [LIFETIME] [MUT] type  -> ref_type
         | IDENT                      -> adt_type

    block: "{" stmt* [expr] "}"

    ?stmt: let_stmt
         | assign_stmt
         | expr_stmt
         | if_stmt
         | while_stmt
         | match_stmt
         | return_stmt
         | block_stmt

    let_stmt: "let" [MUT] IDENT [":" type] ["=" expr] ";"
    assign_stmt: expr "=" expr ";"
    expr_stmt: expr ";"
    if_stmt: "if" cond block ["else" (block | if_stmt)]
    while_stmt: "while" cond block
    match_stmt: "match" cond "{" arm* "}"
    arm: pattern "=>" block [","]
    ?pattern: IDENT "::" IDENT ["(" subpat ("," subpat)* [","] ")"] -> variant_pattern
            | "_"                                                   -> wildcard_pattern
    ?subpat: "_"               -> sub_wild
           | REF [MUT] IDENT   -> sub_ref
           | MUT IDENT         -> sub_mut
           | IDENT             -> sub_bind
    return_stmt: "return" [expr] ";"
    block_stmt: block

    ?expr: or_expr
    ?or_expr: and_expr
            | or_expr "||" and_expr -> or_op
    ?and_expr: cmp_expr
             | and_expr "&&" cmp_expr -> and_op
    ?cmp_expr: add_expr
             | add_expr "==" add_expr -> eq
             | add_expr "!=" add_expr -> ne
             | add_expr "<" add_expr  -> lt
             | add_expr "<=" add_expr -> le
             | add_expr ">" add_expr  -> gt
             | add_expr ">=" add_expr -> ge
    ?add_expr: mul_expr
             | add_expr "+" mul_expr -> add
             | add_expr "-" mul_expr -> sub
    ?mul_expr: unary
             | mul_expr "*" unary -> mul
             | mul_expr "/" unary -> div
             | mul_expr "%" unary -> rem
    ?unary: postfix
          | "-" unary        -> neg
          | "!" unary        -> not_
          | "*" unary        -> deref
          | "&" [MUT] unary  -> borrow
    ?postfix: atom
            | postfix "." IDENT -> field
    ?atom: common_atom
         | IDENT "{" [field_init ("," field_init)* [","]] "}" -> struct_lit
    field_init: IDENT ":" expr

    // Condition position (`if`, `while`, `match`): the same operators, but a
    // name followed by `{` ends the condition instead of opening a struct literal.
    ?cond: c_or_expr
    ?c_or_expr: c_and_expr
              | c_or_expr "||" c_and_expr -> or_op
    ?c_and_expr: c_cmp_expr
               | c_and_expr "&&" c_cmp_expr -> and_op
    ?c_cmp_expr: c_add_expr
               | c_add_expr "==" c_add_expr -> eq
               | c_add_expr "!=" c_add_expr -> ne
               | c_add_expr "<" c_add_expr  -> lt
               | c_add_expr "<=" c_add_expr -> le
               | c_add_expr ">" c_add_expr  -> gt
               | c_add_expr ">=" c_add_expr -> ge
    ?c_add_expr: c_mul_expr
               | c_add_expr "+" c_mul_expr -> add
               | c_add_expr "-" c_mul_expr -> sub
    ?c_mul_expr: c_unary
               | c_mul_expr "*" c_unary -> mul
               | c_mul_expr "/" c_unary -> div
               | c_mul_expr "%" c_unary -> rem
    ?c_unary: c_postfix
            | "-" c_unary        -> neg
            | "!" c_unary        -> not_
            | "*" c_unary        -> deref
            | "&" [MUT] c_unary  -> borrow
    ?c_postfix: common_atom
              | c_postfix "." IDENT -> field

    ?common_atom: INT                                               -> int_lit
                | "true"                                            -> true_lit
                | "false"                                           -> false_lit
                | "(" ")"                                           -> unit_lit
                | "(" expr ")"
                | IDENT                                             -> var
                | IDENT "(" [expr ("," expr)* [","]] ")"            -> call
                | "Box" "::" "new" "(" expr ")"                     -> box_new
                | IDENT "::" IDENT ["(" [expr ("," expr)* [","]] ")"] -> enum_lit

    MUT: "mut"
    REF: "ref"
    LIFETIME: /'[a-zA-Z_][a-zA-Z0-9_]*/
    IDENT: /[a-zA-Z_][a-zA-Z0-9_]*/
    INT: /[0-9]+/
    COMMENT: /\/\/[^\n]*/

    %import common.WS
    %ignore WS
    %ignore COMMENT
"""

_LARK = Lark(
    GRAMMAR,
    parser="lalr",
    lexer="contextual",
    propagate_positions=True,
    maybe_placeholders=True,
)


def _span_of(meta_or_token: object) -> Span:
    line = getattr(meta_or_token, "line", None)
    col = getattr(meta_or_token, "column", None)
    if line is None or col is None:
        return Span()
    return Span(line=line, col=col)


def _present(children: list) -> list:
    return [c for c in children if c is not None]


def _tokens(children: list, type_: str) -> list[Token]:
    return [c for c in children if isinstance(c, Token) and c.type == type_]


def _exprs(children: list) -> list[ast.Expr]:
    return [c for c in children if not isinstance(c, Token) and c is not None]


class _Generics(list):
    """Marker list of LifetimeParam produced by the `generics` rule."""


class _Pattern(tuple):
    """(enum, variant, bindings) produced by the pattern rules."""


@v_args(meta=True)
class AstBuilder(Transformer):
    """Turns the Lark parse tree into ast nodes."""

    # ─── Items ───

    def start(self, meta, children):
        return ast.RlModule(items=tuple(children))

    def struct_decl(self, meta, children):
        name = _tokens(children, "IDENT")[0]
        fields = tuple(c for c in children if isinstance(c, tuple))
        return ast.StructDecl(name=str(name), fields=fields, span=_span_of(name))

    def field_decl(self, meta, children):
        name, ty = _present(children)
        return (str(name), ty)

    def enum_decl(self, meta, children):
        name = _tokens(children, "IDENT")[0]
        variants = tuple(c for c in children if isinstance(c, ast.VariantDecl))
        return ast.EnumDecl(name=str(name), variants=variants, span=_span_of(name))

    def variant_decl(self, meta, children):
        present = _present(children)
        return ast.VariantDecl(name=str(present[0]), payload=tuple(present[1:]))

    def fn_decl(self, meta, children):
        name = _tokens(children, "IDENT")[0]
        lifetimes: tuple[ast.LifetimeParam, ...] = ()
        params: list[ast.Param] = []
        ret: RlType = UNIT
        body: ast.Block | None = None
        for child in _present(children[1:]):
            if isinstance(child, _Generics):
                lifetimes = tuple(child)
            elif isinstance(child, ast.Param):
                params.append(child)
            elif isinstance(child, ast.Block):
                body = child
            else:
                ret = child
        assert body is not None
        return ast.FnDecl(
            name=str(name),
            lifetimes=lifetimes,
            params=tuple(params),
            ret=ret,
            body=body,
            span=_span_of(name),
        )

    def generics(self, meta, children):
        return _Generics(_present(children))

    def lifetime_param(self, meta, children):
        names = [str(t)[1:] for t in _tokens(children, "LIFETIME")]
        return ast.LifetimeParam(name=names[0], outlives=tuple(names[1:]))

    def param(self, meta, children):
        ty = [c for c in _present(children) if not isinstance(c, Token)][0]
        return ast.Param(
            name=str(_tokens(children, "IDENT")[0]),
            mutable=bool(_tokens(children, "MUT")),
            ty=ty,
        )

    # ─── Types ───

    def unit_type(self, meta, children):
        return UNIT

    def bool_type(self, meta, children):
        return BOOL

    def i32_type(self, meta, children):
        return I32

    def box_type(self, meta, children):
        return BoxTy(_present(children)[0])

    def ref_type(self, meta, children):
        lifetimes = _tokens(children, "LIFETIME")
        inner = [c for c in _present(children) if not isinstance(c, Token)][0]
        region = str(lifetimes[0])[1:] if lifetimes else None
        return RefTy(region, bool(_tokens(children, "MUT")), inner)

    def adt_type(self, meta, children):
        return AdtTy(str(children[0]))

    # ─── Statements ───

    def block(self, meta, children):
        present = _present(children)
        stmts: list[ast.Stmt] = []
        tail: ast.Expr | None = None
        for child in present:
            if isinstance(child, ast.Stmt):
                stmts.append(child)
            else:
                tail = child
        return ast.Block(stmts=tuple(stmts), tail=tail, span=_span_of(meta))

    def let_stmt(self, meta, children):
        ty = next((c for c in children if isinstance(c, RlType)), None)
        init = next(
            (c for c in children if c is not None and not isinstance(c, (Token, RlType))),
            None,
        )
        return ast.Let(
            name=str(_tokens(children, "IDENT")[0]),
            mutable=bool(_tokens(children, "MUT")),
            ty=ty,
            init=init,
            span=_span_of(meta),
        )

    def assign_stmt(self, meta, children):
        target, value = children
        return ast.Assign(target=target, value=value, span=_span_of(meta))

    def expr_stmt(self, meta, children):
        return ast.ExprStmt(expr=children[0], span=_span_of(meta))

    def if_stmt(self, meta, children):
        present = _present(children)
        orelse = present[2] if len(present) > 2 else None
        if isinstance(orelse, ast.If):
            orelse = ast.Block(stmts=(orelse,), tail=None, span=orelse.span)
        return ast.If(cond=present[0], then=present[1], orelse=orelse, span=_span_of(meta))

    def while_stmt(self, meta, children):
        cond, body = children
        return ast.While(cond=cond, body=body, span=_span_of(meta))

    def match_stmt(self, meta, children):
        present = _present(children)
        return ast.Match(scrutinee=present[0], arms=tuple(present[1:]), span=_span_of(meta))

    def arm(self, meta, children):
        pattern, body = _present(children)
        enum, variant, bindings = pattern
        return ast.Arm(
            enum=enum, variant=variant, bindings=bindings, body=body, span=_span_of(meta)
        )

    def variant_pattern(self, meta, children):
        present = _present(children)
        bindings = tuple(c for c in present if isinstance(c, ast.Binding))
        return _Pattern((str(present[0]), str(present[1]), bindings))

    def wildcard_pattern(self, meta, children):
        return _Pattern((None, None, ()))

    def sub_wild(self, meta, children):
        return ast.Binding(name=None)

    def sub_ref(self, meta, children):
        return ast.Binding(
            name=str(_tokens(children, "IDENT")[0]),
            by_ref=True,
            mutable=bool(_tokens(children, "MUT")),
        )

    def sub_mut(self, meta, children):
        return ast.Binding(name=str(_tokens(children, "IDENT")[0]), mutable=True)

    def sub_bind(self, meta, children):
        return ast.Binding(name=str(children[0]))

    def return_stmt(self, meta, children):
        present = _present(children)
        return ast.Return(value=present[0] if present else None, span=_span_of(meta))

    def block_stmt(self, meta, children):
        return ast.BlockStmt(block=children[0], span=_span_of(meta))

    # ─── Expressions ───

    def _binary(self, op: str, meta, children):
        lhs, rhs = children
        return ast.Binary(op=op, lhs=lhs, rhs=rhs, span=_span_of(meta))

    def or_op(self, meta, children):
        return self._binary("||", meta, children)

    def and_op(self, meta, children):
        return self._binary("&&", meta, children)

    def eq(self, meta, children):
        return self._binary("==", meta, children)

    def ne(self, meta, children):
        return self._binary("!=", meta, children)

    def lt(self, meta, children):
        return self._binary("<", meta, children)

    def le(self, meta, children):
        return self._binary("<=", meta, children)

    def gt(self, meta, children):
        return self._binary(">", meta, children)

    def ge(self, meta, children):
        return self._binary(">=", meta, children)

    def add(self, meta, children):
        return self._binary("+", meta, children)

    def sub(self, meta, children):
        return self._binary("-", meta, children)

    def mul(self, meta, children):
        return self._binary("*", meta, children)

    def div(self, meta, children):
        return self._binary("/", meta, children)

    def rem(self, meta, children):
        return self._binary("%", meta, children)

    def neg(self, meta, children):
        return ast.Unary(op="-", operand=children[0], span=_span_of(meta))

    def not_(self, meta, children):
        return ast.Unary(op="!", operand=children[0], span=_span_of(meta))

    def deref(self, meta, children):
        return ast.Deref(operand=children[0], span=_span_of(meta))

    def borrow(self, meta, children):
        operand = _exprs(children)[0]
        return ast.Borrow(
            mutable=bool(_tokens(children, "MUT")), operand=operand, span=_span_of(meta)
        )

    def field(self, meta, children):
        base, name = children
        return ast.FieldAccess(base=base, name=str(name), span=_span_of(name))

    def int_lit(self, meta, children):
        return ast.IntLit(value=int(children[0]), span=_span_of(children[0]))

    def true_lit(self, meta, children):
        return ast.BoolLit(value=True, span=_span_of(meta))

    def false_lit(self, meta, children):
        return ast.BoolLit(value=False, span=_span_of(meta))

    def unit_lit(self, meta, children):
        return ast.UnitLit(span=_span_of(meta))

    def var(self, meta, children):
        return ast.Var(name=str(children[0]), span=_span_of(children[0]))

    def call(self, meta, children):
        name = children[0]
        return ast.Call(func=str(name), args=tuple(_exprs(children[1:])), span=_span_of(name))

    def box_new(self, meta, children):
        return ast.BoxNew(operand=_exprs(children)[0], span=_span_of(meta))

    def struct_lit(self, meta, children):
        name = children[0]
        fields = tuple(c for c in children[1:] if isinstance(c, tuple))
        return ast.StructLit(name=str(name), fields=fields, span=_span_of(name))

    def field_init(self, meta, children):
        name, value = children
        return (str(name), value)

    def enum_lit(self, meta, children):
        enum, variant = children[0], children[1]
        return ast.EnumLit(
            enum=str(enum),
            variant=str(variant),
            args=tuple(_exprs(children[2:])),
            span=_span_of(enum),
        )


def _syntax_diagnostic(err: UnexpectedInput, source: str):
    line = getattr(err, "line", -1)
    col = getattr(err, "column", -1)
    if line is None or line < 1:
        lines = source.splitlines() or [""]
        line, col = len(lines), len(lines[-1]) + 1
    if isinstance(err, UnexpectedToken):
        found = "end of file" if err.token.type == "$END" else f"`{err.token}`"
        message = f"expected one of {sorted(err.expected)}, found {found}"
    elif isinstance(err, UnexpectedCharacters):
        message = f"unexpected character `{source[err.pos_in_stream]}`"
    elif isinstance(err, UnexpectedEOF):
        message = "unexpected end of file"
    else:
        message = "syntax error"
    return make(Kind.SYNTAX_ERROR, message, Span(line=line, col=col))


def parse(source: str) -> ast.RlModule:
    """Parse source text into an RlModule; raises CompileError on syntax errors."""
    try:
        tree = _LARK.parse(source)
    except UnexpectedInput as err:
        raise CompileError([_syntax_diagnostic(err, source)]) from err
    module = AstBuilder().transform(tree)
    logger.debug("parsed", items=len(module.items))
    return module
