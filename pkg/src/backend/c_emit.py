"""
C99 code generation from elaborated RustIR.

Structs become C structs, enums tagged unions (`tag` is the variant index),
Box<T> a heap pointer, references plain pointers. Every type that owns heap
memory gets one drop-glue function `drop_<mangle>`. Function bodies keep the
CFG: one labelled block per node, explicit gotos. Arithmetic goes through
small wrapping helpers and division traps on zero with the interpreter's
message, so both backends agree on every observable result.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from src.backend.mangle import mangle
from src.core import __version__
from src.core.log import get_logger
from src.frontend.types import AdtTy, BoolTy, BoxTy, I32Ty, RefTy, RlType, UnitTy, erase_regions
from src.ir import rustir as ir

logger = get_logger("c_emit")

INCLUDES = ("stdbool.h", "stdint.h", "stdio.h", "stdlib.h", "string.h")

# ─── Runtime helpers ───

HELPERS: dict[str, str] = {
    "rl_trap": (
        "static void rl_trap(const char *kind, int node) {\n"
        '    printf("trap: %s at bb%d\\n", kind, node);\n'
        "    exit(101);\n"
        "}"
    ),
    "rl_alloc": (
        "static void *rl_alloc(size_t size) {\n"
        "    void *p = malloc(size ? size : 1);\n"
        "    if (p == NULL) abort();\n"
        "    return p;\n"
        "}"
    ),
    **{
        f"rl_{name}": (
            f"static int32_t rl_{name}(int32_t a, int32_t b) "
            f"{{ return (int32_t)((uint32_t)a {op} (uint32_t)b); }}"
        )
        for name, op in (("add", "+"), ("sub", "-"), ("mul", "*"))
    },
    "rl_neg": "static int32_t rl_neg(int32_t a) { return (int32_t)(0u - (uint32_t)a); }",
    "rl_div": (
        "static int32_t rl_div(int32_t a, int32_t b, int node) {\n"
        '    if (b == 0) rl_trap("DivByZero", node);\n'
        "    if (a == INT32_MIN && b == -1) return INT32_MIN;\n"
        "    return a / b;\n"
        "}"
    ),
    "rl_rem": (
        "static int32_t rl_rem(int32_t a, int32_t b, int node) {\n"
        '    if (b == 0) rl_trap("DivByZero", node);\n'
        "    if (a == INT32_MIN && b == -1) return 0;\n"
        "    return a % b;\n"
        "}"
    ),
}
HELPER_DEPS = {"rl_div": ("rl_trap",), "rl_rem": ("rl_trap",)}
ARITH = {"+": "rl_add", "-": "rl_sub", "*": "rl_mul", "/": "rl_div", "%": "rl_rem"}
COMPARE = {"==", "!=", "<", "<=", ">", ">="}


def c_type(ty: RlType) -> str:
    match ty:
        case UnitTy():
            return "uint8_t"
        case BoolTy():
            return "bool"
        case I32Ty():
            return "int32_t"
        case BoxTy(inner=inner) | RefTy(inner=inner):
            return c_type(inner) + " *"
        case AdtTy(name=name):
            return f"{name}_t"
    raise TypeError(f"no C type for {ty!r}")


def c_const(op: ir.Const) -> str:
    if op.value is None:
        return "0"
    if isinstance(op.value, bool):
        return "true" if op.value else "false"
    if op.value == -(2**31):
        return "(-2147483647 - 1)"
    return f"((int32_t){op.value})" if op.value < 0 else str(op.value)


@dataclass
class CEmitter:
    module: ir.RirModule
    helpers: set[str] = field(default_factory=set)
    glue: dict[str, RlType] = field(default_factory=dict)

    @property
    def adts(self) -> ir.AdtTable:
        return self.module.adts

    def use_helper(self, name: str) -> str:
        self.helpers.add(name)
        for dep in HELPER_DEPS.get(name, ()):
            self.helpers.add(dep)
        return name

    # ─── Types ───

    def adt_order(self) -> list[str]:
        """ADT names, each after every ADT it contains by value."""
        names = list(self.adts.structs) + list(self.adts.enums)
        done: list[str] = []
        seen: set[str] = set()

        def by_value(ty: RlType) -> list[str]:
            return [ty.name] if isinstance(ty, AdtTy) else []

        def visit(name: str) -> None:
            if name in seen:
                return
            seen.add(name)
            if name in self.adts.structs:
                members = list(self.adts.structs[name])
            else:
                members = [t for payload in self.adts.enums[name] for t in payload]
            for t in members:
                for dep in by_value(t):
                    visit(dep)
            done.append(name)

        for name in names:
            visit(name)
        return done

    def type_definition(self, name: str) -> str:
        if name in self.adts.structs:
            fields = self.adts.structs[name]
            body = [f"    {c_type(t)} f{i};" for i, t in enumerate(fields)] or ["    char _empty;"]
            return f"struct {name}_t {{\n" + "\n".join(body) + "\n};"
        lines = [f"struct {name}_t {{", "    int32_t tag;", "    union {"]
        for v, payload in enumerate(self.adts.enums[name]):
            members = " ".join(f"{c_type(t)} f{i};" for i, t in enumerate(payload)) or "char _empty;"
            lines.append(f"        struct {{ {members} }} v{v};")
        lines += ["    } payload;", "};"]
        return "\n".join(lines)

    # ─── Drop glue ───

    def need_glue(self, ty: RlType) -> str:
        ty = erase_regions(ty)
        name = "drop_" + mangle(ty)
        if name in self.glue:
            return name
        self.glue[name] = ty
        if isinstance(ty, BoxTy):
            if self.adts.needs_drop(ty.inner):
                self.need_glue(ty.inner)
        elif isinstance(ty, AdtTy):
            for t in self.members(ty):
                if self.adts.needs_drop(t):
                    self.need_glue(t)
        return name

    def members(self, ty: AdtTy) -> list[RlType]:
        if ty.name in self.adts.structs:
            return list(self.adts.structs[ty.name])
        return [t for payload in self.adts.enums[ty.name] for t in payload]

    def glue_prototype(self, name: str, ty: RlType) -> str:
        return f"static void {name}({c_type(ty)} *p)"

    def glue_definition(self, name: str, ty: RlType) -> str:
        lines = [self.glue_prototype(name, ty) + " {"]
        if isinstance(ty, BoxTy):
            if self.adts.needs_drop(ty.inner):
                lines.append(f"    {self.need_glue(ty.inner)}(*p);")
            lines.append("    free(*p);")
        elif isinstance(ty, AdtTy) and ty.name in self.adts.structs:
            for i, t in enumerate(self.adts.structs[ty.name]):
                if self.adts.needs_drop(t):
                    lines.append(f"    {self.need_glue(t)}(&p->f{i});")
        elif isinstance(ty, AdtTy):
            lines.append("    switch (p->tag) {")
            for v, payload in enumerate(self.adts.enums[ty.name]):
                drops = [
                    f"{self.need_glue(t)}(&p->payload.v{v}.f{i});"
                    for i, t in enumerate(payload)
                    if self.adts.needs_drop(t)
                ]
                if drops:
                    lines.append(f"    case {v}: " + " ".join(drops) + " break;")
            lines.append("    default: break;")
            lines.append("    }")
        lines.append("}")
        return "\n".join(lines)

    # ─── Function bodies ───

    def place(self, fn: ir.RirFunction, place: ir.Place) -> str:
        text = f"_{place.local}"
        ty = fn.locals[place.local].ty
        variant: int | None = None
        for proj in place.projections:
            if isinstance(proj, ir.Deref):
                text = f"(*{text})"
                assert isinstance(ty, (BoxTy, RefTy))
                ty = ty.inner
                variant = None
            elif isinstance(proj, ir.Downcast):
                variant = proj.variant
            else:
                assert isinstance(ty, AdtTy)
                if variant is not None:
                    text = f"{text}.payload.v{variant}.f{proj.index}"
                    ty = self.adts.enums[ty.name][variant][proj.index]
                else:
                    text = f"{text}.f{proj.index}"
                    ty = self.adts.structs[ty.name][proj.index]
                variant = None
        return text

    def operand(self, fn: ir.RirFunction, op: ir.Operand) -> str:
        if isinstance(op, ir.Const):
            return c_const(op)
        return self.place(fn, op.place)

    def rvalue(self, fn: ir.RirFunction, node: int, dest: ir.Place, rv: ir.Rvalue) -> str:
        target = self.place(fn, dest)
        match rv:
            case ir.Use(operand=o):
                return f"{target} = {self.operand(fn, o)};"
            case ir.Ref(place=p):
                return f"{target} = &{self.place(fn, p)};"
            case ir.BinaryOp(op=op, lhs=lhs, rhs=rhs):
                a, b = self.operand(fn, lhs), self.operand(fn, rhs)
                if op in COMPARE:
                    return f"{target} = ({a} {op} {b});"
                helper = self.use_helper(ARITH[op])
                extra = f", {node}" if op in ("/", "%") else ""
                return f"{target} = {helper}({a}, {b}{extra});"
            case ir.UnaryOp(op=op, operand=o):
                if op == "-":
                    return f"{target} = {self.use_helper('rl_neg')}({self.operand(fn, o)});"
                return f"{target} = !{self.operand(fn, o)};"
            case ir.BoxNew(operand=o):
                content = c_type(fn.place_type(dest, self.adts).inner)  # type: ignore[union-attr]
                alloc = self.use_helper("rl_alloc")
                return (
                    f"{{ {content} *rl_box = {alloc}(sizeof *rl_box); "
                    f"*rl_box = {self.operand(fn, o)}; {target} = rl_box; }}"
                )
            case ir.Aggregate(adt=name, variant=None, operands=ops):
                inits = ", ".join(f".f{i} = {self.operand(fn, o)}" for i, o in enumerate(ops)) or "0"
                return f"{target} = ({name}_t){{ {inits} }};"
            case ir.Aggregate(adt=name, variant=v, operands=ops):
                if not ops:
                    return f"{target} = ({name}_t){{ .tag = {v}, .payload = {{ .v{v} = {{ 0 }} }} }};"
                inits = ", ".join(f".f{i} = {self.operand(fn, o)}" for i, o in enumerate(ops))
                return f"{target} = ({name}_t){{ .tag = {v}, .payload = {{ .v{v} = {{ {inits} }} }} }};"
        raise TypeError(f"unknown rvalue {rv!r}")

    def drop(self, fn: ir.RirFunction, place: ir.Place, shallow: bool) -> str:
        p = self.place(fn, place)
        if shallow:
            return f"free({p});"
        return f"{self.need_glue(fn.place_type(place, self.adts))}(&{p});"

    def instr(self, fn: ir.RirFunction, node: int, instr: ir.Instr) -> list[str]:
        """C statements for one node; falling through to node + 1 needs no goto."""
        def jump(target: int) -> list[str]:
            return [] if target == node + 1 else [f"goto bb{target};"]

        match instr:
            case ir.Assign(place=p, rvalue=rv, next=nxt):
                return [self.rvalue(fn, node, p, rv), *jump(nxt)]
            case ir.StorageDead(next=nxt) | ir.Nop(next=nxt):
                return [";", *jump(nxt)]
            case ir.Drop(place=p, shallow=sh, next=nxt):
                return [self.drop(fn, p, sh), *jump(nxt)]
            case ir.ConditionalDrop(place=p, flag=f, shallow=sh, next=nxt):
                return [f"if (_{f}) {self.drop(fn, p, sh)}", *jump(nxt)]
            case ir.Goto(target=t):
                return [f"goto bb{t};"]
            case ir.If(cond=c, then=t, orelse=e):
                return [f"if ({self.operand(fn, c)}) goto bb{t}; else goto bb{e};"]
            case ir.Switch(place=p, arms=arms, otherwise=other):
                cases = " ".join(f"case {v}: goto bb{t};" for v, t in arms)
                default = f"default: goto bb{other};" if other is not None else "default: abort();"
                return [f"switch ({self.place(fn, p)}.tag) {{ {cases} {default} }}"]
            case ir.Call(dest=d, func=name, args=args, next=nxt):
                argv = ", ".join(self.operand(fn, a) for a in args)
                return [f"{self.place(fn, d)} = rl_{name}({argv});", *jump(nxt)]
            case ir.Return():
                return ["return _0;"]
        raise TypeError(f"unknown instruction {instr!r}")

    def labels(self, fn: ir.RirFunction) -> set[int]:
        out = {fn.entry} if fn.entry != 0 else set()
        for n, instr in fn.nodes.items():
            match instr:
                case ir.Goto() | ir.If() | ir.Switch():
                    out.update(ir.successors(instr))
                case _:
                    out.update(s for s in ir.successors(instr) if s != n + 1)
        return out

    def signature(self, fn: ir.RirFunction) -> str:
        params = ", ".join(
            f"{c_type(fn.locals[i].ty)} _{i}" for i in range(1, fn.param_count + 1)
        ) or "void"
        return f"{c_type(fn.return_type)} rl_{fn.name}({params})"

    def function(self, fn: ir.RirFunction) -> str:
        lines = [self.signature(fn) + " {"]
        for i in range(1, fn.param_count + 1):
            lines.append(f"    (void)_{i};")
        for i, decl in enumerate(fn.locals):
            if i == 0 or i > fn.param_count:
                lines.append(f"    {c_type(decl.ty)} _{i};")
        for i in range(len(fn.locals)):
            if i == 0 or i > fn.param_count:
                lines.append(f"    memset(&_{i}, 0, sizeof _{i});")
        if fn.entry != 0:
            lines.append(f"    goto bb{fn.entry};")
        labels = self.labels(fn)
        for n in sorted(fn.nodes):
            stmts = self.instr(fn, n, fn.nodes[n])
            prefix = f"bb{n}: " if n in labels else ""
            lines.append(f"    {prefix}{stmts[0]}")
            lines.extend(f"    {s}" for s in stmts[1:])
        lines.append("}")
        return "\n".join(lines)

    def entry_point(self, fn: ir.RirFunction) -> str:
        lines = ["int main(int argc, char **argv) {", "    (void)argc;", "    (void)argv;"]
        args: list[str] = []
        for i, ty in enumerate(fn.param_types, start=1):
            if isinstance(ty, BoolTy):
                lines.append(f'    bool a{i} = argc > {i} && strcmp(argv[{i}], "true") == 0;')
            else:
                lines.append(f"    int32_t a{i} = argc > {i} ? (int32_t)strtol(argv[{i}], NULL, 10) : 0;")
            args.append(f"a{i}")
        lines.append(f"    {c_type(fn.return_type)} r = rl_{fn.name}({', '.join(args)});")
        match fn.return_type:
            case I32Ty():
                lines.append('    printf("%d\\n", (int)r);')
            case BoolTy():
                lines.append('    printf("%s\\n", r ? "true" : "false");')
            case UnitTy():
                lines.append('    printf("()\\n");')
                lines.append("    (void)r;")
            case _:
                lines.append("    (void)r;")
        lines += ["    return 0;", "}"]
        return "\n".join(lines)

    def emit(self, source_text: str = "", entry: str = "main") -> str:
        functions = [self.function(fn) for fn in self.module.functions]
        # glue definitions may request more glue; iterate to closure
        glue_defs: dict[str, str] = {}
        while len(glue_defs) < len(self.glue):
            for name, ty in list(self.glue.items()):
                if name not in glue_defs:
                    glue_defs[name] = self.glue_definition(name, ty)

        digest = hashlib.sha256(source_text.encode()).hexdigest()
        out = [
            f"/* generated by rustlight-frontend {__version__} */",
            f"/* input sha256: {digest} */",
            *(f"#include <{h}>" for h in INCLUDES),
            "",
        ]
        for name in HELPERS:
            if name in self.helpers:
                out += [HELPERS[name], ""]
        order = self.adt_order()
        out += [f"typedef struct {name}_t {name}_t;" for name in order]
        if order:
            out.append("")
        for name in order:
            out += [self.type_definition(name), ""]
        for name in sorted(glue_defs):
            out.append(self.glue_prototype(name, self.glue[name]) + ";")
        for fn in self.module.functions:
            out.append(self.signature(fn) + ";")
        out.append("")
        for name in sorted(glue_defs):
            out += [glue_defs[name], ""]
        for text in functions:
            out += [text, ""]
        if entry in self.module.by_name:
            out.append(self.entry_point(self.module.by_name[entry]))
        return "\n".join(out) + "\n"


def emit(module: ir.RirModule, source_text: str = "", entry: str = "main") -> str:
    """C99 translation unit for an elaborated, borrow-checked module."""
    text = CEmitter(module).emit(source_text, entry)
    logger.debug("emitted_c", functions=len(module.functions), bytes=len(text))
    return text
