"""Textual RustIR listings (`--dump=rustir`); the format is stable and golden-tested."""

from __future__ import annotations

from src.ir import rustir as ir


def format_instr(instr: ir.Instr) -> str:
    match instr:
        case ir.Assign(place=p, rvalue=rv, next=n):
            return f"{p} = {rv} -> [bb{n}]"
        case ir.StorageDead(local=l, next=n):
            return f"StorageDead(_{l}) -> [bb{n}]"
        case ir.Drop(place=p, next=n, shallow=s):
            return f"{_drop_name(s)}({p}) -> [bb{n}]"
        case ir.ConditionalDrop(place=p, flag=f, next=n, shallow=s):
            return f"{_drop_name(s)}({p}) if _{f} -> [bb{n}]"
        case ir.Nop(next=n):
            return f"nop -> [bb{n}]"
        case ir.Goto(target=t):
            return f"goto -> [bb{t}]"
        case ir.If(cond=c, then=t, orelse=e):
            return f"if {c} -> [bb{t}, bb{e}]"
        case ir.Switch(place=p, arms=arms, otherwise=o):
            targets = [f"{v}: bb{t}" for v, t in arms]
            if o is not None:
                targets.append(f"otherwise: bb{o}")
            return f"switch {p} -> [{', '.join(targets)}]"
        case ir.Call(dest=d, func=f, args=args, next=n, region_subst=subst):
            text = f"{d} = {f}({', '.join(str(a) for a in args)})"
            if subst:
                text += " [" + ", ".join(f"'?{r}" for r in subst) + "]"
            return f"{text} -> [bb{n}]"
        case ir.Return():
            return "return"
    raise TypeError(f"not an instruction: {instr!r}")


def _drop_name(shallow: bool) -> str:
    return "drop_shallow" if shallow else "drop"


def dump_ir(fn: ir.RirFunction) -> str:
    """The node listing only, one `bbN: <instr>` line per node in id order."""
    return "\n".join(f"bb{n}: {format_instr(fn.nodes[n])}" for n in sorted(fn.nodes))


def dump_function(fn: ir.RirFunction) -> str:
    """Header with locals and regions, followed by the node listing."""
    params = ", ".join(f"_{i}: {fn.locals[i].ty}" for i in range(1, fn.param_count + 1))
    lines = [f"fn {fn.name}({params}) -> {fn.return_type} {{"]
    for i, decl in enumerate(fn.locals):
        mut = "mut " if decl.mutable else ""
        note = decl.kind.value if decl.kind in (ir.LocalKind.RETURN, ir.LocalKind.TEMP, ir.LocalKind.FLAG) \
            else f"{decl.kind.value} {decl.name}"
        lines.append(f"    let {mut}_{i}: {decl.ty}; // {note}")
    for region in fn.regions:
        suffix = f" '{region.name}" if region.name else ""
        lines.append(f"    region '?{region.id}: {region.kind.value}{suffix}")
    for a, b in fn.outlives:
        lines.append(f"    outlives '?{a}: '?{b}")
    lines.extend(f"    {line}" for line in dump_ir(fn).splitlines())
    lines.append("}")
    return "\n".join(lines)


def dump_module(module: ir.RirModule) -> str:
    return "\n\n".join(dump_function(fn) for fn in module.functions) + "\n"
