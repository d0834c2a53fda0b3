"""Pretty-printer emitting parseable RDDL for the supported subset.

Guarantee used by tests: re-parsing the printed text yields a structurally
equal AST (source positions excluded).
"""

from __future__ import annotations

from . import ast
from .ast import (
    Add, Agg, And, Apply, Assignment, BernoulliExpr, Cmp, Const, Div,
    DomainAst, Expr, If, Implies, InstanceAst, KronDeltaExpr, Mul, Neg, Not,
    Or, Quant, Sub,
)


def _literal(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(float(value))


def expr_to_str(expr: Expr) -> str:
    if isinstance(expr, Const):
        return _literal(expr.value)
    if isinstance(expr, Apply):
        if not expr.args:
            return expr.name
        return f"{expr.name}({', '.join(expr.args)})"
    if isinstance(expr, Not):
        return f"~({expr_to_str(expr.item)})"
    if isinstance(expr, Neg):
        return f"-({expr_to_str(expr.item)})"
    if isinstance(expr, And):
        return " ^ ".join(f"({expr_to_str(item)})" for item in expr.items)
    if isinstance(expr, Or):
        return " | ".join(f"({expr_to_str(item)})" for item in expr.items)
    if isinstance(expr, Implies):
        return f"({expr_to_str(expr.lhs)}) => ({expr_to_str(expr.rhs)})"
    if isinstance(expr, Cmp):
        return f"({expr_to_str(expr.lhs)}) {expr.op} ({expr_to_str(expr.rhs)})"
    if isinstance(expr, Add):
        return " + ".join(f"({expr_to_str(item)})" for item in expr.items)
    if isinstance(expr, Sub):
        return f"({expr_to_str(expr.lhs)}) - ({expr_to_str(expr.rhs)})"
    if isinstance(expr, Mul):
        return " * ".join(f"({expr_to_str(item)})" for item in expr.items)
    if isinstance(expr, Div):
        return f"({expr_to_str(expr.lhs)}) / ({expr_to_str(expr.rhs)})"
    if isinstance(expr, If):
        return (f"if ({expr_to_str(expr.cond)}) then ({expr_to_str(expr.then)}) "
                f"else ({expr_to_str(expr.orelse)})")
    if isinstance(expr, Quant):
        vars_ = ", ".join(f"{v} : {c}" for v, c in expr.variables)
        return f"{expr.kind}_{{{vars_}}} [{expr_to_str(expr.body)}]"
    if isinstance(expr, Agg):
        vars_ = ", ".join(f"{v} : {c}" for v, c in expr.variables)
        return f"{expr.kind}_{{{vars_}}} [{expr_to_str(expr.body)}]"
    if isinstance(expr, BernoulliExpr):
        return f"Bernoulli({expr_to_str(expr.param)})"
    if isinstance(expr, KronDeltaExpr):
        return f"KronDelta({expr_to_str(expr.item)})"
    raise TypeError(f"not an Expr: {expr!r}")


def domain_to_str(domain: DomainAst) -> str:
    lines = [f"domain {domain.name} {{"]
    if domain.classes:
        lines.append("    types {")
        for cls in domain.classes:
            lines.append(f"        {cls} : object;")
        lines.append("    };")
    lines.append("    pvariables {")
    for pv in domain.pvariables:
        params = f"({', '.join(pv.param_types)})" if pv.param_types else ""
        lines.append(
            f"        {pv.name}{params} : {{ {pv.kind}, {pv.range}, "
            f"default = {_literal(pv.default)} }};")
    lines.append("    };")
    lines.append("    cpfs {")
    for cpf in domain.cpfs:
        params = f"({', '.join(cpf.params)})" if cpf.params else ""
        lines.append(f"        {cpf.name}'{params} = {expr_to_str(cpf.expr)};")
    lines.append("    };")
    lines.append(f"    reward = {expr_to_str(domain.reward)};")
    if domain.max_nondef_actions is not None:
        lines.append(f"    max-nondef-actions = {domain.max_nondef_actions};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _assignment_to_str(assignment: Assignment) -> str:
    args = f"({', '.join(assignment.args)})" if assignment.args else ""
    return f"        {assignment.name}{args} = {_literal(assignment.value)};"


def instance_to_str(instance: InstanceAst) -> str:
    lines = [f"instance {instance.name} {{"]
    lines.append(f"    domain = {instance.domain_name};")
    if instance.objects:
        lines.append("    objects {")
        for cls, members in instance.objects:
            lines.append(f"        {cls} : {{{', '.join(members)}}};")
        lines.append("    };")
    if instance.non_fluent_assignments:
        lines.append("    non-fluents {")
        lines.extend(_assignment_to_str(a) for a in instance.non_fluent_assignments)
        lines.append("    };")
    if instance.init_state:
        lines.append("    init-state {")
        lines.extend(_assignment_to_str(a) for a in instance.init_state)
        lines.append("    };")
    if instance.max_nondef_actions is not None:
        lines.append(f"    max-nondef-actions = {instance.max_nondef_actions};")
    lines.append(f"    horizon = {instance.horizon};")
    lines.append(f"    discount = {instance.discount!r};")
    lines.append("}")
    return "\n".join(lines) + "\n"
