"""Cross-validation of a parsed (domain, instance) pair."""

from __future__ import annotations

from . import ast
from .ast import Apply, Assignment, DomainAst, InstanceAst, TypedModel
from .errors import ValidationError


def _pos_of(node) -> tuple:
    if node.pos is not None:
        return node.pos.line, node.pos.col
    return None, None


def _check_assignment(assignment: Assignment, domain: DomainAst,
                      object_class: dict[str, str], expected_kind: str) -> None:
    line, col = _pos_of(assignment)
    decl = domain.pvar(assignment.name)
    if decl is None:
        raise ValidationError("unknown-symbol", assignment.name,
                              f"unknown pvariable {assignment.name!r}", line, col)
    if decl.kind != expected_kind:
        raise ValidationError(
            "type-mismatch", assignment.name,
            f"{assignment.name!r} is a {decl.kind}, not a {expected_kind}",
            line, col)
    if len(assignment.args) != decl.arity:
        raise ValidationError(
            "arity-mismatch", assignment.name,
            f"{assignment.name!r} assigned with {len(assignment.args)} arguments, "
            f"declared with {decl.arity}", line, col)
    for obj, expected_cls in zip(assignment.args, decl.param_types):
        actual = object_class.get(obj)
        if actual is None:
            raise ValidationError("unknown-symbol", obj,
                                  f"undeclared object {obj!r}", line, col)
        if actual != expected_cls:
            raise ValidationError(
                "type-mismatch", obj,
                f"object {obj!r} has type {actual!r}, {assignment.name!r} "
                f"expects {expected_cls!r}", line, col)
    if decl.range == ast.BOOL and not isinstance(assignment.value, bool):
        raise ValidationError(
            "type-mismatch", assignment.name,
            f"boolean pvariable {assignment.name!r} assigned a number", line, col)
    if decl.range == ast.REAL and isinstance(assignment.value, bool):
        raise ValidationError(
            "type-mismatch", assignment.name,
            f"real pvariable {assignment.name!r} assigned a boolean", line, col)


def _check_object_terms(domain: DomainAst, object_class: dict[str, str]) -> None:
    """Object literals inside domain expressions must exist with the right type."""

    def check(expr, where):
        for node in ast.walk(expr):
            if not isinstance(node, Apply):
                continue
            decl = domain.pvar(node.name)
            for term, expected in zip(node.args, decl.param_types):
                if ast.is_var(term):
                    continue
                line, col = _pos_of(node)
                actual = object_class.get(term)
                if actual is None:
                    raise ValidationError(
                        "unknown-symbol", term,
                        f"undeclared object {term!r} in {where}", line, col)
                if actual != expected:
                    raise ValidationError(
                        "type-mismatch", term,
                        f"object {term!r} has type {actual!r}, {node.name!r} "
                        f"expects {expected!r}", line, col)

    for cpf in domain.cpfs:
        check(cpf.expr, f"CPF of {cpf.name!r}")
    check(domain.reward, "reward")


def validate(domain: DomainAst, instance: InstanceAst) -> TypedModel:
    """Resolve an instance against its domain, checking every assignment.

    Raises :class:`ValidationError` carrying the offending symbol and source
    location; the first problem found wins.
    """
    if instance.domain_name != domain.name:
        raise ValidationError(
            "domain-mismatch", instance.domain_name,
            f"instance requires domain {instance.domain_name!r}, "
            f"got {domain.name!r}")

    object_class: dict[str, str] = {}
    for cls, members in instance.objects:
        if cls not in domain.classes:
            raise ValidationError("unknown-symbol", cls,
                                  f"objects declared for undeclared type {cls!r}")
        for obj in members:
            if obj in object_class:
                raise ValidationError("type-mismatch", obj,
                                      f"object {obj!r} declared twice")
            object_class[obj] = cls

    for assignment in instance.non_fluent_assignments:
        _check_assignment(assignment, domain, object_class, ast.NON_FLUENT)
    for assignment in instance.init_state:
        _check_assignment(assignment, domain, object_class, ast.STATE_FLUENT)
    _check_object_terms(domain, object_class)

    return TypedModel(domain=domain, instance=instance)
