"""RDDL subset: AST, lexer, parser, printer, validation."""

from .ast import (
    Add, Agg, And, Apply, Assignment, BernoulliExpr, Cmp, Const, Cpf, Div,
    DomainAst, Expr, If, Implies, InstanceAst, KronDeltaExpr, Mul, Neg, Not,
    Or, PVariable, Quant, Sub, TypedModel,
)
from .errors import (
    DuplicateAssignmentError, LexicalError, RddlError, RddlSyntaxError,
    UnsupportedConstructError, ValidationError,
)
from .parser import parse_domain, parse_expression, parse_instance
from .printer import domain_to_str, expr_to_str, instance_to_str
from .validate import validate

__all__ = [
    "Add", "Agg", "And", "Apply", "Assignment", "BernoulliExpr", "Cmp",
    "Const", "Cpf", "Div", "DomainAst", "DuplicateAssignmentError", "Expr",
    "If", "Implies", "InstanceAst", "KronDeltaExpr", "LexicalError", "Mul",
    "Neg", "Not", "Or", "PVariable", "Quant", "RddlError", "RddlSyntaxError",
    "Sub", "TypedModel", "UnsupportedConstructError", "ValidationError",
    "domain_to_str", "expr_to_str", "instance_to_str", "parse_domain",
    "parse_expression", "parse_instance", "validate",
]
