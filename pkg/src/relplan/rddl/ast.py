"""Typed AST for the supported RDDL subset.

Terms inside pvariable applications are plain strings: a leading ``?`` marks
a parameter variable, anything else is an object name.  Source positions are
carried for diagnostics but excluded from structural equality so that
parse -> print -> parse round-trips compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

BOOL = "bool"
REAL = "real"

STATE_FLUENT = "state-fluent"
NON_FLUENT = "non-fluent"
ACTION_FLUENT = "action-fluent"


@dataclass(frozen=True)
class Pos:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: Union[bool, float]
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class Apply:
    """Pvariable application: symbol over terms (objects or ?variables)."""

    name: str
    args: tuple[str, ...] = ()
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class Not:
    item: "Expr"
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class And:
    """N-ary conjunction; chains of ^ are flattened by the parser."""

    items: tuple["Expr", ...]
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class Or:
    items: tuple["Expr", ...]
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class Implies:
    lhs: "Expr"
    rhs: "Expr"
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class Cmp:
    op: str  # one of ==, <, <=, >, >=
    lhs: "Expr"
    rhs: "Expr"
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class Add:
    """N-ary sum; + chains are flattened."""

    items: tuple["Expr", ...]
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class Sub:
    lhs: "Expr"
    rhs: "Expr"
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class Mul:
    items: tuple["Expr", ...]
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class Div:
    lhs: "Expr"
    rhs: "Expr"
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class Neg:
    item: "Expr"
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class If:
    cond: "Expr"
    then: "Expr"
    orelse: "Expr"
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class Quant:
    """forall_/exists_ over one or more typed variables."""

    kind: str  # "forall" | "exists"
    variables: tuple[tuple[str, str], ...]  # (?var, class)
    body: "Expr"
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class Agg:
    """sum_/prod_ aggregation over one or more typed variables."""

    kind: str  # "sum" | "prod"
    variables: tuple[tuple[str, str], ...]
    body: "Expr"
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class BernoulliExpr:
    param: "Expr"
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class KronDeltaExpr:
    item: "Expr"
    pos: Optional[Pos] = field(default=None, compare=False)


Expr = Union[
    Const, Apply, Not, And, Or, Implies, Cmp,
    Add, Sub, Mul, Div, Neg, If, Quant, Agg,
    BernoulliExpr, KronDeltaExpr,
]

DISTRIBUTION_NODES = (BernoulliExpr, KronDeltaExpr)


def children(expr: Expr) -> tuple[Expr, ...]:
    """Immediate sub-expressions, in source order."""
    if isinstance(expr, (Const, Apply)):
        return ()
    if isinstance(expr, (Not, Neg)):
        return (expr.item,)
    if isinstance(expr, (And, Or, Add, Mul)):
        return expr.items
    if isinstance(expr, (Implies, Cmp, Sub, Div)):
        return (expr.lhs, expr.rhs)
    if isinstance(expr, If):
        return (expr.cond, expr.then, expr.orelse)
    if isinstance(expr, (Quant, Agg)):
        return (expr.body,)
    if isinstance(expr, BernoulliExpr):
        return (expr.param,)
    if isinstance(expr, KronDeltaExpr):
        return (expr.item,)
    raise TypeError(f"not an Expr: {expr!r}")


def walk(expr: Expr):
    """Yield every node of the expression tree, pre-order."""
    stack = [expr]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def is_var(term: str) -> bool:
    return term.startswith("?")


# ---------------------------------------------------------------------------
# Declarations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PVariable:
    name: str
    kind: str  # STATE_FLUENT | NON_FLUENT | ACTION_FLUENT
    param_types: tuple[str, ...]
    range: str  # BOOL | REAL
    default: Union[bool, float]
    pos: Optional[Pos] = field(default=None, compare=False)

    @property
    def arity(self) -> int:
        return len(self.param_types)


@dataclass(frozen=True)
class Cpf:
    """Transition template: <fluent>'(?vars) = expr."""

    name: str
    params: tuple[str, ...]
    expr: Expr
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class DomainAst:
    name: str
    classes: tuple[str, ...]
    pvariables: tuple[PVariable, ...]
    cpfs: tuple[Cpf, ...]
    reward: Expr
    max_nondef_actions: Optional[int] = None  # None means unbounded

    def pvar(self, name: str) -> Optional[PVariable]:
        for pv in self.pvariables:
            if pv.name == name:
                return pv
        return None

    def fluents(self) -> tuple[PVariable, ...]:
        return tuple(p for p in self.pvariables if p.kind == STATE_FLUENT)

    def non_fluents(self) -> tuple[PVariable, ...]:
        return tuple(p for p in self.pvariables if p.kind == NON_FLUENT)

    def actions(self) -> tuple[PVariable, ...]:
        return tuple(p for p in self.pvariables if p.kind == ACTION_FLUENT)


@dataclass(frozen=True)
class Assignment:
    name: str
    args: tuple[str, ...]
    value: Union[bool, float]
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class InstanceAst:
    name: str
    domain_name: str
    objects: tuple[tuple[str, tuple[str, ...]], ...]  # (class, object names)
    non_fluent_assignments: tuple[Assignment, ...]
    init_state: tuple[Assignment, ...]
    horizon: int
    discount: float
    max_nondef_actions: Optional[int] = None

    def objects_of(self, cls: str) -> tuple[str, ...]:
        for name, objs in self.objects:
            if name == cls:
                return objs
        return ()


@dataclass(frozen=True)
class TypedModel:
    """A cross-validated (domain, instance) pair."""

    domain: DomainAst
    instance: InstanceAst
