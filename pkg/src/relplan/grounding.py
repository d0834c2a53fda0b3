"""Grounding: expand a typed model into an explicit MDP plus its DBN structure.

Quantifiers and aggregations are unrolled over the instance objects,
non-fluent applications are replaced by their constant values, and every
ground expression is constant-folded to fixpoint.  Folding is what makes
differently encoded but equivalent non-fluent structure converge to the same
dependency graph, so it runs before any dependency extraction.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .rddl import ast
from .rddl.ast import (
    Add, Agg, And, Apply, BernoulliExpr, Cmp, Const, Div, Expr, If, Implies,
    KronDeltaExpr, Mul, Neg, Not, Or, Quant, Sub, TypedModel,
)

ObjTuple = tuple[str, ...]

NOOP_NAME = "noop"


class GroundingError(Exception):
    pass


@dataclass(frozen=True)
class GroundStateVar:
    symbol: str
    args: ObjTuple
    index: int

    @property
    def name(self) -> str:
        return f"{self.symbol}({', '.join(self.args)})" if self.args else self.symbol


@dataclass(frozen=True)
class GroundAction:
    symbol: Optional[str]  # None for the noop sentinel
    args: ObjTuple
    index: int

    @property
    def is_noop(self) -> bool:
        return self.symbol is None

    @property
    def name(self) -> str:
        if self.symbol is None:
            return NOOP_NAME
        return f"{self.symbol}({', '.join(self.args)})" if self.args else self.symbol


@dataclass(frozen=True)
class DbnEntry:
    """Exact syntactic dependencies of one next-state variable."""

    var_index: int
    state_deps: tuple[int, ...]
    action_deps: tuple[int, ...]


@dataclass(frozen=True)
class Dbn:
    entries: tuple[DbnEntry, ...]


@dataclass
class GroundMdp:
    model: TypedModel
    state_vars: tuple[GroundStateVar, ...]
    actions: tuple[GroundAction, ...]
    cpfs: tuple[Expr, ...]  # aligned with state_vars
    reward: Expr
    s0: np.ndarray  # bool, aligned with state_vars
    horizon: int
    discount: float
    max_nondef_actions: Optional[int]
    fluent_tuples: tuple[ObjTuple, ...]      # O_f
    nonfluent_tuples: tuple[ObjTuple, ...]   # O_nf
    action_tuples: tuple[ObjTuple, ...]      # O_a
    nonfluent_values: dict[tuple[str, ObjTuple], Union[bool, float]]
    var_index: dict[tuple[str, ObjTuple], int] = field(default_factory=dict)
    action_index: dict[tuple[str, ObjTuple], int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.var_index:
            self.var_index = {(v.symbol, v.args): v.index for v in self.state_vars}
        if not self.action_index:
            self.action_index = {
                (a.symbol, a.args): a.index for a in self.actions if a.symbol}

    @property
    def noop(self) -> GroundAction:
        return self.actions[0]

    def to_dict(self) -> dict:
        """Structured form used by the dump-mdp debug output."""
        dbn = extract_dbn(self)
        return {
            "domain": self.model.domain.name,
            "instance": self.model.instance.name,
            "horizon": self.horizon,
            "discount": self.discount,
            "state_vars": [
                {"index": v.index, "name": v.name, "symbol": v.symbol,
                 "args": list(v.args)}
                for v in self.state_vars],
            "actions": [
                {"index": a.index, "name": a.name,
                 "symbol": a.symbol or NOOP_NAME, "args": list(a.args)}
                for a in self.actions],
            "object_tuples": {
                "fluent": [list(t) for t in self.fluent_tuples],
                "non_fluent": [list(t) for t in self.nonfluent_tuples],
                "action": [list(t) for t in self.action_tuples],
            },
            "dependencies": {
                self.state_vars[e.var_index].name: {
                    "state_vars": [self.state_vars[i].name for i in e.state_deps],
                    "actions": [self.actions[i].name for i in e.action_deps],
                }
                for e in dbn.entries},
        }

    def dump_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


# ---------------------------------------------------------------------------
# constant folding
# ---------------------------------------------------------------------------

def _truthy(value: Union[bool, float]) -> bool:
    return bool(value)


def _num(value: Union[bool, float]) -> float:
    return float(value)


_CMP = {
    "==": lambda a, b: a == b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def fold(expr: Expr) -> Expr:
    """Fold constants to fixpoint; algebraic identities prune dead operands.

    Raises :class:`GroundingError` for division by a literal zero, the one
    way a ground expression can be statically undefined in this subset.
    """
    if isinstance(expr, (Const, Apply)):
        return expr
    if isinstance(expr, Not):
        item = fold(expr.item)
        if isinstance(item, Const):
            return Const(not _truthy(item.value))
        if isinstance(item, Not):
            return item.item
        return Not(item)
    if isinstance(expr, (And, Or)):
        is_and = isinstance(expr, And)
        items: list[Expr] = []
        for raw in expr.items:
            item = fold(raw)
            if isinstance(item, type(expr)):  # re-flatten after folding
                sub_items: tuple = item.items
            else:
                sub_items = (item,)
            for sub in sub_items:
                if isinstance(sub, Const):
                    if _truthy(sub.value) != is_and:
                        return Const(not is_and)
                    continue  # identity element
                items.append(sub)
        if not items:
            return Const(is_and)
        if len(items) == 1:
            return items[0]
        return And(tuple(items)) if is_and else Or(tuple(items))
    if isinstance(expr, Implies):
        lhs = fold(expr.lhs)
        rhs = fold(expr.rhs)
        if isinstance(lhs, Const):
            return rhs if _truthy(lhs.value) else Const(True)
        if isinstance(rhs, Const):
            return Const(True) if _truthy(rhs.value) else fold(Not(lhs))
        return Implies(lhs, rhs)
    if isinstance(expr, Cmp):
        lhs = fold(expr.lhs)
        rhs = fold(expr.rhs)
        if isinstance(lhs, Const) and isinstance(rhs, Const):
            return Const(_CMP[expr.op](_num(lhs.value), _num(rhs.value)))
        return Cmp(expr.op, lhs, rhs)
    if isinstance(expr, (Add, Mul)):
        is_add = isinstance(expr, Add)
        identity = 0.0 if is_add else 1.0
        acc = identity
        items = []
        for raw in expr.items:
            item = fold(raw)
            if isinstance(item, type(expr)):
                sub_items = item.items
            else:
                sub_items = (item,)
            for sub in sub_items:
                if isinstance(sub, Const):
                    if is_add:
                        acc += _num(sub.value)
                    else:
                        acc *= _num(sub.value)
                else:
                    items.append(sub)
        if not is_add and acc == 0.0:
            return Const(0.0)
        if not items:
            return Const(acc)
        if acc != identity:
            items = [Const(acc)] + items
        if len(items) == 1:
            return items[0]
        return Add(tuple(items)) if is_add else Mul(tuple(items))
    if isinstance(expr, Sub):
        lhs = fold(expr.lhs)
        rhs = fold(expr.rhs)
        if isinstance(lhs, Const) and isinstance(rhs, Const):
            return Const(_num(lhs.value) - _num(rhs.value))
        if isinstance(rhs, Const) and _num(rhs.value) == 0.0:
            return lhs
        if isinstance(lhs, Const) and _num(lhs.value) == 0.0:
            return fold(Neg(rhs))
        return Sub(lhs, rhs)
    if isinstance(expr, Div):
        lhs = fold(expr.lhs)
        rhs = fold(expr.rhs)
        if isinstance(rhs, Const):
            if _num(rhs.value) == 0.0:
                raise GroundingError("division by literal zero after folding")
            if isinstance(lhs, Const):
                return Const(_num(lhs.value) / _num(rhs.value))
            if _num(rhs.value) == 1.0:
                return lhs
        return Div(lhs, rhs)
    if isinstance(expr, Neg):
        item = fold(expr.item)
        if isinstance(item, Const):
            return Const(-_num(item.value))
        if isinstance(item, Neg):
            return item.item
        return Neg(item)
    if isinstance(expr, If):
        cond = fold(expr.cond)
        if isinstance(cond, Const):
            return fold(expr.then) if _truthy(cond.value) else fold(expr.orelse)
        return If(cond, fold(expr.then), fold(expr.orelse))
    if isinstance(expr, BernoulliExpr):
        return BernoulliExpr(fold(expr.param))
    if isinstance(expr, KronDeltaExpr):
        return KronDeltaExpr(fold(expr.item))
    if isinstance(expr, (Quant, Agg)):
        return type(expr)(expr.kind, expr.variables, fold(expr.body))
    raise TypeError(f"not an Expr: {expr!r}")


# ---------------------------------------------------------------------------
# substitution and expansion
# ---------------------------------------------------------------------------

def _substitute(expr: Expr, env: dict[str, str],
                objects_by_class: dict[str, tuple[str, ...]],
                nf_values: dict[tuple[str, ObjTuple], Union[bool, float]],
                nf_names: frozenset[str]) -> Expr:
    """Bind parameter variables, unroll quantifiers, fold non-fluents away."""
    if isinstance(expr, Const):
        return expr
    if isinstance(expr, Apply):
        args = tuple(env.get(a, a) for a in expr.args)
        if expr.name in nf_names:
            return Const(nf_values[(expr.name, args)])
        return Apply(expr.name, args)
    if isinstance(expr, (Quant, Agg)):
        domains = [objects_by_class.get(cls, ()) for _, cls in expr.variables]
        names = [var for var, _ in expr.variables]
        bodies: list[Expr] = []
        for combo in itertools.product(*domains):
            inner = dict(env)
            inner.update(zip(names, combo))
            bodies.append(_substitute(expr.body, inner, objects_by_class,
                                      nf_values, nf_names))
        if isinstance(expr, Quant):
            if expr.kind == "forall":
                return And(tuple(bodies)) if bodies else Const(True)
            return Or(tuple(bodies)) if bodies else Const(False)
        if expr.kind == "sum":
            return Add(tuple(bodies)) if bodies else Const(0.0)
        return Mul(tuple(bodies)) if bodies else Const(1.0)
    kids = tuple(_substitute(child, env, objects_by_class, nf_values, nf_names)
                 for child in ast.children(expr))
    if isinstance(expr, Not):
        return Not(kids[0])
    if isinstance(expr, Neg):
        return Neg(kids[0])
    if isinstance(expr, (And, Or, Add, Mul)):
        return type(expr)(kids)
    if isinstance(expr, Implies):
        return Implies(kids[0], kids[1])
    if isinstance(expr, Cmp):
        return Cmp(expr.op, kids[0], kids[1])
    if isinstance(expr, Sub):
        return Sub(kids[0], kids[1])
    if isinstance(expr, Div):
        return Div(kids[0], kids[1])
    if isinstance(expr, If):
        return If(kids[0], kids[1], kids[2])
    if isinstance(expr, BernoulliExpr):
        return BernoulliExpr(kids[0])
    if isinstance(expr, KronDeltaExpr):
        return KronDeltaExpr(kids[0])
    raise TypeError(f"not an Expr: {expr!r}")


def _type_consistent_tuples(param_types: tuple[str, ...],
                            objects_by_class: dict[str, tuple[str, ...]],
                            ) -> list[ObjTuple]:
    domains = [objects_by_class.get(cls, ()) for cls in param_types]
    return [tuple(combo) for combo in itertools.product(*domains)]


# ---------------------------------------------------------------------------
# grounding
# ---------------------------------------------------------------------------

def ground(model: TypedModel) -> GroundMdp:
    """Expand a validated model into an explicit ground MDP.

    Orderings are canonical: state variables sorted by (symbol, argument
    tuple), actions likewise after the reserved noop at index 0.  Identical
    models therefore ground to identical indices.
    """
    domain = model.domain
    instance = model.instance
    objects_by_class = {cls: members for cls, members in instance.objects}

    nf_values: dict[tuple[str, ObjTuple], Union[bool, float]] = {}
    for pv in domain.non_fluents():
        for args in _type_consistent_tuples(pv.param_types, objects_by_class):
            nf_values[(pv.name, args)] = pv.default
    for assignment in instance.non_fluent_assignments:
        nf_values[(assignment.name, assignment.args)] = assignment.value
    nf_names = frozenset(pv.name for pv in domain.non_fluents())

    # state variables, canonically ordered
    var_specs: list[tuple[str, ObjTuple]] = []
    for pv in domain.fluents():
        for args in _type_consistent_tuples(pv.param_types, objects_by_class):
            var_specs.append((pv.name, args))
    var_specs.sort()
    state_vars = tuple(GroundStateVar(sym, args, i)
                       for i, (sym, args) in enumerate(var_specs))

    # ground actions: noop first, then sorted symbol instantiations
    action_specs: list[tuple[str, ObjTuple]] = []
    for pv in domain.actions():
        for args in _type_consistent_tuples(pv.param_types, objects_by_class):
            action_specs.append((pv.name, args))
    action_specs.sort()
    actions = [GroundAction(None, (), 0)]
    actions.extend(GroundAction(sym, args, i + 1)
                   for i, (sym, args) in enumerate(action_specs))

    # object tuple registries
    fluent_tuples = sorted({v.args for v in state_vars})
    nonfluent_tuples = sorted({args for (_, args) in nf_values})
    action_tuples = sorted({a.args for a in actions})

    # ground CPFs, aligned with state variables
    cpf_by_name = {cpf.name: cpf for cpf in domain.cpfs}
    cpfs = []
    for var in state_vars:
        template = cpf_by_name[var.symbol]
        env = dict(zip(template.params, var.args))
        expanded = _substitute(template.expr, env, objects_by_class,
                               nf_values, nf_names)
        cpfs.append(fold(expanded))

    reward = fold(_substitute(domain.reward, {}, objects_by_class,
                              nf_values, nf_names))

    # start state: defaults overridden by init-state
    defaults = {pv.name: pv.default for pv in domain.fluents()}
    s0 = np.array([bool(defaults[v.symbol]) for v in state_vars])
    init = {(a.name, a.args): a.value for a in instance.init_state}
    for var in state_vars:
        if (var.symbol, var.args) in init:
            s0[var.index] = bool(init[(var.symbol, var.args)])

    max_nondef = instance.max_nondef_actions
    if max_nondef is None:
        max_nondef = domain.max_nondef_actions

    return GroundMdp(
        model=model,
        state_vars=state_vars,
        actions=tuple(actions),
        cpfs=tuple(cpfs),
        reward=reward,
        s0=s0,
        horizon=instance.horizon,
        discount=instance.discount,
        max_nondef_actions=max_nondef,
        fluent_tuples=tuple(fluent_tuples),
        nonfluent_tuples=tuple(nonfluent_tuples),
        action_tuples=tuple(action_tuples),
        nonfluent_values=nf_values,
    )


# ---------------------------------------------------------------------------
# DBN extraction
# ---------------------------------------------------------------------------

def _collect_deps(expr: Expr, mdp: GroundMdp) -> tuple[tuple[int, ...], tuple[int, ...]]:
    state_deps: set[int] = set()
    action_deps: set[int] = set()
    for node in ast.walk(expr):
        if not isinstance(node, Apply):
            continue
        key = (node.name, node.args)
        if key in mdp.var_index:
            state_deps.add(mdp.var_index[key])
        elif key in mdp.action_index:
            action_deps.add(mdp.action_index[key])
        else:
            raise GroundingError(f"unresolved application {node.name}{node.args}")
    return tuple(sorted(state_deps)), tuple(sorted(action_deps))


def extract_dbn(mdp: GroundMdp) -> Dbn:
    """Exact syntactic dependency sets of each next-state variable.

    All branches of conditionals count: this is a sound over-approximation of
    semantic dependence on the folded CPFs.
    """
    entries = []
    for var, cpf in zip(mdp.state_vars, mdp.cpfs):
        state_deps, action_deps = _collect_deps(cpf, mdp)
        entries.append(DbnEntry(var.index, state_deps, action_deps))
    return Dbn(tuple(entries))


def affected_set(dbn: Dbn, mdp: GroundMdp, action: GroundAction,
                 ) -> tuple[GroundStateVar, ...]:
    """Next-state variables whose CPF mentions the given ground action."""
    if action.index < 0 or action.index >= len(mdp.actions):
        raise GroundingError(f"unknown action index {action.index}")
    if action.is_noop:
        return ()
    return tuple(mdp.state_vars[e.var_index] for e in dbn.entries
                 if action.index in e.action_deps)


def fold_under_action(mdp: GroundMdp, expr: Expr, action_index: int) -> Expr:
    """Fold a ground expression with every action variable pinned.

    The chosen action is substituted true and every other action false,
    matching one-non-default-action-per-step execution.  Used to recover the
    dependencies a CPF retains when a particular action is taken.
    """

    def pin(node: Expr) -> Expr:
        if isinstance(node, Apply):
            key = (node.name, node.args)
            if key in mdp.action_index:
                return Const(mdp.action_index[key] == action_index)
            return node
        if isinstance(node, Const):
            return node
        kids = tuple(pin(child) for child in ast.children(node))
        if isinstance(node, Not):
            return Not(kids[0])
        if isinstance(node, Neg):
            return Neg(kids[0])
        if isinstance(node, (And, Or, Add, Mul)):
            return type(node)(kids)
        if isinstance(node, Implies):
            return Implies(kids[0], kids[1])
        if isinstance(node, Cmp):
            return Cmp(node.op, kids[0], kids[1])
        if isinstance(node, Sub):
            return Sub(kids[0], kids[1])
        if isinstance(node, Div):
            return Div(kids[0], kids[1])
        if isinstance(node, If):
            return If(kids[0], kids[1], kids[2])
        if isinstance(node, BernoulliExpr):
            return BernoulliExpr(kids[0])
        if isinstance(node, KronDeltaExpr):
            return KronDeltaExpr(kids[0])
        raise TypeError(f"not a ground Expr: {node!r}")

    return fold(pin(expr))


def state_deps_under_action(mdp: GroundMdp, var_index: int,
                            action_index: int) -> tuple[int, ...]:
    """State variables the CPF still reads once the action is pinned."""
    conditioned = fold_under_action(mdp, mdp.cpfs[var_index], action_index)
    state_deps, _ = _collect_deps(conditioned, mdp)
    return state_deps
