"""Naive recursive evaluator for ground expressions.

Deliberately independent of the package's compiled evaluation path so tests
can use it as an oracle: plain tree walking, no caching, no closures.
"""

from __future__ import annotations

import numpy as np

from relplan.grounding import GroundMdp
from relplan.rddl.ast import (
    Add, And, Apply, BernoulliExpr, Cmp, Const, Div, Expr, If, Implies,
    KronDeltaExpr, Mul, Neg, Not, Or, Sub,
)

_CMP = {
    "==": lambda a, b: a == b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def eval_ground(expr: Expr, mdp: GroundMdp, state: np.ndarray,
                action_index: int) -> float:
    """Value of a ground expression; Bernoulli yields its parameter."""

    def go(node: Expr) -> float:
        if isinstance(node, Const):
            return float(node.value)
        if isinstance(node, Apply):
            key = (node.name, node.args)
            if key in mdp.var_index:
                return float(state[mdp.var_index[key]])
            if key in mdp.action_index:
                return float(mdp.action_index[key] == action_index)
            raise KeyError(key)
        if isinstance(node, Not):
            return float(not go(node.item))
        if isinstance(node, And):
            return float(all(go(item) for item in node.items))
        if isinstance(node, Or):
            return float(any(go(item) for item in node.items))
        if isinstance(node, Implies):
            return float((not go(node.lhs)) or go(node.rhs))
        if isinstance(node, Cmp):
            return float(_CMP[node.op](go(node.lhs), go(node.rhs)))
        if isinstance(node, Add):
            return sum(go(item) for item in node.items)
        if isinstance(node, Sub):
            return go(node.lhs) - go(node.rhs)
        if isinstance(node, Mul):
            out = 1.0
            for item in node.items:
                out *= go(item)
            return out
        if isinstance(node, Div):
            return go(node.lhs) / go(node.rhs)
        if isinstance(node, Neg):
            return -go(node.item)
        if isinstance(node, If):
            return go(node.then) if go(node.cond) else go(node.orelse)
        if isinstance(node, BernoulliExpr):
            return go(node.param)
        if isinstance(node, KronDeltaExpr):
            return go(node.item)
        raise TypeError(f"not a ground Expr: {node!r}")

    return go(expr)
