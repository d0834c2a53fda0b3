"""Execution of ground RDDL dynamics.

Ground expressions compile once into nested closures; a step evaluates the
reward on the current state and action, then samples every next-state
variable independently from its realized distribution.  Randomness comes
from counter-based Philox streams, so distinct (seed, stream) pairs are
independent and a fixed pair replays the same trajectory bit for bit.
"""

from __future__ import annotations

from typing import Callable, IO, Optional, Union

import numpy as np

from .grounding import GroundAction, GroundMdp
from .rddl.ast import (
    Add, And, Apply, BernoulliExpr, Cmp, Const, Div, Expr, If, Implies,
    KronDeltaExpr, Mul, Neg, Not, Or, Sub,
)


class SimulationError(Exception):
    pass


class RngStream:
    """Counter-based random stream keyed by (seed, stream id)."""

    def __init__(self, seed: int, stream: int = 0):
        self.seed = seed
        self.stream = stream
        self._gen = np.random.Generator(np.random.Philox(key=[seed, stream]))

    def random(self) -> float:
        return float(self._gen.random())

    def integers(self, n: int) -> int:
        return int(self._gen.integers(n))

    def choice_weighted(self, probs: np.ndarray) -> int:
        u = self._gen.random()
        return int(np.searchsorted(np.cumsum(probs), u, side="right").clip(0, len(probs) - 1))


_EvalFn = Callable[[np.ndarray, int], float]

_CMP_FNS = {
    "==": lambda a, b: a == b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def _compile(expr: Expr, mdp: GroundMdp) -> _EvalFn:
    if isinstance(expr, Const):
        value = float(expr.value)
        return lambda s, a: value
    if isinstance(expr, Apply):
        key = (expr.name, expr.args)
        if key in mdp.var_index:
            idx = mdp.var_index[key]
            return lambda s, a: float(s[idx])
        if key in mdp.action_index:
            aidx = mdp.action_index[key]
            return lambda s, a: 1.0 if a == aidx else 0.0
        raise SimulationError(f"unresolved application {expr.name}{expr.args}")
    if isinstance(expr, Not):
        item = _compile(expr.item, mdp)
        return lambda s, a: 0.0 if item(s, a) else 1.0
    if isinstance(expr, And):
        items = tuple(_compile(e, mdp) for e in expr.items)
        return lambda s, a: 1.0 if all(f(s, a) for f in items) else 0.0
    if isinstance(expr, Or):
        items = tuple(_compile(e, mdp) for e in expr.items)
        return lambda s, a: 1.0 if any(f(s, a) for f in items) else 0.0
    if isinstance(expr, Implies):
        lhs = _compile(expr.lhs, mdp)
        rhs = _compile(expr.rhs, mdp)
        return lambda s, a: 1.0 if (not lhs(s, a)) or rhs(s, a) else 0.0
    if isinstance(expr, Cmp):
        lhs = _compile(expr.lhs, mdp)
        rhs = _compile(expr.rhs, mdp)
        op = _CMP_FNS[expr.op]
        return lambda s, a: 1.0 if op(lhs(s, a), rhs(s, a)) else 0.0
    if isinstance(expr, Add):
        items = tuple(_compile(e, mdp) for e in expr.items)
        return lambda s, a: sum(f(s, a) for f in items)
    if isinstance(expr, Sub):
        lhs = _compile(expr.lhs, mdp)
        rhs = _compile(expr.rhs, mdp)
        return lambda s, a: lhs(s, a) - rhs(s, a)
    if isinstance(expr, Mul):
        items = tuple(_compile(e, mdp) for e in expr.items)

        def product(s, a):
            out = 1.0
            for f in items:
                out *= f(s, a)
            return out

        return product
    if isinstance(expr, Div):
        lhs = _compile(expr.lhs, mdp)
        rhs = _compile(expr.rhs, mdp)

        def divide(s, a):
            d = rhs(s, a)
            if d == 0.0:
                raise SimulationError("division by zero while evaluating")
            return lhs(s, a) / d

        return divide
    if isinstance(expr, Neg):
        item = _compile(expr.item, mdp)
        return lambda s, a: -item(s, a)
    if isinstance(expr, If):
        cond = _compile(expr.cond, mdp)
        then = _compile(expr.then, mdp)
        orelse = _compile(expr.orelse, mdp)
        return lambda s, a: then(s, a) if cond(s, a) else orelse(s, a)
    if isinstance(expr, BernoulliExpr):
        return _compile(expr.param, mdp)
    if isinstance(expr, KronDeltaExpr):
        return _compile(expr.item, mdp)
    raise TypeError(f"not a ground Expr: {expr!r}")


def _action_index(action: Union[GroundAction, int]) -> int:
    return action.index if isinstance(action, GroundAction) else int(action)


class Simulator:
    """Compiled dynamics of one ground MDP."""

    def __init__(self, mdp: GroundMdp):
        self.mdp = mdp
        self.stochastic = tuple(isinstance(cpf, BernoulliExpr) for cpf in mdp.cpfs)
        self._cpf_fns = tuple(_compile(cpf, mdp) for cpf in mdp.cpfs)
        self._reward_fn = _compile(mdp.reward, mdp)
        self._expr_cache: dict[int, tuple[Expr, _EvalFn]] = {}

    def initial_state(self) -> np.ndarray:
        return self.mdp.s0.copy()

    def eval_expr(self, expr: Expr, state: np.ndarray,
                  action: Union[GroundAction, int]) -> float:
        """Value of a ground expression; a Bernoulli root yields its parameter."""
        cached = self._expr_cache.get(id(expr))
        if cached is None or cached[0] is not expr:
            cached = (expr, _compile(expr, mdp=self.mdp))
            self._expr_cache[id(expr)] = cached
        return cached[1](state, _action_index(action))

    def cpf_param(self, var_index: int, state: np.ndarray,
                  action: Union[GroundAction, int]) -> float:
        """Probability that the variable comes up true in the next state."""
        value = self._cpf_fns[var_index](state, _action_index(action))
        if self.stochastic[var_index]:
            if -1e-9 <= value < 0.0:
                value = 0.0
            elif 1.0 < value <= 1.0 + 1e-9:
                value = 1.0
            if not 0.0 <= value <= 1.0:
                raise SimulationError(
                    f"Bernoulli parameter {value} outside [0, 1] for "
                    f"{self.mdp.state_vars[var_index].name}")
            return value
        return 1.0 if value > 0.5 else 0.0

    def reward(self, state: np.ndarray,
               action: Union[GroundAction, int]) -> float:
        value = self._reward_fn(state, _action_index(action))
        if not np.isfinite(value):
            raise SimulationError(f"non-finite reward {value}")
        return float(value)

    def step(self, state: np.ndarray, action: Union[GroundAction, int],
             rng: RngStream) -> tuple[np.ndarray, float]:
        """Sample the next state; the reward is earned on (state, action)."""
        aidx = _action_index(action)
        reward = self.reward(state, aidx)
        nxt = np.empty_like(state)
        for i, fn in enumerate(self._cpf_fns):
            if self.stochastic[i]:
                nxt[i] = rng.random() < self.cpf_param(i, state, aidx)
            else:
                nxt[i] = fn(state, aidx) > 0.5
        return nxt, reward

    def rollout(self, policy: Callable[[np.ndarray], Union[GroundAction, int]],
                rng: RngStream, horizon: Optional[int] = None,
                discount: Optional[float] = None,
                log: Optional[IO[str]] = None) -> float:
        """Discounted return of one episode from the start state."""
        horizon = self.mdp.horizon if horizon is None else horizon
        discount = self.mdp.discount if discount is None else discount
        state = self.initial_state()
        total = 0.0
        weight = 1.0
        for t in range(horizon):
            action = policy(state)
            nxt, reward = self.step(state, action, rng)
            total += weight * reward
            weight *= discount
            if log is not None:
                aidx = _action_index(action)
                changed = ",".join(
                    self.mdp.state_vars[i].name
                    for i in np.flatnonzero(state != nxt))
                log.write(f"{t}\t{self.mdp.actions[aidx].name}\t{reward}\t{changed}\n")
            state = nxt
        return total
