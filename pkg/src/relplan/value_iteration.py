"""Exact finite-horizon solver for small ground MDPs.

Enumerates the full boolean state space (capped at 2^20 states), builds each
(state, action) successor distribution exactly from the CPF Bernoulli
parameters, and runs backward induction in float64.  Meant as an optimality
oracle for tests and normalized metrics, not as a planner.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grounding import GroundMdp, extract_dbn
from .simulator import Simulator

MAX_STATES = 2 ** 20


class OracleError(Exception):
    pass


@dataclass
class OracleResult:
    optimal_value: float        # V*(s0)
    values: np.ndarray          # stage-0 value of every state
    greedy: np.ndarray          # (horizon, n_states) optimal action indices
    n_states: int
    horizon: int
    discount: float

    def greedy_action(self, state_index: int, stage: int = 0) -> int:
        return int(self.greedy[stage, state_index])


def state_to_index(state: np.ndarray) -> int:
    k = len(state)
    weights = 1 << np.arange(k, dtype=np.int64)
    return int(weights[np.asarray(state, dtype=bool)].sum())


def _bits_matrix(width: int) -> np.ndarray:
    """(2^width, width) boolean enumeration, column i is bit i."""
    span = np.arange(2 ** width, dtype=np.int64)
    return (span[:, None] >> np.arange(width)) & 1


def value_iteration(mdp: GroundMdp) -> OracleResult:
    """Backward induction: V_H = 0, V_t = max_a E[r + discount * V_{t+1}]."""
    k = len(mdp.state_vars)
    if 2 ** k > MAX_STATES:
        raise OracleError(
            f"state space 2^{k} exceeds the 2^20 enumerable-state cap")
    n_states = 2 ** k
    n_actions = len(mdp.actions)
    sim = Simulator(mdp)
    dbn = extract_dbn(mdp)
    affected = [
        [entry.var_index for entry in dbn.entries
         if action.index in entry.action_deps]
        for action in mdp.actions]
    weights = (1 << np.arange(k, dtype=np.int64)) if k else np.zeros(0, np.int64)
    state_bits = _bits_matrix(k).astype(bool) if k else np.zeros((1, 0), bool)

    # successor lists per (state, action), flattened row-major
    succ_idx: list[np.ndarray] = []
    succ_prob: list[np.ndarray] = []
    lengths = np.empty(n_states * n_actions, dtype=np.int64)
    rewards = np.empty((n_states, n_actions))
    combo_cache: dict[int, np.ndarray] = {}
    for s in range(n_states):
        state = state_bits[s]
        base = np.array([sim.cpf_param(i, state, 0) for i in range(k)])
        for action in mdp.actions:
            rewards[s, action.index] = sim.reward(state, action.index)
            params = base
            if affected[action.index]:
                params = base.copy()
                for i in affected[action.index]:
                    params[i] = sim.cpf_param(i, state, action.index)
            stochastic = np.flatnonzero((params > 0.0) & (params < 1.0))
            det_index = int(weights[params >= 1.0].sum())
            pair = s * n_actions + action.index
            if stochastic.size == 0:
                succ_idx.append(np.array([det_index], dtype=np.int64))
                succ_prob.append(np.ones(1))
                lengths[pair] = 1
                continue
            m = stochastic.size
            combos = combo_cache.get(m)
            if combos is None:
                combos = _bits_matrix(m)
                combo_cache[m] = combos
            p = params[stochastic]
            probs = np.prod(np.where(combos.astype(bool), p, 1.0 - p), axis=1)
            indices = det_index + combos @ weights[stochastic]
            succ_idx.append(indices.astype(np.int64))
            succ_prob.append(probs)
            lengths[pair] = len(indices)

    flat_idx = np.concatenate(succ_idx)
    flat_prob = np.concatenate(succ_prob)
    offsets = np.zeros(len(lengths), dtype=np.int64)
    np.cumsum(lengths[:-1], out=offsets[1:])

    values = np.zeros(n_states)
    greedy = np.zeros((mdp.horizon, n_states), dtype=np.int64)
    for stage in range(mdp.horizon - 1, -1, -1):
        expected = np.add.reduceat(flat_prob * values[flat_idx], offsets)
        q = rewards + mdp.discount * expected.reshape(n_states, n_actions)
        greedy[stage] = q.argmax(axis=1)
        values = q.max(axis=1)

    s0_index = int(weights[mdp.s0.astype(bool)].sum()) if k else 0
    return OracleResult(
        optimal_value=float(values[s0_index]), values=values, greedy=greedy,
        n_states=n_states, horizon=mdp.horizon, discount=mdp.discount)
