"""Policy evaluation: seeded greedy rollouts, random baseline, normalized metrics."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from .grounding import GroundMdp, ground
from .model import FingerprintMismatch, PolicyNetwork, domain_fingerprint
from .rddl.ast import TypedModel
from .simulator import RngStream, Simulator


@dataclass
class EvalReport:
    instance: str
    policy: str
    mean_return: float
    std_error: float
    n_rollouts: int
    seed: int
    discounted: bool
    v_min: Optional[float] = None
    v_max: Optional[float] = None
    alpha: Optional[float] = None

    def to_dict(self) -> dict:
        data = {
            "instance": self.instance, "policy": self.policy,
            "mean_return": self.mean_return, "std_error": self.std_error,
            "n_rollouts": self.n_rollouts, "seed": self.seed,
            "discounted": self.discounted,
        }
        if self.v_min is not None:
            data.update(v_min=self.v_min, v_max=self.v_max, alpha=self.alpha)
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def format_table(self) -> str:
        rows = [("instance", self.instance), ("policy", self.policy),
                ("mean return", f"{self.mean_return:.6f}"),
                ("std error", f"{self.std_error:.6f}"),
                ("rollouts", str(self.n_rollouts)), ("seed", str(self.seed)),
                ("discounted", str(self.discounted).lower())]
        if self.alpha is not None:
            rows += [("v_min", f"{self.v_min:.6f}"), ("v_max", f"{self.v_max:.6f}"),
                     ("alpha", f"{self.alpha:.6f}")]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def _run_rollouts(sim: Simulator, policy: Callable[[np.ndarray], int],
                  n_rollouts: int, seed: int, discounted: bool) -> np.ndarray:
    discount = None if discounted else 1.0
    return np.array([
        sim.rollout(policy, RngStream(seed, i), discount=discount)
        for i in range(n_rollouts)])


def _report(name: str, policy_name: str, returns: np.ndarray, seed: int,
            discounted: bool, baselines: Optional[dict] = None) -> EvalReport:
    std_error = float(returns.std(ddof=1) / math.sqrt(len(returns))
                      ) if len(returns) > 1 else 0.0
    report = EvalReport(
        instance=name, policy=policy_name, mean_return=float(returns.mean()),
        std_error=std_error, n_rollouts=len(returns), seed=seed,
        discounted=discounted)
    if baselines and name in baselines:
        entry = baselines[name]
        report.v_min = float(entry["v_min"])
        report.v_max = float(entry["v_max"])
        report.alpha = alpha(report.mean_return, report.v_min, report.v_max)
    return report


def evaluate(network: PolicyNetwork, model: TypedModel,
             mdp: Optional[GroundMdp] = None, n_rollouts: int = 200,
             seed: int = 0, discounted: bool = True,
             baselines: Optional[dict] = None) -> EvalReport:
    """Mean discounted return of the greedy policy over seeded rollouts."""
    if n_rollouts < 1:
        raise ValueError("need at least one rollout")
    if network.fingerprint != domain_fingerprint(model.domain):
        raise FingerprintMismatch(
            "checkpoint fingerprint does not match the instance's domain")
    mdp = mdp if mdp is not None else ground(model)
    sim = Simulator(mdp)
    policy = network.bind(mdp).greedy_policy()
    returns = _run_rollouts(sim, policy, n_rollouts, seed, discounted)
    return _report(model.instance.name, "greedy", returns, seed, discounted,
                   baselines)


def random_baseline(model: TypedModel, mdp: Optional[GroundMdp] = None,
                    n_rollouts: int = 200, seed: int = 0,
                    discounted: bool = True,
                    baselines: Optional[dict] = None) -> EvalReport:
    """Uniform policy over every ground action, noop included."""
    mdp = mdp if mdp is not None else ground(model)
    sim = Simulator(mdp)
    n_actions = len(mdp.actions)

    returns = np.empty(n_rollouts)
    for i in range(n_rollouts):
        rng = RngStream(seed, i)
        discount = None if discounted else 1.0
        returns[i] = sim.rollout(lambda s: rng.integers(n_actions), rng,
                                 discount=discount)
    return _report(model.instance.name, "random", returns, seed, discounted,
                   baselines)


def alpha(v_alg: float, v_min: float, v_max: float) -> float:
    """Position of a value in the [v_min, v_max] band (0 = floor, 1 = best)."""
    if v_max == v_min:
        raise ValueError("v_max must differ from v_min")
    return (v_alg - v_min) / (v_max - v_min)


def beta(alpha_reference: float, alpha_alg: float) -> float:
    """Ratio of the reference alpha to a competitor's; inf when the
    competitor sits at the minimum (rendered as the INF token)."""
    if alpha_alg == 0.0:
        return math.inf
    return alpha_reference / alpha_alg


def format_beta(value: float) -> str:
    return "INF" if math.isinf(value) else f"{value:.2f}"


def load_baselines(path: Union[str, Path]) -> dict:
    """Baseline manifest: {instance_id: {"v_min": float, "v_max": float}}."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    for name, entry in data.items():
        if "v_min" not in entry or "v_max" not in entry:
            raise ValueError(f"baseline entry {name!r} needs v_min and v_max")
    return data
