"""Multi-task advantage actor-critic training of the generalized policy.

Workers cycle round-robin over the training instances, collect short
segments, and apply RMSProp updates to the shared parameter store.  One
worker with a fixed seed is bit-deterministic; more workers trade that for
wall-clock speed under the store's atomic-update contract.
"""

from __future__ import annotations

import logging
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Optional, Sequence, Union

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .grounding import ground
from .model import BoundInstance, ForwardResult, PolicyNetwork
from .params import NonFiniteGradError, OptimConfig, rmsprop_step
from .rddl.ast import TypedModel
from .simulator import RngStream, Simulator

logger = logging.getLogger(__name__)

LOG_PROB_FLOOR = 1e-30


class TrainingError(Exception):
    pass


@dataclass
class TrainConfig:
    total_steps: int
    workers: int = 4
    t_max: int = 20
    entropy_coef: float = 0.01
    value_loss_coef: float = 0.5
    optim: OptimConfig = field(default_factory=OptimConfig)
    seed: int = 0
    snapshot_every: int = 0  # env steps between periodic checkpoints, 0 = off

    def __post_init__(self) -> None:
        if self.total_steps <= 0:
            raise ValueError("total_steps must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.t_max < 1:
            raise ValueError("t_max must be >= 1")

    def to_dict(self) -> dict:
        return {
            "total_steps": self.total_steps, "workers": self.workers,
            "t_max": self.t_max, "entropy_coef": self.entropy_coef,
            "value_loss_coef": self.value_loss_coef, "seed": self.seed,
            "optim": self.optim.to_dict(),
        }


@dataclass
class TrajStep:
    result: ForwardResult
    action_index: int
    reward: float


@dataclass
class Trajectory:
    steps: list[TrajStep]
    bootstrap_value: float  # 0 when the episode terminated

    def __len__(self) -> int:
        return len(self.steps)


def n_step_returns(rewards: Sequence[float], discount: float,
                   bootstrap_value: float) -> list[float]:
    """R_t = r_t + discount * R_{t+1}, seeded with the bootstrap value."""
    returns = [0.0] * len(rewards)
    acc = bootstrap_value
    for t in range(len(rewards) - 1, -1, -1):
        acc = rewards[t] + discount * acc
        returns[t] = acc
    return returns


def a3c_loss(trajectory: Trajectory, discount: float, config: TrainConfig,
             advantages: Optional[Sequence[float]] = None) -> Tensor:
    """Policy gradient + value regression + entropy bonus, summed over steps.

    The advantage is a constant in the policy term (stop-gradient); only the
    value head sees gradients from the return target.  ``advantages``
    overrides the computed ones, which keeps finite-difference checks
    well-defined.
    """
    returns = n_step_returns([s.reward for s in trajectory.steps], discount,
                             trajectory.bootstrap_value)
    total: Optional[Tensor] = None
    for t, (step, ret) in enumerate(zip(trajectory.steps, returns)):
        result = step.result
        probs = ad.exp(result.log_probs)
        pi_a = ad.index_element(probs, step.action_index)
        log_pi = ad.log(pi_a, floor=LOG_PROB_FLOOR)
        if advantages is None:
            advantage = ret - result.value.item()  # stop-gradient
        else:
            advantage = advantages[t]
        policy_term = ad.scale(ad.neg(log_pi), advantage)
        residual = ad.sub(ad.constant(np.asarray(ret, dtype=ad.default_dtype())),
                          result.value)
        value_term = ad.scale(ad.mul(residual, residual), config.value_loss_coef)
        entropy = ad.neg(ad.sum_all(ad.mul(probs, result.log_probs)))
        step_loss = ad.sub(ad.add(policy_term, value_term),
                           ad.scale(entropy, config.entropy_coef))
        total = step_loss if total is None else ad.add(total, step_loss)
    return total


@dataclass
class _Task:
    name: str
    bound: BoundInstance
    sim: Simulator


class _Shared:
    def __init__(self, config: TrainConfig):
        self.lock = threading.Lock()
        self.env_steps = 0
        self.budget = config.total_steps
        self.failure: Optional[BaseException] = None
        self.stop = threading.Event()
        self.started = time.monotonic()
        self.returns: dict[str, deque] = {}
        self.log_lock = threading.Lock()

    def claim(self, n: int) -> bool:
        with self.lock:
            if self.env_steps >= self.budget:
                return False
            self.env_steps += n
            return True


def _worker_loop(worker_id: int, network: PolicyNetwork, tasks: list[_Task],
                 config: TrainConfig, shared: _Shared,
                 log_stream: Optional[IO[str]],
                 checkpoint_path: Optional[Path]) -> None:
    rng = RngStream(config.seed, worker_id)
    episode = worker_id  # stagger so workers start on different instances
    task = tasks[episode % len(tasks)]
    state = task.sim.initial_state()
    steps_into_episode = 0
    episode_return = 0.0
    last_snapshot = 0
    try:
        while not shared.stop.is_set():
            leaves = task.bound.make_leaves()
            trajectory = Trajectory(steps=[], bootstrap_value=0.0)
            terminal = False
            for _ in range(config.t_max):
                result = task.bound.forward(state, leaves)
                action = rng.choice_weighted(result.probs)
                nxt, reward = task.sim.step(state, action, rng)
                trajectory.steps.append(TrajStep(result, action, reward))
                episode_return += (task.sim.mdp.discount ** steps_into_episode
                                   ) * reward
                state = nxt
                steps_into_episode += 1
                if steps_into_episode >= task.sim.mdp.horizon:
                    terminal = True
                    break
            if not terminal:
                tail = task.bound.forward(state, leaves)
                trajectory.bootstrap_value = tail.value.item()

            loss = a3c_loss(trajectory, task.sim.mdp.discount, config)
            if not np.isfinite(loss.item()):
                raise TrainingError(f"non-finite loss {loss.item()} on {task.name}")
            ad.backward(loss)
            grads = {name: leaf.grad for name, leaf in leaves.items()
                     if leaf.grad is not None}
            rmsprop_step(network.store, grads, config.optim)

            if not shared.claim(len(trajectory)):
                shared.stop.set()
                break

            if terminal:
                _log_episode(shared, log_stream, task.name, episode_return)
                episode += 1
                task = tasks[episode % len(tasks)]
                state = task.sim.initial_state()
                steps_into_episode = 0
                episode_return = 0.0

            if (worker_id == 0 and checkpoint_path is not None
                    and config.snapshot_every > 0
                    and shared.env_steps - last_snapshot >= config.snapshot_every):
                network.save(checkpoint_path, {"train": config.to_dict()})
                last_snapshot = shared.env_steps
    except BaseException as exc:  # propagate to the orchestrating thread
        shared.failure = exc
        shared.stop.set()


def _log_episode(shared: _Shared, log_stream: Optional[IO[str]],
                 instance: str, episode_return: float) -> None:
    with shared.log_lock:
        window = shared.returns.setdefault(instance, deque(maxlen=100))
        window.append(episode_return)
        if log_stream is not None:
            wall = time.monotonic() - shared.started
            mean = sum(window) / len(window)
            log_stream.write(
                f"{wall:.3f},{shared.env_steps},{instance},{mean:.6f}\n")


def train(network: PolicyNetwork, models: Sequence[TypedModel],
          config: TrainConfig,
          checkpoint_path: Optional[Union[str, Path]] = None,
          log_stream: Optional[IO[str]] = None) -> dict[str, deque]:
    """Run A3C over the training instances; returns per-instance returns.

    The network's parameter store is updated in place; a checkpoint is
    written at the end (and periodically) when a path is given.  A non-finite
    loss aborts with the last good parameters retained in the checkpoint.
    """
    if not models:
        raise ValueError("need at least one training instance")
    tasks = []
    for model in models:
        mdp = ground(model)
        tasks.append(_Task(name=model.instance.name, bound=network.bind(mdp),
                           sim=Simulator(mdp)))
    path = Path(checkpoint_path) if checkpoint_path is not None else None
    shared = _Shared(config)
    if log_stream is not None:
        log_stream.write("wall_seconds,env_steps,instance_id,mean_return_last_100\n")

    if config.workers == 1:
        _worker_loop(0, network, tasks, config, shared, log_stream, path)
    else:
        threads = [
            threading.Thread(target=_worker_loop, name=f"a3c-worker-{w}",
                             args=(w, network, tasks, config, shared,
                                   log_stream, path))
            for w in range(config.workers)]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()

    if path is not None:
        network.save(path, {"train": config.to_dict()})
    if shared.failure is not None:
        raise TrainingError("training aborted") from shared.failure
    logger.info("training finished after %d env steps", shared.env_steps)
    return shared.returns
