"""The domain-tied policy network: parameters, binding, forward passes.

All parameter shapes derive from the domain alone (feature schema width,
number of action symbols), never from an instance, so one checkpoint drives
every instance of its domain.  Binding to an instance precomputes the
structural constants of the forward pass: adjacency masks and the affected
node ids of every ground action.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .decoder import NOOP_KEY, decode
from .encoder import encode
from .graph import InstanceGraph, build_graph, features_matrix, schema_for
from .grounding import Dbn, GroundMdp, affected_set, extract_dbn
from .params import ParamStore, load_checkpoint, save_checkpoint
from .rddl.ast import DomainAst
from .rddl.printer import domain_to_str


@dataclass(frozen=True)
class ModelConfig:
    gat_heads: int = 4
    gat_dim: int = 6
    tuple_dim: int = 20
    hidden_dim: int = 16
    leaky_slope: float = 0.01
    neighborhood: int = 1
    value_per_symbol: bool = False

    def to_dict(self) -> dict:
        return {
            "gat_heads": self.gat_heads, "gat_dim": self.gat_dim,
            "tuple_dim": self.tuple_dim, "hidden_dim": self.hidden_dim,
            "leaky_slope": self.leaky_slope, "neighborhood": self.neighborhood,
            "value_per_symbol": self.value_per_symbol,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        return cls(**data)


def domain_fingerprint(domain: DomainAst) -> str:
    """Digest of the normalized domain text; identifies dynamics + schema."""
    return hashlib.sha256(domain_to_str(domain).encode("utf-8")).hexdigest()


class FingerprintMismatch(Exception):
    pass


@dataclass(frozen=True)
class ForwardResult:
    logits: Tensor       # (n_actions,), noop first
    log_probs: Tensor    # (n_actions,)
    probs: np.ndarray    # plain array view of the policy
    value: Tensor        # scalar
    attention: list = field(repr=False, default_factory=list)

    def greedy_action_index(self) -> int:
        return int(np.argmax(self.probs))  # lowest index wins ties


class PolicyNetwork:
    """Encoder plus per-action-symbol decoder heads for one domain."""

    def __init__(self, domain: DomainAst, config: ModelConfig = ModelConfig(),
                 seed: int = 0,
                 arrays: Optional[dict[str, np.ndarray]] = None):
        self.domain = domain
        self.config = config
        self.seed = seed
        self.schema = schema_for(domain)
        self.symbols = tuple(sorted(pv.name for pv in domain.actions()))
        self.k = len(self.symbols) + 1
        self.fingerprint = domain_fingerprint(domain)
        shapes = self._parameter_shapes()
        if arrays is None:
            arrays = _init_arrays(shapes, seed)
        else:
            got = {name: tuple(a.shape) for name, a in arrays.items()}
            if got != shapes:
                raise FingerprintMismatch(
                    "checkpoint parameter shapes do not match this domain/config")
        self.store = ParamStore(arrays)

    # -- parameters -----------------------------------------------------------

    def _parameter_shapes(self) -> dict[str, tuple[int, ...]]:
        cfg = self.config
        shapes: dict[str, tuple[int, ...]] = {}
        for j in range(self.k):
            in_dim = self.schema.length
            for layer in range(cfg.neighborhood):
                for k in range(cfg.gat_heads):
                    prefix = f"enc/g{j}/l{layer}/h{k}"
                    shapes[f"{prefix}/W"] = (in_dim, cfg.gat_dim)
                    shapes[f"{prefix}/a_self"] = (cfg.gat_dim,)
                    shapes[f"{prefix}/a_neigh"] = (cfg.gat_dim,)
                in_dim = cfg.gat_dim
        shapes["enc/proj/W"] = (cfg.gat_dim * self.k, cfg.tuple_dim)
        shapes["enc/proj/b"] = (cfg.tuple_dim,)
        for symbol in self.symbols:
            for kind in ("pi", "v"):
                prefix = f"dec/{symbol}/{kind}"
                shapes[f"{prefix}/W1"] = (2 * cfg.tuple_dim, cfg.hidden_dim)
                shapes[f"{prefix}/b1"] = (cfg.hidden_dim,)
                shapes[f"{prefix}/W2"] = (cfg.hidden_dim, 1)
                shapes[f"{prefix}/b2"] = (1,)
        for kind in ("pi", "v"):
            prefix = f"dec/{NOOP_KEY}/{kind}"
            shapes[f"{prefix}/W1"] = (cfg.tuple_dim, cfg.hidden_dim)
            shapes[f"{prefix}/b1"] = (cfg.hidden_dim,)
            shapes[f"{prefix}/W2"] = (cfg.hidden_dim, 1)
            shapes[f"{prefix}/b2"] = (1,)
        return shapes

    def hyperparams(self, extra: Optional[dict] = None) -> dict:
        data = {"model": self.config.to_dict(), "seed": self.seed}
        if extra:
            data.update(extra)
        return data

    # -- persistence ----------------------------------------------------------

    def save(self, path: Union[str, Path], extra_hyperparams: Optional[dict] = None,
             ) -> None:
        save_checkpoint(path, self.store, self.fingerprint,
                        self.hyperparams(extra_hyperparams))

    @classmethod
    def load(cls, path: Union[str, Path], domain: DomainAst) -> "PolicyNetwork":
        arrays, fingerprint, hyper = load_checkpoint(path)
        if fingerprint != domain_fingerprint(domain):
            raise FingerprintMismatch(
                "checkpoint was trained for a different domain")
        config = ModelConfig.from_dict(hyper["model"])
        return cls(domain, config, seed=int(hyper.get("seed", 0)), arrays=arrays)

    # -- binding ----------------------------------------------------------------

    def bind(self, mdp: GroundMdp, dbn: Optional[Dbn] = None,
             graph: Optional[InstanceGraph] = None) -> "BoundInstance":
        if mdp.model.domain != self.domain:
            raise FingerprintMismatch("instance grounds a different domain")
        dbn = dbn or extract_dbn(mdp)
        graph = graph or build_graph(mdp, dbn)
        return BoundInstance(self, mdp, dbn, graph)


def _init_arrays(shapes: dict[str, tuple[int, ...]], seed: int,
                 ) -> dict[str, np.ndarray]:
    """Fan-scaled uniform init for weights and attention vectors; zero biases."""
    gen = np.random.Generator(np.random.Philox(key=[seed, 0x9E3779B9]))
    arrays = {}
    for name in sorted(shapes):
        shape = shapes[name]
        if name.endswith(("/b", "/b1", "/b2")):
            arrays[name] = np.zeros(shape, dtype=np.float32)
            continue
        if len(shape) == 2:
            fan_in, fan_out = shape
        else:
            fan_in, fan_out = shape[0], 1
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        arrays[name] = gen.uniform(-limit, limit, size=shape).astype(np.float32)
    return arrays


class BoundInstance:
    """A policy network attached to one ground instance."""

    def __init__(self, network: PolicyNetwork, mdp: GroundMdp, dbn: Dbn,
                 graph: InstanceGraph):
        self.network = network
        self.mdp = mdp
        self.dbn = dbn
        self.graph = graph
        n = len(graph.nodes)
        self.in_masks = [sg.in_mask(n) for sg in graph.subgraphs]
        node_id = {node.args: node.node_id for node in graph.nodes}
        by_symbol: dict[str, list[list[int]]] = {s: [] for s in network.symbols}
        for action in mdp.actions:
            if action.is_noop:
                continue
            affected = affected_set(dbn, mdp, action)
            by_symbol[action.symbol].append(
                sorted({node_id[var.args] for var in affected}))
        self.symbol_actions = [(s, by_symbol[s]) for s in network.symbols]

    def make_leaves(self, arrays: Optional[dict[str, np.ndarray]] = None,
                    ) -> dict[str, Tensor]:
        """Leaf tensors for one tape; reuse across a segment to accumulate."""
        if arrays is None:
            arrays = self.network.store.snapshot()
        return {name: ad.parameter(value, dtype=ad.default_dtype())
                for name, value in arrays.items()}

    def forward(self, state: np.ndarray,
                leaves: Optional[dict[str, Tensor]] = None) -> ForwardResult:
        if leaves is None:
            leaves = self.make_leaves()
        features = ad.constant(
            features_matrix(self.mdp, self.graph, state), dtype=ad.default_dtype())
        tuples_, state_emb, attention = encode(
            features, self.in_masks, leaves, self.network.config)
        logits, value = decode(tuples_, state_emb, self.symbol_actions,
                               leaves, self.network.config)
        log_probs = ad.log_softmax(logits)
        probs = np.exp(log_probs.data.astype(np.float64))
        probs /= probs.sum()
        return ForwardResult(logits=logits, log_probs=log_probs, probs=probs,
                             value=value, attention=attention)

    def greedy_policy(self, arrays: Optional[dict[str, np.ndarray]] = None):
        """State -> ground-action index, highest probability, no recording."""
        if arrays is None:
            arrays = self.network.store.snapshot()
        leaves = {name: ad.constant(value, dtype=ad.default_dtype())
                  for name, value in arrays.items()}

        def policy(state: np.ndarray) -> int:
            with ad.no_grad():
                return self.forward(state, leaves).greedy_action_index()

        return policy
