"""Instance graphs: per-action-symbol influence subgraphs over object tuples.

One node per distinct fluent argument tuple.  K = |action symbols| + 1
directed subgraphs: subgraph j holds an edge u -> v when taking some ground
action of symbol j leaves the transition of a variable on v still reading a
variable on u; the final subgraph holds every direct influence, including
natural dynamics.  Every subgraph carries all self-loops.

Node features concatenate one slot per fluent symbol with one slot per
applicable non-fluent symbol, so their length depends on the domain only.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .grounding import (
    Dbn, GroundAction, GroundMdp, ObjTuple, affected_set,
    state_deps_under_action,
)
from .rddl.ast import DomainAst

logger = logging.getLogger(__name__)

GLOBAL_SUBGRAPH = "__global__"

# how a non-fluent symbol can contribute a feature slot
EXACT = "exact"          # argument tuple equals the node tuple
BROADCAST = "broadcast"  # parameterless value copied onto every node
UNARY = "unary"          # unary value of an object inside the node tuple


@dataclass(frozen=True)
class InstanceNode:
    node_id: int
    args: ObjTuple

    @property
    def name(self) -> str:
        return "(" + ", ".join(self.args) + ")"


@dataclass(frozen=True)
class NfSlot:
    symbol: str
    mode: str  # EXACT | BROADCAST | UNARY


@dataclass(frozen=True)
class FeatureSchema:
    """Domain-level feature layout: identical for every instance."""

    fluent_slots: tuple[str, ...]
    nonfluent_slots: tuple[NfSlot, ...]

    @property
    def length(self) -> int:
        return len(self.fluent_slots) + len(self.nonfluent_slots)


@lru_cache(maxsize=None)
def schema_for(domain: DomainAst) -> FeatureSchema:
    """Feature slots for a domain, dropping never-applicable non-fluents."""
    fluent_slots = tuple(sorted(pv.name for pv in domain.fluents()))
    node_signatures = {pv.param_types for pv in domain.fluents()}
    node_classes = {cls for sig in node_signatures for cls in sig}
    nf_slots = []
    for pv in sorted(domain.non_fluents(), key=lambda p: p.name):
        if pv.arity == 0:
            nf_slots.append(NfSlot(pv.name, BROADCAST))
        elif pv.param_types in node_signatures:
            nf_slots.append(NfSlot(pv.name, EXACT))
        elif pv.arity == 1 and pv.param_types[0] in node_classes:
            nf_slots.append(NfSlot(pv.name, UNARY))
        # anything else can never touch a node; the slot would be constant zero
    return FeatureSchema(fluent_slots, tuple(nf_slots))


@dataclass(frozen=True)
class Subgraph:
    symbol: Optional[str]  # None for the global subgraph
    edges: tuple[tuple[int, int], ...]  # (u, v) node ids, u influences v

    def in_mask(self, n_nodes: int) -> np.ndarray:
        """mask[i, j] is True when j is an in-neighbour of i."""
        mask = np.zeros((n_nodes, n_nodes), dtype=bool)
        for u, v in self.edges:
            mask[v, u] = True
        return mask


@dataclass(frozen=True)
class InstanceGraph:
    nodes: tuple[InstanceNode, ...]
    subgraphs: tuple[Subgraph, ...]  # K entries, global one last
    schema: FeatureSchema
    static_nf: np.ndarray  # (n_nodes, n_nf_slots), float64

    @property
    def k(self) -> int:
        return len(self.subgraphs)

    def node_for(self, args: ObjTuple) -> InstanceNode:
        for node in self.nodes:
            if node.args == args:
                return node
        raise KeyError(args)

    def canonical_form(self) -> str:
        payload = {
            "nodes": [list(node.args) for node in self.nodes],
            "subgraphs": [
                sorted([list(self.nodes[u].args), list(self.nodes[v].args)]
                       for u, v in sg.edges)
                for sg in self.subgraphs],
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    def to_dict(self, mdp: GroundMdp) -> dict:
        features = features_matrix(mdp, self, mdp.s0)
        return {
            "nodes": [{"id": n.node_id, "tuple": list(n.args)} for n in self.nodes],
            "subgraphs": [
                {"symbol": sg.symbol or GLOBAL_SUBGRAPH,
                 "edges": sorted([u, v] for u, v in sg.edges)}
                for sg in self.subgraphs],
            "schema": {
                "fluents": list(self.schema.fluent_slots),
                "non_fluents": [[s.symbol, s.mode] for s in self.schema.nonfluent_slots],
            },
            "features": [[float(x) for x in row] for row in features],
            "fingerprint": graph_fingerprint(self),
        }

    def to_dot(self) -> str:
        chunks = []
        for sg in self.subgraphs:
            title = sg.symbol or GLOBAL_SUBGRAPH
            lines = [f'digraph "{title}" {{']
            for node in self.nodes:
                lines.append(f'    n{node.node_id} [label="{node.name}"];')
            for u, v in sorted(sg.edges):
                lines.append(f"    n{u} -> n{v};")
            lines.append("}")
            chunks.append("\n".join(lines))
        return "\n".join(chunks) + "\n"


def build_graph(mdp: GroundMdp, dbn: Dbn) -> InstanceGraph:
    """Convert a ground MDP plus its DBN into the instance graph."""
    nodes = tuple(InstanceNode(i, args) for i, args in enumerate(mdp.fluent_tuples))
    node_id = {node.args: node.node_id for node in nodes}
    symbols = tuple(sorted(pv.name for pv in mdp.model.domain.actions()))
    self_loops = {(node.node_id, node.node_id) for node in nodes}

    subgraphs = []
    for symbol in symbols:
        edges = set(self_loops)
        for action in mdp.actions:
            if action.symbol != symbol:
                continue
            for var in affected_set(dbn, mdp, action):
                v = node_id[var.args]
                for dep in state_deps_under_action(mdp, var.index, action.index):
                    u = node_id[mdp.state_vars[dep].args]
                    edges.add((u, v))
        subgraphs.append(Subgraph(symbol, tuple(sorted(edges))))

    global_edges = set(self_loops)
    for entry in dbn.entries:
        v = node_id[mdp.state_vars[entry.var_index].args]
        for dep in entry.state_deps:
            u = node_id[mdp.state_vars[dep].args]
            global_edges.add((u, v))
    subgraphs.append(Subgraph(None, tuple(sorted(global_edges))))

    schema = schema_for(mdp.model.domain)
    static_nf = _static_nf_matrix(mdp, nodes, schema)
    return InstanceGraph(nodes=nodes, subgraphs=tuple(subgraphs),
                         schema=schema, static_nf=static_nf)


def _static_nf_matrix(mdp: GroundMdp, nodes: tuple[InstanceNode, ...],
                      schema: FeatureSchema) -> np.ndarray:
    domain = mdp.model.domain
    object_class = {obj: cls for cls, members in mdp.model.instance.objects
                    for obj in members}
    out = np.zeros((len(nodes), len(schema.nonfluent_slots)))
    for si, slot in enumerate(schema.nonfluent_slots):
        decl = domain.pvar(slot.symbol)
        for node in nodes:
            if slot.mode == BROADCAST:
                value = mdp.nonfluent_values[(slot.symbol, ())]
            elif slot.mode == EXACT:
                node_sig = tuple(object_class[o] for o in node.args)
                if node_sig != decl.param_types:
                    continue
                value = mdp.nonfluent_values[(slot.symbol, node.args)]
            else:  # UNARY: objects of the slot's class inside the tuple
                matches = [float(mdp.nonfluent_values[(slot.symbol, (obj,))])
                           for obj in node.args
                           if object_class[obj] == decl.param_types[0]]
                if not matches:
                    continue
                if len(matches) > 1:
                    logger.warning(
                        "unary non-fluent %s matches %d objects of node %s; "
                        "taking the maximum", slot.symbol, len(matches), node.name)
                value = max(matches)
            out[node.node_id, si] = float(value)
    return out


def node_features(mdp: GroundMdp, state: np.ndarray, node: InstanceNode,
                  graph: Optional[InstanceGraph] = None) -> np.ndarray:
    """Feature vector concat(h_fluent, h_nonfluent) for one node."""
    if graph is None:
        nodes = tuple(InstanceNode(i, args)
                      for i, args in enumerate(mdp.fluent_tuples))
        schema = schema_for(mdp.model.domain)
        static_nf = _static_nf_matrix(mdp, nodes, schema)
    else:
        schema = graph.schema
        static_nf = graph.static_nf
    h_f = np.zeros(len(schema.fluent_slots))
    for si, symbol in enumerate(schema.fluent_slots):
        key = (symbol, node.args)
        if key in mdp.var_index:
            h_f[si] = float(state[mdp.var_index[key]])
    return np.concatenate([h_f, static_nf[node.node_id]])


def features_matrix(mdp: GroundMdp, graph: InstanceGraph,
                    state: np.ndarray) -> np.ndarray:
    """Stacked feature vectors for all nodes (rows follow node ids)."""
    return np.stack([node_features(mdp, state, node, graph)
                     for node in graph.nodes])


def graph_fingerprint(graph: InstanceGraph) -> str:
    """Digest of the canonical serialization; equal structure, equal digest."""
    return hashlib.sha256(graph.canonical_form().encode("utf-8")).hexdigest()
