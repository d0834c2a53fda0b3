"""Graph-attention encoding of instance graphs.

Each of the K subgraphs gets its own attention layers; a node's new
embedding is the leaky-ReLU of the head-averaged, attention-weighted sum of
its in-neighbours' projections.  Tuple embeddings concatenate a node's K
per-subgraph embeddings and project them through a shared layer; the state
embedding is the dimension-wise max over tuple embeddings.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor


def gat_layer(features: Tensor, in_mask: np.ndarray,
              weights: list[tuple[Tensor, Tensor, Tensor]],
              slope: float) -> tuple[Tensor, list[np.ndarray]]:
    """One attention layer on one subgraph.

    ``weights`` holds (W, a_self, a_neigh) per head; ``in_mask[i, j]`` marks
    j as an in-neighbour of i and must include the diagonal (self-loops).

    Returns the (n, out_dim) embeddings and the per-head attention matrices
    (plain arrays, for diagnostics).
    """
    if not in_mask.diagonal().all():
        raise ValueError("adjacency must include self-loops")
    n = features.data.shape[0]
    summed: Optional[Tensor] = None
    attentions: list[np.ndarray] = []
    for W, a_self, a_neigh in weights:
        proj = ad.matmul(features, W)                      # (n, d)
        score_self = ad.matmul(proj, a_self)               # (n,)
        score_neigh = ad.matmul(proj, a_neigh)             # (n,)
        raw = ad.add(ad.reshape(score_self, (n, 1)),
                     ad.reshape(score_neigh, (1, n)))      # raw[i, j]
        alpha = ad.softmax(ad.leaky_relu(raw, slope), mask=in_mask)
        attentions.append(alpha.data)
        message = ad.matmul(alpha, proj)                   # (n, d)
        summed = message if summed is None else ad.add(summed, message)
    averaged = ad.scale(summed, 1.0 / len(weights))
    return ad.leaky_relu(averaged, slope), attentions


def encode(features: Tensor, in_masks: list[np.ndarray],
           leaves: dict[str, Tensor], config) -> tuple[Tensor, Tensor, list]:
    """Run the full encoder: (tuple embeddings, state embedding, attention)."""
    per_subgraph: list[Tensor] = []
    diagnostics = []
    for j, mask in enumerate(in_masks):
        x = features
        for layer in range(config.neighborhood):
            weights = [
                (leaves[f"enc/g{j}/l{layer}/h{k}/W"],
                 leaves[f"enc/g{j}/l{layer}/h{k}/a_self"],
                 leaves[f"enc/g{j}/l{layer}/h{k}/a_neigh"])
                for k in range(config.gat_heads)]
            x, attention = gat_layer(x, mask, weights, config.leaky_slope)
            diagnostics.append((j, layer, attention))
        per_subgraph.append(x)
    concatenated = ad.concat(per_subgraph, axis=1)         # (n, d*K)
    projected = ad.add(ad.matmul(concatenated, leaves["enc/proj/W"]),
                       leaves["enc/proj/b"])
    tuple_embeddings = ad.leaky_relu(projected, config.leaky_slope)
    state_embedding = ad.max_pool_rows(tuple_embeddings)
    return tuple_embeddings, state_embedding, diagnostics
