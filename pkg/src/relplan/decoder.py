"""Policy and value heads over tuple and state embeddings.

One head pair per action symbol, shared by all of the symbol's ground
actions: the input is the state embedding concatenated with a max-pool over
the embeddings of the tuples whose variables the ground action affects
(zero-filled when it affects none).  The noop keeps its own pair fed by the
state embedding alone.  The state value sums every head's value output.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor

NOOP_KEY = "__noop__"


def head(rows: Tensor, leaves: dict[str, Tensor], prefix: str,
         slope: float) -> Tensor:
    """Two-layer MLP applied row-wise; returns one scalar per row."""
    hidden = ad.leaky_relu(
        ad.add(ad.matmul(rows, leaves[f"{prefix}/W1"]), leaves[f"{prefix}/b1"]),
        slope)
    out = ad.add(ad.matmul(hidden, leaves[f"{prefix}/W2"]), leaves[f"{prefix}/b2"])
    return ad.reshape(out, (rows.data.shape[0],))


def decode(tuple_embeddings: Tensor, state_embedding: Tensor,
           symbol_actions: list[tuple[str, list[list[int]]]],
           leaves: dict[str, Tensor], config) -> tuple[Tensor, Tensor]:
    """Score every ground action and accumulate the state value.

    ``symbol_actions`` lists, per action symbol in ground-action order, the
    affected node ids of each of the symbol's ground actions.  Returns
    (logits, value): logits are aligned with ground-action indices, noop
    first.
    """
    dim = state_embedding.data.shape[0]
    zero_pool = ad.constant(np.zeros(dim, dtype=state_embedding.data.dtype))

    noop_row = ad.stack([state_embedding])
    logit_parts = [head(noop_row, leaves, f"dec/{NOOP_KEY}/pi", config.leaky_slope)]
    value_parts = [head(noop_row, leaves, f"dec/{NOOP_KEY}/v", config.leaky_slope)]

    for symbol, affected_lists in symbol_actions:
        rows = []
        for node_ids in affected_lists:
            if node_ids:
                pooled = ad.max_pool_rows(
                    ad.gather_rows(tuple_embeddings, node_ids))
            else:
                pooled = zero_pool
            rows.append(ad.concat([state_embedding, pooled]))
        batch = ad.stack(rows)
        logit_parts.append(head(batch, leaves, f"dec/{symbol}/pi",
                                config.leaky_slope))
        if config.value_per_symbol:
            pooled_inputs = ad.max_pool_rows(batch)
            symbol_row = ad.stack([pooled_inputs])
            value_parts.append(head(symbol_row, leaves, f"dec/{symbol}/v",
                                    config.leaky_slope))
        else:
            value_parts.append(head(batch, leaves, f"dec/{symbol}/v",
                                    config.leaky_slope))

    logits = ad.concat(logit_parts)
    value = ad.sum_all(ad.concat(value_parts))
    return logits, value
