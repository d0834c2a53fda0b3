"""
A size-invariant policy network
===============================

The network's parameters depend on the domain only: feature width, number
of action symbols.  The same (untrained) parameter store scores 6 ground
actions on the two-cell wildfire and 14 on the 2x3 grid.
"""

import numpy as np

from relplan import corpus
from relplan.grounding import ground
from relplan.model import ModelConfig, PolicyNetwork

model = corpus.load("wildfire_mini_2x1")
network = PolicyNetwork(model.domain, ModelConfig(), seed=0)
total = sum(int(np.prod(network.store.shape_of(n))) for n in network.store.names)
print(f"parameters: {total} floats ({network.store.payload_nbytes()} bytes)")
print("a few parameter tensors:")
for name in list(network.store.names)[:4]:
    print(f"  {name:24s} {network.store.shape_of(name)}")

for instance in ("wildfire_mini_2x1", "wildfire_mini_2x3"):
    mdp = ground(corpus.load(instance))
    result = network.bind(mdp).forward(mdp.s0)
    best = mdp.actions[result.greedy_action_index()]
    print(f"\n{instance}: {len(mdp.actions)} ground actions")
    print("  pi(s0) =", np.round(result.probs, 3))
    print("  V(s0)  =", round(result.value.item(), 4))
    print("  greedy =", best.name)

# per-symbol weight sharing: in a fully symmetric state, ground actions of
# the same symbol score identically
ring = ground(corpus.load("sysadmin_ring_n5"))
ring_net = PolicyNetwork(corpus.load("sysadmin_ring_n5").domain, seed=0)
result = ring_net.bind(ring).forward(np.ones(5, dtype=bool))
print("\nsysadmin, all machines up: reboot logits",
      np.round(result.logits.data[1:], 4))
