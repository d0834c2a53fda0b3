"""relplan: relational probabilistic planning with size-invariant neural policies.

Pipeline: RDDL text -> typed model -> ground MDP with DBN dependency
structure -> per-action-symbol instance graph -> graph-attention policy
network trained with asynchronous advantage actor-critic, transferable to
unseen instances of the same domain.
"""

__version__ = "0.1.0"
