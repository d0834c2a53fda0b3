"""
Parsing RDDL and grounding it to an explicit MDP
================================================

Walks the first half of the pipeline on the bundled two-cell wildfire
problem: text -> typed AST -> ground MDP -> DBN dependency structure.
"""

from relplan import corpus
from relplan.grounding import affected_set, extract_dbn, ground
from relplan.rddl import expr_to_str

# parse + validate the bundled domain/instance pair
model = corpus.load("wildfire_mini_2x1")
domain, instance = model.domain, model.instance

print("domain:", domain.name)
print("fluents:", [p.name for p in domain.fluents()])
print("non-fluents:", [p.name for p in domain.non_fluents()])
print("action symbols:", [p.name for p in domain.actions()])
print("objects:", dict(instance.objects))
print("horizon:", instance.horizon, " discount:", instance.discount)

# grounding enumerates every type-consistent instantiation and folds the
# non-fluent constants away
mdp = ground(model)
print("\nstate variables:")
for var in mdp.state_vars:
    print(f"  [{var.index}] {var.name}")
print("ground actions:", [a.name for a in mdp.actions])

print("\nobject-tuple registries:")
print("  fluent tuples   :", mdp.fluent_tuples)
print("  action tuples   :", mdp.action_tuples)

# the folded transition expression of one cell: note how the instance's
# NEIGHBOUR constants reduced the spread term to one concrete variable
var = mdp.state_vars[mdp.var_index[("burning", ("x2", "y1"))]]
print(f"\nCPF of {var.name}:")
print(" ", expr_to_str(mdp.cpfs[var.index]))

# the DBN records which variables and actions each CPF actually reads
dbn = extract_dbn(mdp)
print("\ndependencies:")
for entry in dbn.entries:
    print(f"  {mdp.state_vars[entry.var_index].name:22s}"
          f" <- {[mdp.state_vars[i].name for i in entry.state_deps]}"
          f" + {[mdp.actions[i].name for i in entry.action_deps]}")

finisher = next(a for a in mdp.actions if a.name == "finisher")
print("\nfinisher affects:",
      [v.name for v in affected_set(dbn, mdp, finisher)])
print("noop affects:", affected_set(dbn, mdp, mdp.noop))
