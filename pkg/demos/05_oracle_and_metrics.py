"""
Exact solving and normalized metrics
====================================

Backward induction solves the 16-state wildfire exactly; the alpha metric
places any policy's value inside the [random, optimal] band, and beta
compares two alphas (INF marks an opponent stuck at the floor).
"""

from relplan import corpus
from relplan.evaluate import alpha, beta, format_beta, random_baseline
from relplan.grounding import ground
from relplan.value_iteration import state_to_index, value_iteration

mdp = ground(corpus.load("wildfire_mini_2x1"))
result = value_iteration(mdp)
print(f"states: {result.n_states}, horizon: {result.horizon}")
print(f"V*(s0) = {result.optimal_value}")

# the stage-0 greedy action out of the start state
best = result.greedy_action(state_to_index(mdp.s0), stage=0)
print("optimal first action:", mdp.actions[best].name)

rand = random_baseline(corpus.load("wildfire_mini_2x1"), mdp=mdp,
                       n_rollouts=200, seed=0)
print(f"\nrandom baseline: {rand.mean_return:.2f} +- {rand.std_error:.2f}")

a_opt = alpha(result.optimal_value, rand.mean_return, result.optimal_value)
a_rand = alpha(rand.mean_return, rand.mean_return, result.optimal_value)
a_mid = alpha((result.optimal_value + rand.mean_return) / 2,
              rand.mean_return, result.optimal_value)
print(f"alpha(optimal) = {a_opt:.2f}, alpha(random) = {a_rand:.2f}, "
      f"alpha(midpoint) = {a_mid:.2f}")

print("\nbeta(0.9 vs 0.6) =", format_beta(beta(0.9, 0.6)))
print("beta(0.9 vs 0.0) =", format_beta(beta(0.9, 0.0)), "(opponent at the floor)")
