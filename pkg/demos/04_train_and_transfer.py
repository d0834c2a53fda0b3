"""
Training on small instances, acting on a bigger one
===================================================

A deliberately short advantage actor-critic run on the 3-computer ring,
then the same parameters drive the unseen 5-computer ring.  Expect a couple
of minutes; the acceptance suite runs the full-size version of this
experiment with longer budgets.
"""

import time

from relplan import corpus
from relplan.evaluate import alpha, evaluate, random_baseline
from relplan.grounding import ground
from relplan.model import ModelConfig, PolicyNetwork
from relplan.trainer import TrainConfig, train
from relplan.value_iteration import value_iteration

train_model = corpus.load("sysadmin_ring_n3")
network = PolicyNetwork(train_model.domain, ModelConfig(), seed=0)

started = time.time()
returns = train(network, [train_model],
                TrainConfig(total_steps=40_000, workers=1, seed=0))
window = returns["sysadmin_ring_n3"]
print(f"trained 40k steps in {time.time() - started:.0f}s; "
      f"mean return over the last {len(window)} episodes: "
      f"{sum(window) / len(window):.2f}")

# zero-shot transfer: same parameters, larger ring
test_model = corpus.load("sysadmin_ring_n5")
mdp = ground(test_model)
optimal = value_iteration(mdp).optimal_value
rand = random_baseline(test_model, mdp=mdp, n_rollouts=100, seed=1)
mine = evaluate(network, test_model, mdp=mdp, n_rollouts=100, seed=2)
print(f"\nunseen n=5 ring:")
print(f"  optimal (exact)  {optimal:8.3f}")
print(f"  random baseline  {rand.mean_return:8.3f} +- {rand.std_error:.3f}")
print(f"  learned policy   {mine.mean_return:8.3f} +- {mine.std_error:.3f}")
print(f"  alpha            {alpha(mine.mean_return, rand.mean_return, optimal):8.3f}")
