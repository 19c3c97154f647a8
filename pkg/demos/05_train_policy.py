"""A short REINFORCE run, then greedy, sampled and beam decoding.

This uses a much smaller network and fewer epochs than the default config so
it finishes in about a minute; see the README for the full desk-scale run.
"""
import numpy as np

from cvrpsuite.env import random_instance, random_instances
from cvrpsuite.policy import BEAM, GREEDY, SAMPLE, TrainConfig, greedy_costs, rollout, train_reinforce
from cvrpsuite.policy.network import init_params

cfg = TrainConfig(embedding_dim=32, encoder_layers=2, heads=4, ff_dim=64, optimizer="adam",
                  batches_per_epoch=4, epochs=8, n_customers=10, eval_size=64)
held_out = random_instances(64, 10, 9, 30, seed=99)

before = greedy_costs(init_params(cfg.net_config(), cfg.seed), held_out).mean()
res = train_reinforce(cfg, on_epoch=lambda e, r: print(f"epoch {e}: mean sampled cost {r.epoch_means()[-1]:.3f}"))
after = greedy_costs(res.params, held_out).mean()
print(f"held-out greedy cost {before:.3f} -> {after:.3f}")

inst = random_instance(10, 9, 30, seed=5)
for mode, kw in ((GREEDY, {}), (SAMPLE, {"seed": 1}), (BEAM, {"width": 5})):
    sol = rollout(res.params, inst, mode, **kw)
    print(f"{mode:>6}: {sol.cost:.3f} {sol.routes}")
