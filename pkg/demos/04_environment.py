"""Step through the routing MDP by hand, then with a batch of random policies."""
import numpy as np

from cvrpsuite.env import (BatchEnv, episode_reward, episode_solution, feasible_actions,
                           random_instance, random_instances, reset, step)

inst = random_instance(6, 9, 15, seed=2)
s = reset(inst)
print("demands", inst.demands[1:], "capacity", inst.capacity)

while not s.terminal:
    mask = feasible_actions(s)
    # closest allowed node
    a = min(mask.indices(), key=lambda j: inst.distances[s.current_node, j])
    s, _ = step(s, a)
    print(f"go to {a}: load left {s.truck_load:g}, travelled {s.distance_so_far:.3f}")

print("routes", episode_solution(s).routes, "reward", episode_reward(s.distance_so_far))

# the vectorised env used in training
rng = np.random.default_rng(0)
env = BatchEnv.from_instances(random_instances(4, 10, 9, 30, seed=0))
while not env.done.all():
    m = env.mask()
    env.step(np.array([rng.choice(np.flatnonzero(row)) for row in m]))
print("random tour lengths", np.round(env.length, 3))
