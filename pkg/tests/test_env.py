import csv
import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvrpsuite.data import load_cmt
from cvrpsuite.env import (
    BatchEnv, MaskedActionError, TerminalStateError, episode_reward, episode_solution,
    feasible_actions, nearest_policy, node_features, normalized_coords, random_instance,
    random_instances, random_policy, reset, routes_from_actions, run_episode, step, step_bound,
    tsp_instance, write_trace,
)
from cvrpsuite.exact import brute_force_optimal
from cvrpsuite.instance import Instance, solution_cost, validate


def one_customer():
    return Instance("one", (0, 0), ((3, 4, 1),), 1)


def test_reset_cmt1():
    s = reset(load_cmt("CMT1"))
    assert s.truck_load == 160
    assert (s.residual_demand[1:] > 0).sum() == 50
    assert s.current_node == 0 and s.steps == 0 and not s.terminal


def test_reset_idempotent():
    inst = random_instance(10, 9, 30, seed=1)
    assert reset(inst) == reset(inst)


def test_one_customer_episode():
    inst = one_customer()
    s = reset(inst)
    assert feasible_actions(s).indices() == [1]
    s, done = step(s, 1)
    assert not done
    assert feasible_actions(s).indices() == [0]
    s, done = step(s, 0)
    assert done and s.terminal
    assert s.distance_so_far == 10.0
    with pytest.raises(TerminalStateError):
        feasible_actions(s)


def test_mask_only_fitting_customers():
    inst = Instance("m", (0, 0), ((1, 0, 1), (2, 0, 5), (3, 0, 2), (4, 0, 1)), 10)
    s = reset(inst)
    # at customer 1 (served), residuals [5, 2, 0] for customers 2..4, load 3
    s = dataclasses.replace(
        s, current_node=1, truck_load=3.0,
        residual_demand=np.array([0.0, 0.0, 5.0, 2.0, 0.0]),
        visited_mask=np.array([False, True, False, False, True]),
    )
    assert feasible_actions(s).indices() == [0, 3]


def test_depot_masked_at_start():
    inst = random_instance(8, 9, 30, seed=0)
    mask = feasible_actions(reset(inst))
    assert 0 not in mask
    assert mask.indices() == list(range(1, 9))


def test_forced_depot_when_nothing_fits():
    inst = Instance("f", (0, 0), ((1, 0, 3), (2, 0, 3)), 5)
    s, _ = step(reset(inst), 1)
    assert s.truck_load == 2
    assert feasible_actions(s).indices() == [0]


def test_exact_fit_empties_truck():
    inst = Instance("e", (0, 0), ((1, 0, 4), (2, 0, 1)), 4)
    s, _ = step(reset(inst), 1)
    assert s.truck_load == 0
    assert feasible_actions(s).indices() == [0]


def test_masked_action_raises():
    inst = random_instance(4, 9, 30, seed=0)
    with pytest.raises(MaskedActionError):
        step(reset(inst), 0)
    s, _ = step(reset(inst), 2)
    with pytest.raises(MaskedActionError):
        step(s, 2)


def test_states_are_immutable():
    s0 = reset(random_instance(5, 9, 30, seed=2))
    s1, _ = step(s0, 3)
    assert s0.residual_demand[3] > 0 and s1.residual_demand[3] == 0
    with pytest.raises(ValueError):
        s1.residual_demand[1] = 0


@pytest.mark.parametrize("seed", range(6))
def test_replaying_oracle_routes(seed):
    inst = random_instance(6, 9, 20, seed=seed)
    opt = brute_force_optimal(inst)
    s = reset(inst)
    for r in opt.routes:
        for a in (*r, 0):
            s, _ = step(s, a)
    assert s.terminal
    assert s.distance_so_far == pytest.approx(opt.cost, abs=1e-9)


def test_reward_examples():
    assert episode_reward(4.0) == -4.0
    inst = load_cmt("CMT1")
    s = run_episode(inst, nearest_policy)
    sol = episode_solution(s)
    assert validate(inst, sol).feasible
    assert episode_reward(s.distance_so_far) == -solution_cost(inst, sol.routes)
    # frozen nearest-neighbour tour length on CMT1
    assert s.distance_so_far == pytest.approx(694.8769055550941, rel=1e-12)


def test_coincident_nodes_zero_reward():
    inst = Instance("z", (1, 1), ((1, 1, 1), (1, 1, 1)), 1)
    s = run_episode(inst, nearest_policy)
    assert episode_reward(s.distance_so_far) == 0.0


def test_routes_from_actions():
    assert routes_from_actions([2, 1, 0, 3, 0]) == [[2, 1], [3]]
    assert routes_from_actions([]) == []


def test_random_instance():
    a = random_instance(20, 9, 30, seed=7)
    assert a == random_instance(20, 9, 30, seed=7)
    q = a.demands[1:]
    assert q.min() >= 1 and q.max() <= 9
    assert a.n == 20 and a.capacity == 30
    with pytest.raises(ValueError):
        random_instance(5, 31, 30, seed=0)
    with pytest.raises(ValueError):
        random_instance(5, 0, 30, seed=0)


def test_demand_mean_within_three_sigma():
    dm = 9
    insts = random_instances(1000, 100, dm, 30, seed=0)
    q = np.concatenate([i.demands[1:] for i in insts])
    assert len(q) == 10**5
    mean = (1 + dm) / 2
    sigma = np.sqrt((dm * dm - 1) / 12 / len(q))
    assert abs(q.mean() - mean) <= 3 * sigma


def test_thousand_random_rollouts():
    rng = np.random.default_rng(0)
    for k in range(1000):
        n = int(rng.integers(5, 31))
        inst = random_instance(n, int(rng.integers(1, 10)), int(rng.integers(9, 40)), seed=k)
        choose = random_policy(rng)
        s = reset(inst)
        while not s.terminal:
            mask = feasible_actions(s)
            assert mask.allowed.any()
            s, _ = step(s, choose(s, mask))
        assert s.steps <= step_bound(n)
        sol = episode_solution(s)
        assert validate(inst, sol).feasible
        assert abs(-episode_reward(s.distance_so_far) - sol.cost) <= 1e-9


def test_tsp_instance_is_one_tour():
    inst = tsp_instance(random_instance(9, 9, 30, seed=3))
    s = reset(inst)
    while not s.terminal:
        mask = feasible_actions(s)
        # capacity never blocks an unserved customer
        assert mask.indices()[int(mask.allowed[0]):] == [c for c in range(1, 10) if s.residual_demand[c] > 0]
        s, _ = step(s, mask.indices()[-1])
    assert len(episode_solution(s).routes) == 1


def test_normalized_coords():
    inst = Instance("b", (10, 20), ((30, 20, 1), (10, 60, 1)), 5)
    xy = normalized_coords(inst)
    assert xy.min() == 0.0 and xy.max() == 1.0
    # one shared scale: x spans 20, y spans 40
    np.testing.assert_allclose(xy, [[0, 0], [0.5, 0], [0, 1]])
    unit = random_instance(5, 9, 30, seed=0)
    assert np.array_equal(normalized_coords(unit), unit.coords)
    f = node_features(inst)
    assert f.shape == (3, 3)
    np.testing.assert_allclose(f[:, 2], [0, 0.2, 0.2])


def test_batch_env_agrees_with_single_env():
    rng = np.random.default_rng(5)
    insts = random_instances(8, 12, 9, 30, seed=5)
    env = BatchEnv.from_instances(insts)
    states = [reset(i) for i in insts]
    while not env.done.all():
        m = env.mask()
        acts = np.zeros(env.batch, dtype=int)
        for b, s in enumerate(states):
            if s.terminal:
                assert m[b].tolist() == [True] + [False] * 12
                continue
            assert m[b].tolist() == feasible_actions(s).allowed.tolist()
            acts[b] = rng.choice(np.flatnonzero(m[b]))
            states[b], _ = step(s, acts[b])
        env.step(acts)
    for b, s in enumerate(states):
        assert env.length[b] == pytest.approx(s.distance_so_far, rel=1e-12)


def test_batch_env_masked_action():
    env = BatchEnv.from_instances(random_instances(2, 4, 9, 30, seed=1))
    with pytest.raises(MaskedActionError):
        env.step(np.array([1, 0]))
    with pytest.raises(ValueError):
        BatchEnv.from_instances([random_instance(3, 9, 30, 0), random_instance(4, 9, 30, 0)])


def test_trace_csv(tmp_path):
    inst = random_instance(5, 9, 15, seed=9)
    s = run_episode(inst, nearest_policy)
    write_trace(s, tmp_path / "t.csv")
    with open(tmp_path / "t.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == s.steps + 1
    assert [int(r["node"]) for r in rows[1:]] == list(s.actions)
    assert float(rows[-1]["distance"]) == s.distance_so_far
    assert float(rows[0]["load"]) == 15


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 25), st.integers(1, 9), st.integers(0, 10**6))
def test_mask_never_empty(n, dm, seed):
    inst = random_instance(n, dm, 9 + dm, seed=seed)
    rng = np.random.default_rng(seed)
    s = reset(inst)
    while not s.terminal:
        mask = feasible_actions(s)
        assert mask.allowed.any()
        s, _ = step(s, int(rng.choice(mask.indices())))
    assert s.steps <= step_bound(n)
