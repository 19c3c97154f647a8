"""The ten acceptance criteria, one test each.

Criteria 7-9 share one set of desk-scale training runs, built once per module
(about ten minutes on one CPU core). Criterion 4 runs ten 60 s searches.
Every test records a PASS/FAIL line that is repeated in the terminal summary.
"""
import dataclasses
from pathlib import Path

import numpy as np
import pytest

from cvrpsuite.bench import emit_table, inconsistent_published_gaps, published_rows
from cvrpsuite.data import CMT_NAMES, load_cmt, optimum_registry, published_results
from cvrpsuite.env import (episode_reward, episode_solution, feasible_actions, random_instance,
                           random_instances, random_policy, reset, step, step_bound)
from cvrpsuite.exact import OPTIMAL_STATUS, brute_force_optimal, build_mtz_model, solve_branch_and_bound
from cvrpsuite.heuristics import guided_local_search
from cvrpsuite.instance import gap, parse_cvrplib, to_cvrplib, validate
from cvrpsuite.policy import (TSP, TrainConfig, gradient_check, greedy_costs, plateau_epoch,
                              rollout, train_overfit, train_reinforce, transfer_init)
from cvrpsuite.policy.network import init_params

GOLDEN = Path(__file__).parent / "data" / "golden_table1.md"

# desk scale: library defaults except the optimizer (Adam, same step size 1e-4)
DESK = TrainConfig(optimizer="adam")
GENERIC_EPOCHS = 50
PLATEAU_EPOCHS = 100


def test_01_branch_and_bound_matches_brute_force(verdict):
    rng = np.random.default_rng(2024)
    agree = 0
    for k in range(20):
        n = int(rng.integers(4, 9))
        inst = random_instance(n, 9, int(rng.integers(10, 31)), seed=1000 + k)
        res = solve_branch_and_bound(build_mtz_model(inst))
        oracle = brute_force_optimal(inst)
        if res.status == OPTIMAL_STATUS and abs(res.solution.cost - oracle.cost) <= 1e-6:
            agree += 1
    assert verdict(1, agree == 20, f"{agree}/20 instances agree with brute force")


def test_02_gap_metric_reproduction(verdict):
    reg = optimum_registry()
    pub = published_results()
    worst, checked, flagged = 0.0, 0, []
    for row in pub["rows"]:
        for name, mean, printed in zip(pub["instances"], row["mean"], row["gap_pct"]):
            computed = 100 * gap(mean, reg[name])
            if row["solver"] == "AMPL + Gurobi" and name == "CMT1":
                flagged.append((printed, computed))
                continue
            worst = max(worst, abs(computed - printed))
            checked += 1
    bad = inconsistent_published_gaps()
    ok = (checked == 19 and worst <= 0.1 and len(flagged) == 1
          and round(flagged[0][1], 1) == 4.5 and [(b[0], b[1]) for b in bad] == [("AMPL + Gurobi", "CMT1")])
    assert verdict(2, ok, f"{checked} cells within {worst:.3f} pp; exact CMT1 printed "
                          f"{flagged[0][0]}% vs computed {flagged[0][1]:.1f}% flagged")


def test_03_parser_headers_and_round_trip(verdict):
    expected = {"CMT1": (50, 160), "CMT2": (75, 140), "CMT3": (100, 200), "CMT11": (120, 200)}
    got, stable = {}, True
    for name in CMT_NAMES:
        inst = load_cmt(name)
        got[name] = (inst.n, inst.capacity)
        text = to_cvrplib(inst)
        again = parse_cvrplib(text)
        stable = stable and again == inst and to_cvrplib(again) == text
    assert verdict(3, got == expected and stable, f"headers {got}, byte-stable={stable}")


@pytest.mark.slow
def test_04_gls_on_cmt1(verdict):
    inst = load_cmt("CMT1")
    opt = optimum_registry()["CMT1"]
    gaps = []
    for seed in range(10):
        sol = guided_local_search(inst, 60.0, seed=seed)
        assert validate(inst, sol).feasible
        gaps.append(gap(sol.cost, opt))
    good = sum(g <= 0.10 for g in gaps)
    assert verdict(4, good >= 9, f"{good}/10 runs within 10%; gaps % "
                                 f"{[round(100 * g, 1) for g in gaps]}")


def test_05_random_rollouts(verdict):
    rng = np.random.default_rng(5)
    failures = 0
    for k in range(1000):
        n = int(rng.integers(5, 31))
        inst = random_instance(n, int(rng.integers(1, 10)), int(rng.integers(9, 40)), seed=50_000 + k)
        choose = random_policy(rng)
        s = reset(inst)
        while not s.terminal and s.steps <= step_bound(n):
            s, _ = step(s, choose(s, feasible_actions(s)))
        sol = episode_solution(s) if s.terminal else None
        if (sol is None or s.steps > step_bound(n) or not validate(inst, sol).feasible
                or abs(-episode_reward(s.distance_so_far) - sol.cost) > 1e-9):
            failures += 1
    assert verdict(5, failures == 0, f"{1000 - failures}/1000 episodes bounded, feasible, reward = -cost")


def test_06_gradient_oracle(verdict):
    err = gradient_check()
    mutated = gradient_check(corrupt="enc1.W1")
    ok = err < 1e-3 and mutated > 1e-3
    assert verdict(6, ok, f"max relative error {err:.2e}; mutated control {mutated:.2e}")


# --
# desk-scale training, shared by criteria 7-9


@pytest.fixture(scope="module")
def desk_runs():
    snap = {}

    def keep(epoch, result):
        if epoch == GENERIC_EPOCHS - 1:
            snap["params"] = result.params.copy()

    generic = train_reinforce(dataclasses.replace(DESK, epochs=PLATEAU_EPOCHS), on_epoch=keep)
    fixed = random_instance(DESK.n_customers, DESK.demand_max, DESK.capacity, seed=123, name="fixed20")
    overfit = train_overfit(dataclasses.replace(DESK, epochs=PLATEAU_EPOCHS), fixed)
    tsp = train_reinforce(dataclasses.replace(DESK, problem=TSP, epochs=GENERIC_EPOCHS))
    reused = train_reinforce(dataclasses.replace(DESK, epochs=GENERIC_EPOCHS),
                             params=transfer_init(tsp.params, DESK.net_config(), DESK.seed))
    return dict(generic=generic, generic50=snap["params"], fixed=fixed, overfit=overfit, reused=reused)


@pytest.mark.slow
def test_07_desk_scale_learning_signal(desk_runs, verdict):
    held_out = random_instances(256, DESK.n_customers, DESK.demand_max, DESK.capacity, seed=777)
    before = greedy_costs(init_params(DESK.net_config(), DESK.seed), held_out).mean()
    after = greedy_costs(desk_runs["generic50"], held_out).mean()
    drop = 1 - after / before
    assert verdict(7, drop >= 0.10, f"held-out greedy cost {before:.3f} -> {after:.3f} "
                                    f"after {GENERIC_EPOCHS} epochs ({100 * drop:.1f}% lower)")


@pytest.mark.slow
def test_08_overfit_plateaus_first(desk_runs, verdict):
    over = plateau_epoch(desk_runs["overfit"].epoch_means())
    gen = plateau_epoch(desk_runs["generic"].epoch_means())
    # a run that never settles has not plateaued within the horizon
    ok = over is not None and (gen is None or over < gen)
    fixed = desk_runs["fixed"]
    policy = rollout(desk_runs["overfit"].params, fixed).cost
    ref = guided_local_search(fixed, 5.0, seed=0).cost
    # reported only: the published overfit gap was 2.6% on CMT1
    assert verdict(8, ok, f"plateau epoch overfit={over} generic={gen} over {PLATEAU_EPOCHS} epochs; "
                          f"overfit greedy {policy:.3f} vs gls {ref:.3f} "
                          f"(gap {100 * gap(policy, ref):.1f}%, reported)")


@pytest.mark.slow
def test_09_transfer_helps(desk_runs, verdict):
    reused = desk_runs["reused"].epoch_means()
    scratch = desk_runs["generic"].epoch_means()[:GENERIC_EPOCHS]
    wins = int((reused <= scratch).sum())
    ok = wins > GENERIC_EPOCHS / 2
    assert verdict(9, ok, f"reused <= scratch at {wins}/{GENERIC_EPOCHS} epochs "
                          f"(final {reused[-1]:.3f} vs {scratch[-1]:.3f})")


def test_10_table_emission(verdict):
    md, _, _ = emit_table(published_rows())
    ok = md == GOLDEN.read_text()
    assert verdict(10, ok and "60*" in md and "| ? |" in md, "rendered table matches the golden file")
