"""Repeated solver runs under a wall-clock budget."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..data import CMT_NAMES, load_cmt
from ..instance import Instance, Solution, gap, read_cvrplib, validate

SOLVERS = ("exact", "savings", "gls", "rl-greedy", "rl-sample", "rl-beam")
DEFAULT_BEAM = 64


class BenchConfigError(ValueError):
    pass


@dataclass(frozen=True)
class BenchmarkRun:
    instance: str  # bundled CMT name or a path to a CVRPLib file
    solver: str
    repetitions: int = 10
    budget: float = 60.0
    seed_base: int = 0

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise BenchConfigError(f"unknown solver {self.solver!r}; choose from {SOLVERS}")
        if self.repetitions < 1:
            raise BenchConfigError("repetitions must be at least 1")
        if not self.budget > 0:
            raise BenchConfigError("budget must be positive")


@dataclass
class ResultRow:
    instance: str
    solver: str
    mean_cost: float | None
    gap: float | None  # fraction; None when the optimum is unknown
    mean_time: float | None
    limit_hit: bool
    budget: float | None = None
    costs: list[float] = field(default_factory=list)
    times: list[float] = field(default_factory=list)
    failed: bool = False
    error: str = ""
    solutions: list[Solution] = field(default_factory=list, repr=False)


def resolve_instance(name: str) -> Instance:
    if name in CMT_NAMES:
        return load_cmt(name)
    path = Path(name)
    if not path.exists():
        raise BenchConfigError(f"instance {name!r} is neither bundled nor a file")
    return read_cvrplib(path)


def solve_once(inst: Instance, solver: str, budget: float, seed: int, params=None,
               beam: int = DEFAULT_BEAM) -> tuple[Solution | None, bool]:
    """One run; returns (solution, stopped-by-the-budget)."""
    if solver == "savings":
        from ..heuristics import clarke_wright
        return clarke_wright(inst), False
    if solver == "gls":
        from ..heuristics import guided_local_search
        return guided_local_search(inst, budget, seed=seed), True
    if solver == "exact":
        from ..exact import OPTIMAL_STATUS, build_mtz_model, solve_branch_and_bound
        res = solve_branch_and_bound(build_mtz_model(inst), budget)
        return res.solution, res.status != OPTIMAL_STATUS
    if solver.startswith("rl-"):
        if params is None:
            raise BenchConfigError(f"solver {solver} needs policy weights")
        from ..policy.decode import BEAM, GREEDY, SAMPLE, rollout
        mode = {"rl-greedy": GREEDY, "rl-sample": SAMPLE, "rl-beam": BEAM}[solver]
        return rollout(params, inst, mode=mode, seed=seed, width=beam), False
    raise BenchConfigError(f"unknown solver {solver!r}")


def run_benchmark(spec: BenchmarkRun, registry: dict, params=None,
                  beam: int = DEFAULT_BEAM) -> ResultRow:
    """Run ``spec.repetitions`` times with seeds seed_base + i; time the solve call only."""
    inst = resolve_instance(spec.instance)
    optimum = registry.get(inst.name, registry.get(spec.instance))
    row = ResultRow(spec.instance, spec.solver, None, None, None, False, budget=spec.budget)
    for i in range(spec.repetitions):
        seed = spec.seed_base + i
        t0 = time.perf_counter()
        try:
            sol, hit = solve_once(inst, spec.solver, spec.budget, seed, params, beam)
        except BenchConfigError:
            raise
        except Exception as exc:  # a crashing solver fails its row, the benchmark goes on
            row.failed = True
            row.error = f"{type(exc).__name__}: {exc}"
            return row
        elapsed = time.perf_counter() - t0
        if sol is None or validate(inst, sol):
            row.failed = True
            row.error = "no feasible solution" if sol is None else "infeasible solution"
            return row
        row.costs.append(sol.cost)
        row.times.append(elapsed)
        row.solutions.append(sol)
        row.limit_hit = row.limit_hit or hit
    row.mean_cost = float(np.mean(row.costs))
    row.mean_time = float(np.mean(row.times))
    if optimum is not None and not (isinstance(optimum, float) and math.isnan(optimum)):
        row.gap = gap(row.mean_cost, float(optimum))
    return row
