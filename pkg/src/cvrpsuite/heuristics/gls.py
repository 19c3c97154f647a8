"""Guided local search on top of the savings start."""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from ..instance import Instance, Solution
from .local_search import RouteSearch
from .savings import clarke_wright


@dataclass
class SearchState:
    current: Solution
    best: Solution
    penalties: np.ndarray
    lambda_gls: float
    iterations: int = 0
    # (seconds since start, best true cost) each time the best improves
    trajectory: list[tuple[float, float]] = field(default_factory=list)


def gls_lambda(sol: Solution, alpha: float = 0.1) -> float:
    n_edges = sum(len(r) + 1 for r in sol.routes)
    return alpha * sol.cost / n_edges


def guided_local_search(inst: Instance, budget: float, seed: int = 0,
                        max_iterations: int | None = None,
                        state_out: list | None = None) -> Solution:
    """Savings start, then alternate descent on c_ij + lambda * p_ij with edge penalisation.

    One iteration is one descent to a local optimum followed by one
    penalisation step. The returned solution is the best found under the
    true (unpenalised) distances.
    """
    if not budget > 0:
        raise ValueError("budget must be positive")
    start_time = time.perf_counter()
    deadline = start_time + budget
    start = clarke_wright(inst)
    n1 = inst.n + 1
    state = SearchState(
        current=start,
        best=start,
        penalties=np.zeros((n1, n1), dtype=np.int64),
        lambda_gls=gls_lambda(start),
    )
    state.trajectory.append((0.0, start.cost))
    if state_out is not None:
        state_out.append(state)
    if max_iterations == 0:
        return start

    dist = inst.distances
    search = RouteSearch(inst, start.routes, seed=seed)
    best_cost = [start.cost]

    def track(s: RouteSearch):
        c = s.true_cost()
        if c < best_cost[0] - 1e-9:
            best_cost[0] = c
            state.best = s.solution()
            state.trajectory.append((time.perf_counter() - start_time, state.best.cost))

    lam = state.lambda_gls
    while True:
        if max_iterations is not None and state.iterations >= max_iterations:
            break
        finished = search.descend(deadline=deadline, on_move=track)
        if not finished:
            break
        state.iterations += 1
        # penalise the edges of maximal utility c_ij / (1 + p_ij)
        edges = sorted({(min(a, b), max(a, b)) for a, b in search.edges()})
        util = [dist[a, b] / (1 + state.penalties[a, b]) for a, b in edges]
        top = max(util)
        for (a, b), u in zip(edges, util):
            if u >= top - 1e-12:
                state.penalties[a, b] += 1
                state.penalties[b, a] = state.penalties[a, b]
                search.set_weight(a, b, dist[a, b] + lam * state.penalties[a, b])

    state.current = search.solution()
    return state.best


def write_improvement_log(trajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["seconds", "cost"])
        for t, c in trajectory:
            out.writerow([f"{t:.6f}", repr(c)])
