"""LP-relaxation branch-and-bound over the MTZ model.

Only the arc variables are branched on. The loads stay continuous: with
integral arcs the MTZ rows already rule out subtours and overloads.
"""
from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..instance import Solution, validate
from .model import MilpModel
from .simplex import OPTIMAL, TIME_LIMIT, TOL, DualSimplexLP

OPTIMAL_STATUS = "optimal"
LIMIT_FEASIBLE = "time-limit-feasible"
LIMIT_NONE = "time-limit-none"
INT_TOL = 1e-6
TRACE_EVERY = 1000


@dataclass(frozen=True)
class BnbNode:
    fixed_zero: frozenset = frozenset()
    fixed_one: frozenset = frozenset()
    lp_bound: float = -np.inf  # bound inherited from the parent until solved
    depth: int = 0
    warm: tuple | None = field(default=None, compare=False, repr=False)


@dataclass
class BnbResult:
    solution: Solution | None
    status: str
    bound: float  # best proven lower bound
    nodes: int = 0
    root_bound: float = np.nan
    # every incumbent found, in order (the savings seed first)
    incumbents: list = field(default_factory=list)

    def __iter__(self):
        # allows ``sol, status = solve_branch_and_bound(...)``
        return iter((self.solution, self.status))


def arcs_from_values(model: MilpModel, x) -> list[tuple[int, int]]:
    return [(i, j) for (i, j), k in model.edge_index.items() if x[k] > 0.5]


def routes_from_arcs(arcs, n: int) -> list[list[int]]:
    """Follow successors from the depot; raises if the arcs are not depot-anchored cycles."""
    succ = {}
    starts = []
    for i, j in sorted(arcs):
        if i == 0:
            starts.append(j)
        elif i in succ:
            raise ValueError(f"customer {i} has two successors")
        else:
            succ[i] = j
    routes, seen = [], set()
    for s in starts:
        route, c = [], s
        while c != 0:
            if c in seen:
                raise ValueError(f"customer {c} visited twice")
            seen.add(c)
            route.append(c)
            if c not in succ:
                raise ValueError(f"customer {c} has no successor")
            c = succ[c]
        routes.append(route)
    if len(seen) != n:
        missing = sorted(set(range(1, n + 1)) - seen)
        raise ValueError(f"customers {missing} lie on subtours detached from the depot")
    return routes


def extract_cycles(arcs) -> list[list[int]]:
    """Decompose an arc set with in = out degree 1 (depot excepted) into cycles."""
    succ: dict[int, list[int]] = {}
    for i, j in sorted(arcs):
        succ.setdefault(i, []).append(j)
    cycles = []
    remaining = {i: list(js) for i, js in succ.items()}
    for start in sorted(remaining):
        while remaining.get(start):
            cyc, c = [start], remaining[start].pop(0)
            while c != start:
                cyc.append(c)
                c = remaining[c].pop(0)
            cycles.append(cyc)
    return cycles


def valid_inequalities(model: MilpModel):
    """<= rows satisfied by every integer solution and at least as tight as the MTZ rows.

    Lifted MTZ rows (which imply the plain ones), load bounds lifted by
    neighbouring demands, and a lower bound on the number of vehicles.
    """
    inst = model.instance
    n, Q, q = inst.n, float(inst.capacity), inst.demands
    e, u = model.edge_index, model.load_index
    rows, rhs = [], []

    def row(coeffs, b):
        r = np.zeros(model.n_vars)
        for k, a in coeffs:
            r[k] += a
        rows.append(r)
        rhs.append(b)

    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i != j and q[i] + q[j] <= Q:
                row([(u[i], 1.0), (u[j], -1.0), (e[i, j], Q), (e[j, i], Q - q[i] - q[j])], Q - q[j])
    for i in range(1, n + 1):
        # load on arrival at i counts every predecessor's demand
        row([(u[i], -1.0)] + [(e[j, i], float(q[j])) for j in range(1, n + 1) if j != i], -float(q[i]))
        # room must remain for the successor
        row([(u[i], 1.0)] + [(e[i, j], float(q[j])) for j in range(1, n + 1) if j != i], Q)
        # a route's first customer carries only its own demand
        row([(u[i], 1.0), (e[0, i], Q - q[i])], Q)
    vehicles = int(np.ceil(inst.total_demand / Q - 1e-9))
    row([(e[0, j], -1.0) for j in range(1, n + 1)], -float(vehicles))
    return np.array(rows), np.array(rhs)


class _Search:
    def __init__(self, model: MilpModel, deadline, trace, strengthen=True):
        self.model = model
        self.deadline = deadline
        self.trace = trace
        A_eq, b_eq, A_ub, b_ub = model.matrices()
        if strengthen:
            # the lifted rows dominate the plain MTZ rows, which can then go
            A_ub, b_ub = valid_inequalities(model)
        self.lp = DualSimplexLP(model.objective, A_eq, b_eq, A_ub, b_ub)
        self.inst = model.instance
        self.n = self.inst.n
        q, Q = self.inst.demands, self.inst.capacity
        # arcs between two customers that cannot share a vehicle are never used
        self.always_zero = frozenset(
            k for (i, j), k in model.edge_index.items()
            if i and j and q[i] + q[j] > Q
        )
        self.out_arcs = {i: [] for i in range(self.n + 1)}
        self.in_arcs = {j: [] for j in range(self.n + 1)}
        for (i, j), k in model.edge_index.items():
            self.out_arcs[i].append(k)
            self.in_arcs[j].append(k)
        self.arc_of = {k: ij for ij, k in model.edge_index.items()}
        self.incumbent: Solution | None = None
        self.upper = np.inf
        self.incumbents = []
        self.nodes = 0

    def offer(self, sol: Solution):
        if validate(self.inst, sol):
            raise AssertionError("infeasible incumbent")
        if sol.cost < self.upper - 1e-9:
            self.incumbent, self.upper = sol, sol.cost
            self.incumbents.append(sol)

    def bounds_for(self, node: BnbNode):
        lo = self.model.lower.copy()
        up = self.model.upper.copy()
        zero = set(self.always_zero) | node.fixed_zero
        for k in node.fixed_one:
            i, j = self.arc_of[k]
            # fixing i -> j closes every other arc out of i and into j, and j -> i
            if i:
                zero.update(a for a in self.out_arcs[i] if a != k)
            if j:
                zero.update(a for a in self.in_arcs[j] if a != k)
            if i and j:
                zero.add(self.model.edge_index[j, i])
        up[list(zero)] = 0.0
        lo[list(node.fixed_one)] = 1.0
        return lo, up

    def solve_node(self, node: BnbNode):
        lo, up = self.bounds_for(node)
        if np.any(lo > up):
            return None
        res = self.lp.solve(lo, up, start=node.warm, deadline=self.deadline, tol=TOL)
        if res.status == TIME_LIMIT:
            raise TimeoutError
        if res.status != OPTIMAL:
            return None
        return res

    def branch_var(self, x):
        """Most fractional arc; ties go to the smallest (i, j)."""
        best_k, best_f = None, INT_TOL
        for (i, j), k in self.model.edge_index.items():  # already in (i, j) order
            f = min(x[k], 1.0 - x[k])
            if f > best_f + 1e-12:
                best_k, best_f = k, f
        return best_k

    def to_solution(self, x) -> Solution:
        routes = routes_from_arcs(arcs_from_values(self.model, x), self.n)
        return Solution.from_routes(self.inst, routes)


def solve_branch_and_bound(model: MilpModel, budget: float | None = None,
                           trace: Callable[[str], None] | None = None,
                           seed_incumbent: bool = True, strengthen: bool = True) -> BnbResult:
    """Solve the model to optimality or until ``budget`` seconds have elapsed.

    The search dives depth first (the child closer to the LP value first) and,
    when a dive ends, resumes from the open node with the smallest bound.
    """
    if budget is not None and not budget > 0:
        raise ValueError("budget must be positive")
    deadline = None if budget is None else time.perf_counter() + budget
    s = _Search(model, deadline, trace, strengthen)
    if seed_incumbent:
        from ..heuristics import clarke_wright
        s.offer(clarke_wright(model.instance))

    counter = itertools.count()
    open_heap: list = []  # (parent bound, tiebreak, node)
    root_bound = np.nan
    dive: BnbNode | None = BnbNode()
    node = None

    try:
        while True:
            if dive is None:
                # drop nodes that can no longer beat the incumbent
                while open_heap and open_heap[0][0] >= s.upper - 1e-9:
                    heapq.heappop(open_heap)
                if not open_heap:
                    break
                _, _, dive = heapq.heappop(open_heap)
            node = dive
            dive = None
            if deadline is not None and time.perf_counter() > deadline:
                raise TimeoutError
            if node.lp_bound >= s.upper - 1e-9:
                continue
            s.nodes += 1
            if trace is not None and s.nodes % TRACE_EVERY == 0:
                lb = min([node.lp_bound] + [e[0] for e in open_heap])
                trace(f"nodes={s.nodes} incumbent={s.upper:.6f} bound={lb:.6f}")
            res = s.solve_node(node)
            if res is None:
                continue
            bound = res.objective
            if s.nodes == 1:
                root_bound = bound
            if bound >= s.upper - 1e-9:
                continue
            k = s.branch_var(res.x)
            if k is None:
                s.offer(s.to_solution(res.x))
                continue
            warm = (res.basis, res.at_upper)
            one = BnbNode(node.fixed_zero, node.fixed_one | {k}, bound, node.depth + 1, warm)
            zero = BnbNode(node.fixed_zero | {k}, node.fixed_one, bound, node.depth + 1, warm)
            first, second = (one, zero) if res.x[k] >= 0.5 else (zero, one)
            heapq.heappush(open_heap, (bound, next(counter), second))
            dive = first
            node = None
    except TimeoutError:
        # the node being solved when time ran out is still open
        for pending in (node, dive):
            if pending is not None:
                open_heap.append((pending.lp_bound, next(counter), pending))
        best_open = min((e[0] for e in open_heap), default=s.upper)
        bound = min(best_open, s.upper)
        status = LIMIT_FEASIBLE if s.incumbent is not None else LIMIT_NONE
        return BnbResult(s.incumbent, status, bound, s.nodes, root_bound, s.incumbents)

    if s.incumbent is None:
        raise RuntimeError("model has no feasible solution")
    return BnbResult(s.incumbent, OPTIMAL_STATUS, s.upper, s.nodes, root_bound, s.incumbents)
