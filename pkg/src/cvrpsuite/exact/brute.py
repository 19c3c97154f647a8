"""Exhaustive oracle for tiny instances."""
from __future__ import annotations

import itertools

from ..instance import Instance, Solution

MAX_BRUTE_FORCE_N = 9
TIE_TOL = 1e-9


class InstanceTooLargeError(ValueError):
    pass


def _best_route(members: tuple[int, ...], d) -> tuple[float, list[int]]:
    """Cheapest ordering of one route; the lexicographically smallest wins ties."""
    best_cost, best = float("inf"), None
    for perm in itertools.permutations(members):
        # a route and its reverse cost the same, keep the smaller of the two
        if len(perm) > 1 and perm[0] > perm[-1]:
            continue
        cost, prev = 0.0, 0
        for c in perm:
            cost += d[prev][c]
            prev = c
        cost += d[prev][0]
        if cost < best_cost - TIE_TOL:
            best_cost, best = cost, list(perm)
    return best_cost, best


def brute_force_optimal(inst: Instance) -> Solution:
    """Minimum-cost solution over every partition of the customers into routes.

    Ties go to the lexicographically smallest sorted list of routes.
    """
    n = inst.n
    if n > MAX_BRUTE_FORCE_N:
        raise InstanceTooLargeError(f"brute force is limited to n <= {MAX_BRUTE_FORCE_N}, got {n}")
    d = inst.distances.tolist()
    q = inst.demands
    Q = inst.capacity

    routes = {}  # customer tuple -> (cost, route), capacity-feasible subsets only
    customers = list(range(1, n + 1))
    for k in range(1, n + 1):
        for members in itertools.combinations(customers, k):
            if sum(q[c] for c in members) <= Q:
                routes[members] = _best_route(members, d)

    best = [float("inf"), None]

    def extend(remaining: tuple[int, ...], chosen: list, cost: float):
        if cost > best[0] + TIE_TOL:
            return
        if not remaining:
            cand = sorted(r for _, r in chosen)
            if cost < best[0] - TIE_TOL or (best[1] is not None and cand < best[1]):
                best[0], best[1] = cost, cand
            return
        first, rest = remaining[0], remaining[1:]
        # the block holding the smallest unassigned customer
        for k in range(len(rest) + 1):
            for others in itertools.combinations(rest, k):
                block = (first,) + others
                if block not in routes:
                    continue
                rc, route = routes[block]
                left = tuple(c for c in rest if c not in others)
                chosen.append((rc, route))
                extend(left, chosen, cost + rc)
                chosen.pop()

    extend(tuple(customers), [], 0.0)
    return Solution.from_routes(inst, best[1])
