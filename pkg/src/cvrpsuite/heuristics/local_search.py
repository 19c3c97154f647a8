"""Neighbourhood descent over a set of routes.

Five neighbourhoods are scanned in a fixed order, best improvement within
each: intra-route 2-opt, intra-route Or-opt (chains of 1-3), inter-route
relocate, inter-route swap and 2-opt* (tail exchange). Every candidate move
is capacity-checked before it is applied.
"""
from __future__ import annotations

import random
import time

import numpy as np

from ..instance import Instance, Solution

EPS = 1e-9
NEIGHBORHOODS = ("two_opt", "or_opt", "relocate", "swap", "two_opt_star")
# full neighbourhoods up to this many customers, candidate lists above
CANDIDATE_THRESHOLD = 30
N_CANDIDATES = 15


def candidate_lists(inst: Instance, k: int = N_CANDIDATES) -> list[list[int]]:
    """For every customer, its k nearest other customers (all of them for small n)."""
    d = inst.distances
    n = inst.n
    cand = [[]]
    for u in range(1, n + 1):
        others = [v for v in range(1, n + 1) if v != u]
        if n > CANDIDATE_THRESHOLD:
            others.sort(key=lambda v: (d[u, v], v))
            others = others[:k]
        cand.append(others)
    return cand


def two_opt_move(route: list[int], i: int, j: int) -> list[int]:
    """Reverse route[i..j] (inclusive); applying it twice restores the route."""
    return route[:i] + route[i : j + 1][::-1] + route[j + 1 :]


class RouteSearch:
    """Mutable search state: routes, loads and a (possibly penalised) cost matrix."""

    def __init__(self, inst: Instance, routes, weights=None, seed: int = 0):
        self.inst = inst
        self.demand = [float(q) for q in inst.demands]
        self.capacity = float(inst.capacity)
        self.dist = inst.distances.tolist()
        w = inst.distances if weights is None else weights
        self.w = np.asarray(w, dtype=float).tolist()
        self.routes = [list(r) for r in routes if r]
        self.cand = candidate_lists(inst)
        self.full = inst.n <= CANDIDATE_THRESHOLD
        rng = random.Random(seed)
        self.order = list(range(1, inst.n + 1))
        rng.shuffle(self.order)
        self._reindex()

    # -- bookkeeping

    def _reindex(self):
        self.routes = [r for r in self.routes if r]
        self.where = {}
        for ri, r in enumerate(self.routes):
            for k, c in enumerate(r):
                self.where[c] = (ri, k)
        self.loads = [sum(self.demand[c] for c in r) for r in self.routes]

    def set_weight(self, i: int, j: int, value: float):
        self.w[i][j] = value
        self.w[j][i] = value

    def route_cost(self, r, mat=None) -> float:
        m = self.w if mat is None else mat
        prev, total = 0, 0.0
        for c in r:
            total += m[prev][c]
            prev = c
        return total + m[prev][0] if r else 0.0

    def true_cost(self) -> float:
        return sum(self.route_cost(r, self.dist) for r in self.routes)

    def solution(self) -> Solution:
        return Solution.from_routes(self.inst, self.routes)

    def edges(self):
        for r in self.routes:
            prev = 0
            for c in r:
                yield prev, c
                prev = c
            yield prev, 0

    # -- neighbourhoods; each returns (delta, move) for the best improving move

    def best_two_opt(self):
        w = self.w
        best = (-EPS, None)
        for ri, r in enumerate(self.routes):
            m = len(r)
            if m < 2:
                continue
            for i in range(m - 1):
                p = r[i - 1] if i > 0 else 0
                a = r[i]
                wpa = w[p][a]
                for j in range(i + 1, m):
                    b = r[j]
                    q = r[j + 1] if j + 1 < m else 0
                    delta = w[p][b] + w[a][q] - wpa - w[b][q]
                    if delta < best[0]:
                        best = (delta, ("two_opt", ri, i, j))
        return best

    def best_or_opt(self):
        w = self.w
        best = (-EPS, None)
        for ri, r in enumerate(self.routes):
            m = len(r)
            for k in (1, 2, 3):
                if k >= m:
                    break
                for i in range(m - k + 1):
                    a, b = r[i], r[i + k - 1]
                    p = r[i - 1] if i > 0 else 0
                    q = r[i + k] if i + k < m else 0
                    removal = w[p][q] - w[p][a] - w[b][q]
                    rest = r[:i] + r[i + k :]
                    prev = 0
                    for pos in range(len(rest) + 1):
                        nxt = rest[pos] if pos < len(rest) else 0
                        if pos != i:
                            delta = removal + w[prev][a] + w[b][nxt] - w[prev][nxt]
                            if delta < best[0]:
                                best = (delta, ("or_opt", ri, i, k, pos))
                        prev = nxt
        return best

    def _removal_gain(self, c):
        ri, k = self.where[c]
        r = self.routes[ri]
        p = r[k - 1] if k > 0 else 0
        q = r[k + 1] if k + 1 < len(r) else 0
        w = self.w
        return w[p][q] - w[p][c] - w[c][q], p, q

    def best_relocate(self):
        w, routes, where, loads, cap = self.w, self.routes, self.where, self.loads, self.capacity
        best = (-EPS, None)
        for u in self.order:
            ru, _ = where[u]
            qu = self.demand[u]
            removal, _, _ = self._removal_gain(u)
            # into a fresh route of its own
            if len(routes[ru]) > 1:
                delta = removal + w[0][u] + w[u][0]
                if delta < best[0]:
                    best = (delta, ("relocate", u, len(routes), 0))
            if self.full:
                for rv, r in enumerate(routes):
                    if rv == ru or loads[rv] + qu > cap:
                        continue
                    prev = 0
                    for pos in range(len(r) + 1):
                        nxt = r[pos] if pos < len(r) else 0
                        delta = removal + w[prev][u] + w[u][nxt] - w[prev][nxt]
                        if delta < best[0]:
                            best = (delta, ("relocate", u, rv, pos))
                        prev = nxt
            else:
                for v in self.cand[u]:
                    rv, kv = where[v]
                    if rv == ru or loads[rv] + qu > cap:
                        continue
                    r = routes[rv]
                    for pos in (kv, kv + 1):
                        prev = r[pos - 1] if pos > 0 else 0
                        nxt = r[pos] if pos < len(r) else 0
                        delta = removal + w[prev][u] + w[u][nxt] - w[prev][nxt]
                        if delta < best[0]:
                            best = (delta, ("relocate", u, rv, pos))
        return best

    def best_swap(self):
        w, routes, where, loads, cap, dem = (
            self.w, self.routes, self.where, self.loads, self.capacity, self.demand)
        best = (-EPS, None)
        for u in self.order:
            ru, ku = where[u]
            r1 = routes[ru]
            pu = r1[ku - 1] if ku > 0 else 0
            nu = r1[ku + 1] if ku + 1 < len(r1) else 0
            base_u = w[pu][u] + w[u][nu]
            for v in self.cand[u]:
                rv, kv = where[v]
                if rv <= ru if self.full else rv == ru:
                    continue
                if loads[ru] - dem[u] + dem[v] > cap or loads[rv] - dem[v] + dem[u] > cap:
                    continue
                r2 = routes[rv]
                pv = r2[kv - 1] if kv > 0 else 0
                nv = r2[kv + 1] if kv + 1 < len(r2) else 0
                delta = (w[pu][v] + w[v][nu] - base_u
                         + w[pv][u] + w[u][nv] - w[pv][v] - w[v][nv])
                if delta < best[0]:
                    best = (delta, ("swap", u, v))
        return best

    def _prefix_loads(self, r):
        out, s = [0.0], 0.0
        for c in r:
            s += self.demand[c]
            out.append(s)
        return out

    def best_two_opt_star(self):
        w, routes, cap = self.w, self.routes, self.capacity
        best = (-EPS, None)
        pref = [self._prefix_loads(r) for r in routes]
        if self.full:
            for ra in range(len(routes)):
                A = routes[ra]
                for rb in range(ra + 1, len(routes)):
                    B = routes[rb]
                    la, lb = pref[ra][-1], pref[rb][-1]
                    for i in range(len(A) + 1):
                        x = A[i - 1] if i > 0 else 0
                        x2 = A[i] if i < len(A) else 0
                        wxx = w[x][x2]
                        for j in range(len(B) + 1):
                            if (i == 0 and j == 0) or (i == len(A) and j == len(B)):
                                continue
                            if pref[ra][i] + lb - pref[rb][j] > cap:
                                continue
                            if pref[rb][j] + la - pref[ra][i] > cap:
                                continue
                            y = B[j - 1] if j > 0 else 0
                            y2 = B[j] if j < len(B) else 0
                            delta = w[x][y2] + w[y][x2] - wxx - w[y][y2]
                            if delta < best[0]:
                                best = (delta, ("two_opt_star", ra, i, rb, j))
        else:
            where = self.where
            for u in self.order:
                ra, ku = where[u]
                A = routes[ra]
                i = ku + 1  # tail of A starts after u
                x2 = A[i] if i < len(A) else 0
                for v in self.cand[u]:
                    rb, kv = where[v]
                    if rb == ra:
                        continue
                    B = routes[rb]
                    j = kv  # new edge u -> v, B's tail starts at v
                    if pref[ra][i] + pref[rb][-1] - pref[rb][j] > cap:
                        continue
                    if pref[rb][j] + pref[ra][-1] - pref[ra][i] > cap:
                        continue
                    y = B[j - 1] if j > 0 else 0
                    delta = w[u][v] + w[y][x2] - w[u][x2] - w[y][v]
                    if delta < best[0]:
                        best = (delta, ("two_opt_star", ra, i, rb, j))
        return best

    # -- application

    def apply(self, move):
        kind = move[0]
        routes = self.routes
        if kind == "two_opt":
            _, ri, i, j = move
            routes[ri] = two_opt_move(routes[ri], i, j)
        elif kind == "or_opt":
            _, ri, i, k, pos = move
            r = routes[ri]
            chain = r[i : i + k]
            rest = r[:i] + r[i + k :]
            routes[ri] = rest[:pos] + chain + rest[pos:]
        elif kind == "relocate":
            _, u, rv, pos = move
            ru, ku = self.where[u]
            if rv == len(routes):
                routes.append([u])
            else:
                routes[rv].insert(pos, u)
            routes[ru].pop(ku)
        elif kind == "swap":
            _, u, v = move
            ru, ku = self.where[u]
            rv, kv = self.where[v]
            routes[ru][ku], routes[rv][kv] = v, u
        elif kind == "two_opt_star":
            _, ra, i, rb, j = move
            A, B = routes[ra], routes[rb]
            routes[ra], routes[rb] = A[:i] + B[j:], B[:j] + A[i:]
        else:
            raise ValueError(kind)
        self._reindex()

    def best_move(self):
        """First neighbourhood (in fixed order) with an improving move, best move in it."""
        for name in NEIGHBORHOODS:
            delta, move = getattr(self, "best_" + name)()
            if move is not None:
                return delta, move
        return 0.0, None

    def descend(self, deadline=None, max_moves=None, on_move=None) -> bool:
        """Apply improving moves until a local optimum. Returns False if cut short."""
        moves = 0
        while True:
            if deadline is not None and time.perf_counter() >= deadline:
                return False
            if max_moves is not None and moves >= max_moves:
                return False
            _, move = self.best_move()
            if move is None:
                return True
            self.apply(move)
            moves += 1
            if on_move is not None:
                on_move(self)


def local_search(inst: Instance, start: Solution, budget: float | None = None,
                 seed: int = 0, max_iterations: int | None = None) -> Solution:
    """Descend from ``start`` on the true objective; never returns anything worse.

    ``max_iterations`` caps the number of applied moves, which makes the result
    independent of machine speed.
    """
    search = RouteSearch(inst, start.routes, seed=seed)
    deadline = None if budget is None else time.perf_counter() + budget
    search.descend(deadline=deadline, max_moves=max_iterations)
    result = search.solution()
    return result if result.cost <= start.cost else start
