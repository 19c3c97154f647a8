"""Clarke-Wright savings construction (parallel variant)."""
from __future__ import annotations

from dataclasses import dataclass

from ..instance import Instance, Solution


@dataclass(frozen=True, order=True)
class Saving:
    i: int
    j: int
    value: float


def compute_savings(inst: Instance) -> list[Saving]:
    """All pairwise savings s_ij = c_0i + c_0j - c_ij, largest first.

    Ties keep the smaller (i, j) first.
    """
    d = inst.distances
    out = []
    for i in range(1, inst.n + 1):
        for j in range(i + 1, inst.n + 1):
            out.append(Saving(i, j, float(d[0, i] + d[0, j] - d[i, j])))
    out.sort(key=lambda s: (-s.value, s.i, s.j))
    return out


def clarke_wright(inst: Instance) -> Solution:
    demand = inst.demands
    route_of = {c: [c] for c in range(1, inst.n + 1)}
    load = {id(r): demand[r[0]] for r in route_of.values()}

    for s in compute_savings(inst):
        if not s.value > 0:
            break
        ri, rj = route_of[s.i], route_of[s.j]
        if ri is rj:
            continue
        if load[id(ri)] + load[id(rj)] > inst.capacity:
            continue
        i_last, i_first = ri[-1] == s.i, ri[0] == s.i
        j_last, j_first = rj[-1] == s.j, rj[0] == s.j
        if i_last and j_first:
            merged = ri + rj
        elif i_first and j_last:
            merged = rj + ri
        elif i_first and j_first:
            merged = ri[::-1] + rj
        elif i_last and j_last:
            merged = ri + rj[::-1]
        else:
            continue  # one of them is interior
        load[id(merged)] = load.pop(id(ri)) + load.pop(id(rj))
        for c in merged:
            route_of[c] = merged

    seen, routes = set(), []
    for c in range(1, inst.n + 1):
        r = route_of[c]
        if id(r) not in seen:
            seen.add(id(r))
            routes.append(r)
    return Solution.from_routes(inst, routes)
