"""Savings, local search and guided local search on CMT1."""
from cvrpsuite.data import load_cmt, optimum_registry
from cvrpsuite.heuristics import clarke_wright, guided_local_search, local_search
from cvrpsuite.instance import gap, validate

inst = load_cmt("CMT1")
opt = optimum_registry()["CMT1"]

cw = clarke_wright(inst)
ls = local_search(inst, cw, budget=2.0)
gls = guided_local_search(inst, budget=10.0, seed=0)

for label, sol in (("savings", cw), ("local search", ls), ("gls 10s", gls)):
    assert validate(inst, sol).feasible
    print(f"{label:>12}: {sol.cost:7.1f}  gap {100 * gap(sol.cost, opt):4.1f}%  routes {len(sol.routes)}")
