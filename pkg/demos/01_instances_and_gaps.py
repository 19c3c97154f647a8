"""Load the bundled CMT instances, check a solution and compute gaps.

Run with ``python3 demos/01_instances_and_gaps.py``.
"""
from cvrpsuite.data import CMT_NAMES, load_cmt, optimum_registry
from cvrpsuite.heuristics import clarke_wright
from cvrpsuite.instance import Solution, gap, to_cvrplib, validate

registry = optimum_registry()

for name in CMT_NAMES:
    inst = load_cmt(name)
    print(f"{name}: n={inst.n} Q={inst.capacity} best known {registry[name]}")

# the text form is byte-stable, so parse(write(x)) == x
cmt1 = load_cmt("CMT1")
print(to_cvrplib(cmt1).splitlines()[:6])

# a savings solution is always feasible
sol = clarke_wright(cmt1)
report = validate(cmt1, sol)
print("savings on CMT1:", round(sol.cost, 1), "routes", len(sol.routes), "feasible", report.feasible)
print("gap %.1f%%" % (100 * gap(sol.cost, registry["CMT1"])))

# validate never raises, it lists what went wrong instead
broken = Solution([list(range(1, 51))], 0.0)
for v in validate(cmt1, broken).violations:
    print("  violation:", v)
