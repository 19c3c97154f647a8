"""The MTZ model, its LP text, and branch-and-bound against the brute-force oracle."""
import time

from cvrpsuite.env import random_instance
from cvrpsuite.exact import brute_force_optimal, build_mtz_model, export_lp, solve_branch_and_bound

inst = random_instance(7, 9, 20, seed=4, name="rand7")
model = build_mtz_model(inst)

# the first lines of the .lp file; any LP-format reader can load the whole text
print("\n".join(export_lp(model).splitlines()[:8]))
print("...")

t = time.perf_counter()
res = solve_branch_and_bound(model)
print(f"b&b: {res.status} cost {res.solution.cost:.4f} nodes {res.nodes} "
      f"root bound {res.root_bound:.4f} ({time.perf_counter() - t:.2f}s)")

oracle = brute_force_optimal(inst)
print(f"brute force: {oracle.cost:.4f}", oracle.routes)

# the incumbent sequence only ever improves
print("incumbents:", [round(c, 3) for c in (s.cost for s in res.incumbents)])

# with a tiny budget the search stops early and reports what it has
print(solve_branch_and_bound(build_mtz_model(random_instance(12, 9, 20, seed=1)), budget=0.5).status)
