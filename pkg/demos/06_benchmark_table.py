"""Render the published comparison table and a small live benchmark."""
from cvrpsuite.bench import (BenchmarkRun, emit_table, inconsistent_published_gaps,
                             published_rows, run_benchmark)
from cvrpsuite.data import optimum_registry

md, _, _ = emit_table(published_rows())
print(md)

# one published gap does not follow from its own mean
for solver, name, printed, computed in inconsistent_published_gaps():
    print(f"{solver} on {name}: printed {printed}%, mean implies {computed:.1f}%")

reg = optimum_registry()
rows = [run_benchmark(BenchmarkRun("CMT1", s, repetitions=2, budget=5.0), reg)
        for s in ("savings", "gls")]
print(emit_table(rows)[0])
