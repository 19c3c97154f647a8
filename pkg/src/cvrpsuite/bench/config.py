"""Config-driven benchmark matrix: instances x solvers, written to an output directory.

Config keys (JSON):
    instances        list of bundled CMT names or CVRPLib paths
    solvers          list of solver ids
    repetitions      runs per cell (default 10)
    budget           seconds per run (default 60), or
    budgets          {solver: seconds} overriding ``budget`` per solver
    seed_base        default 0
    optimum_registry path to a JSON {name: optimum} or {name: {"optimum": x}}
    weights          policy weights for the rl-* solvers
    beam_width       default 64
    workers          concurrent cells (default 1)
    curves           {output name: [curve csv, ...]} aligned into curves/<name>.csv
    output_dir       default "bench-out"
"""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from ..data import optimum_registry
from ..instance import format_solution
from .harness import DEFAULT_BEAM, BenchConfigError, BenchmarkRun, run_benchmark
from .tables import emit_curves, emit_table

_KEYS = {"instances", "solvers", "repetitions", "budget", "budgets", "seed_base",
         "optimum_registry", "weights", "beam_width", "workers", "curves", "output_dir"}


def load_registry(path=None) -> dict:
    if path is None:
        return optimum_registry()
    raw = json.loads(Path(path).read_text())
    return {k: (v["optimum"] if isinstance(v, dict) else v) for k, v in raw.items()}


def plan(cfg: dict) -> list[BenchmarkRun]:
    unknown = set(cfg) - _KEYS
    if unknown:
        raise BenchConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("instances", "solvers"):
        if not cfg.get(key):
            raise BenchConfigError(f"config needs a non-empty {key!r} list")
    budgets = cfg.get("budgets", {})
    return [BenchmarkRun(name, solver, cfg.get("repetitions", 10),
                         budgets.get(solver, cfg.get("budget", 60.0)), cfg.get("seed_base", 0))
            for name in cfg["instances"] for solver in cfg["solvers"]]


def _cell(args):
    spec, registry, weights, beam = args
    params = None
    if weights is not None and spec.solver.startswith("rl-"):
        from ..policy.weights import load_params
        params = load_params(weights)
    return run_benchmark(spec, registry, params=params, beam=beam)


def run_config(cfg: dict, out_dir=None):
    """Run every cell of the matrix and write results.md, results.csv, timing.csv,
    solutions/*.sol and curves/*.csv. Returns the result rows in config order."""
    runs = plan(cfg)
    out = Path(out_dir or cfg.get("output_dir", "bench-out"))
    registry = load_registry(cfg.get("optimum_registry"))
    jobs = [(r, registry, cfg.get("weights"), cfg.get("beam_width", DEFAULT_BEAM)) for r in runs]
    workers = int(cfg.get("workers", 1))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_cell, jobs))
    else:
        rows = [_cell(j) for j in jobs]

    (out / "solutions").mkdir(parents=True, exist_ok=True)
    for row in rows:
        if row.solutions:
            best = min(row.solutions, key=lambda s: s.cost)
            stem = Path(row.instance).stem
            (out / "solutions" / f"{stem}-{row.solver}.sol").write_text(format_solution(best))
    markdown, table_csv, timing_csv = emit_table(rows)
    (out / "results.md").write_text(markdown)
    (out / "results.csv").write_text(table_csv)
    (out / "timing.csv").write_text(timing_csv)
    for name, files in cfg.get("curves", {}).items():
        (out / "curves").mkdir(exist_ok=True)
        labels = [Path(f).stem for f in files]
        (out / "curves" / f"{name}.csv").write_text(emit_curves(files, labels))
    return rows
