"""Benchmark harness, result tables and the command line."""
from .harness import SOLVERS, BenchConfigError, BenchmarkRun, ResultRow, resolve_instance, run_benchmark
from .config import load_registry, plan, run_config
from .tables import emit_curves, emit_table, inconsistent_published_gaps, published_rows

__all__ = [
    "BenchConfigError", "BenchmarkRun", "ResultRow", "SOLVERS", "emit_curves", "emit_table",
    "load_registry", "plan", "run_config",
    "inconsistent_published_gaps", "published_rows", "resolve_instance", "run_benchmark",
]
