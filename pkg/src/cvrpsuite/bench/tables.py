"""Result tables in the Mean / Gap(%) / Time(s) layout, and aligned training curves."""
from __future__ import annotations

import csv
import io
from collections import OrderedDict

import numpy as np

from ..data import optimum_registry, published_results
from ..instance import gap
from .harness import ResultRow


def _one(v: float) -> str:
    return f"{v:.1f}"


def _time_cell(row: ResultRow) -> str:
    if row.limit_hit:
        # stopped by the budget: show the budget with an asterisk
        b = row.budget if row.budget is not None else row.mean_time
        return f"{b:g}*"
    return "?" if row.mean_time is None else _one(row.mean_time)


def _cells(row: ResultRow) -> list[str]:
    if row.failed or row.mean_cost is None:
        return ["failed", "", ""]
    g = "?" if row.gap is None else _one(100.0 * row.gap)
    return [_one(row.mean_cost), g, _time_cell(row)]


def emit_table(rows: list[ResultRow]) -> tuple[str, str, str]:
    """Markdown table, the same data unrounded as CSV, and a separate timing CSV.

    Rows are grouped by solver (first-seen order), columns by instance. The
    main CSV holds no wall times, so reruns of deterministic solvers produce
    identical bytes; times go to the timing CSV.
    """
    if not rows:
        raise ValueError("no rows to emit")
    instances = list(OrderedDict.fromkeys(r.instance for r in rows))
    solvers = list(OrderedDict.fromkeys(r.solver for r in rows))
    cell = {(r.solver, r.instance): r for r in rows}

    head = ["Solver"]
    for name in instances:
        head += [f"{name} Mean", f"{name} Gap(%)", f"{name} Time(s)"]
    lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
    for s in solvers:
        parts = [s]
        for name in instances:
            r = cell.get((s, name))
            parts += _cells(r) if r is not None else ["", "", ""]
        lines.append("| " + " | ".join(parts) + " |")
    markdown = "\n".join(lines) + "\n"

    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["instance", "solver", "runs", "mean_cost", "gap", "limit_hit", "failed"])
    for r in rows:
        out.writerow([r.instance, r.solver, len(r.costs),
                      "" if r.mean_cost is None else repr(r.mean_cost),
                      "" if r.gap is None else repr(r.gap),
                      int(r.limit_hit), int(r.failed)])
    timing = io.StringIO()
    out = csv.writer(timing, lineterminator="\n")
    out.writerow(["instance", "solver", "mean_seconds", "run_seconds"])
    for r in rows:
        out.writerow([r.instance, r.solver, "" if r.mean_time is None else repr(r.mean_time),
                      " ".join(f"{t:.6f}" for t in r.times)])
    return markdown, buf.getvalue(), timing.getvalue()


def published_rows(registry: dict | None = None, include_optimal: bool = True) -> list[ResultRow]:
    """Reference rows from the bundled published numbers, gaps recomputed from the means.

    With ``include_optimal`` the registry optima come first as a "CVRP Lib"
    row whose time is unknown.
    """
    block = published_results()
    registry = optimum_registry() if registry is None else registry
    rows = []
    if include_optimal:
        for name in block["instances"]:
            opt = registry.get(name)
            rows.append(ResultRow(name, "CVRP Lib", opt, None if opt is None else 0.0, None, False))
    for entry in block["rows"]:
        for k, name in enumerate(block["instances"]):
            mean = entry["mean"][k]
            t = entry["time"][k]
            opt = registry.get(name)
            rows.append(ResultRow(
                instance=name,
                solver=entry["solver"],
                mean_cost=mean,
                gap=None if opt is None or mean is None else gap(mean, opt),
                mean_time=t,
                limit_hit=bool(entry["limit_hit"][k]),
                budget=t if entry["limit_hit"][k] else None,
            ))
    return rows


def inconsistent_published_gaps(tol_pp: float = 0.1, registry: dict | None = None) -> list[tuple]:
    """(solver, instance, printed %, recomputed %) for published gaps that their means do not give."""
    data = published_results()
    registry = optimum_registry() if registry is None else registry
    out = []
    for entry in data["rows"]:
        for k, name in enumerate(data["instances"]):
            printed = entry["gap_pct"][k]
            computed = 100.0 * gap(entry["mean"][k], registry[name])
            if abs(printed - computed) > tol_pp:
                out.append((entry["solver"], name, printed, computed))
    return out


# --
# training curves

def _epoch_series(rows) -> "OrderedDict[int, float]":
    by_epoch: "OrderedDict[int, list]" = OrderedDict()
    for r in rows:
        by_epoch.setdefault(int(r["epoch"]), []).append(float(r["mean_cost"]))
    return OrderedDict((e, float(np.mean(v))) for e, v in sorted(by_epoch.items()))


def _read(path_or_text):
    if hasattr(path_or_text, "read"):
        return list(csv.DictReader(path_or_text))
    with open(path_or_text, newline="") as fh:
        return list(csv.DictReader(fh))


def emit_curves(curves, labels=None) -> str:
    """Epoch-aligned wide CSV of several training curves (per-epoch mean cost).

    With different epoch grids, the coarsest grid (fewest epochs) is used and
    every other curve contributes its value at the nearest epoch, the earlier
    one on ties. With exactly two curves a ``difference`` column (second
    minus first) is added.
    """
    if not curves:
        raise ValueError("need at least one curve")
    labels = list(labels) if labels is not None else [f"curve{i}" for i in range(len(curves))]
    series = [_epoch_series(_read(c)) for c in curves]
    grid = list(min(series, key=len).keys())
    columns = []
    for s in series:
        epochs = np.array(list(s.keys()))
        values = list(s.values())
        col = []
        for e in grid:
            if e in s:
                col.append(s[e])
            else:
                k = int(np.argmin(np.abs(epochs - e)))  # argmin keeps the earlier epoch on ties
                col.append(values[k])
        columns.append(col)

    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    header = ["epoch"] + [f"{lab}_mean_cost" for lab in labels]
    if len(series) == 2:
        header.append("difference")
    out.writerow(header)
    for i, e in enumerate(grid):
        vals = [c[i] for c in columns]
        line = [e] + [repr(v) for v in vals]
        if len(series) == 2:
            line.append(repr(vals[1] - vals[0]))
        out.writerow(line)
    return buf.getvalue()
