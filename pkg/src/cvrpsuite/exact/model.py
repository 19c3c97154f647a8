"""Two-index CVRP model with Miller-Tucker-Zemlin load constraints."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..instance import Instance

LE, EQ, GE = "<=", "=", ">="


@dataclass(frozen=True)
class Row:
    name: str
    coeffs: dict[int, float]  # variable index -> coefficient
    sense: str
    rhs: float


@dataclass
class MilpModel:
    """Variables are the arcs e_i_j (i != j over nodes 0..n) followed by loads u_1..u_n."""

    instance: Instance
    names: list[str]
    kinds: list[str]  # "binary" or "integer"
    lower: np.ndarray
    upper: np.ndarray
    objective: np.ndarray
    rows: list[Row] = field(default_factory=list)
    edge_index: dict[tuple[int, int], int] = field(default_factory=dict)
    load_index: dict[int, int] = field(default_factory=dict)

    @property
    def n_vars(self) -> int:
        return len(self.names)

    @property
    def n_edge_vars(self) -> int:
        return len(self.edge_index)

    @property
    def n_load_vars(self) -> int:
        return len(self.load_index)

    def rows_named(self, prefix: str) -> list[Row]:
        return [r for r in self.rows if r.name.startswith(prefix)]

    def bound_pairs(self) -> list[tuple[str, float, float]]:
        """(variable, lower, upper) for the load variables."""
        return [(self.names[k], float(self.lower[k]), float(self.upper[k]))
                for k in self.load_index.values()]

    def matrices(self):
        """Dense (A_eq, b_eq, A_ub, b_ub); >= rows are negated into <= form."""
        eq = [r for r in self.rows if r.sense == EQ]
        ub = [r for r in self.rows if r.sense != EQ]
        A_eq = np.zeros((len(eq), self.n_vars))
        A_ub = np.zeros((len(ub), self.n_vars))
        for k, r in enumerate(eq):
            for v, a in r.coeffs.items():
                A_eq[k, v] = a
        b_eq = np.array([r.rhs for r in eq], dtype=float)
        b_ub = np.zeros(len(ub))
        for k, r in enumerate(ub):
            sign = -1.0 if r.sense == GE else 1.0
            for v, a in r.coeffs.items():
                A_ub[k, v] = sign * a
            b_ub[k] = sign * r.rhs
        return A_eq, b_eq, A_ub, b_ub


def build_mtz_model(inst: Instance) -> MilpModel:
    n = inst.n
    Q = float(inst.capacity)
    q = inst.demands
    c = inst.distances

    names, kinds, lower, upper, obj = [], [], [], [], []
    edge_index, load_index = {}, {}
    for i in range(n + 1):
        for j in range(n + 1):
            if i == j:
                continue
            edge_index[(i, j)] = len(names)
            names.append(f"e_{i}_{j}")
            kinds.append("binary")
            lower.append(0.0)
            upper.append(1.0)
            obj.append(float(c[i, j]))
    for i in range(1, n + 1):
        load_index[i] = len(names)
        names.append(f"u_{i}")
        kinds.append("integer")
        # q_i <= u_i <= Q (the upper side is the standard MTZ bound)
        lower.append(float(q[i]))
        upper.append(Q)
        obj.append(0.0)

    rows = []
    for i in range(1, n + 1):
        rows.append(Row(f"out_{i}", {edge_index[i, j]: 1.0 for j in range(n + 1) if j != i}, EQ, 1.0))
    for j in range(1, n + 1):
        rows.append(Row(f"in_{j}", {edge_index[i, j]: 1.0 for i in range(n + 1) if i != j}, EQ, 1.0))
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i == j:
                continue
            coeffs = {load_index[i]: 1.0, load_index[j]: -1.0, edge_index[i, j]: Q}
            rows.append(Row(f"mtz_{i}_{j}", coeffs, LE, Q - float(q[j])))

    return MilpModel(
        instance=inst,
        names=names,
        kinds=kinds,
        lower=np.array(lower),
        upper=np.array(upper),
        objective=np.array(obj),
        rows=rows,
        edge_index=edge_index,
        load_index=load_index,
    )


def _num(v: float) -> str:
    v = float(v)
    if v == 0:
        v = 0.0  # never print -0
    return str(int(v)) if v.is_integer() else repr(v)


def _expr(terms, names, per_line=6) -> list[str]:
    parts = []
    for k, (v, a) in enumerate(terms):
        sign = "-" if a < 0 else "+"
        mag = abs(a)
        body = names[v] if mag == 1 else f"{_num(mag)} {names[v]}"
        if k == 0:
            parts.append(body if sign == "+" else f"- {body}")
        else:
            parts.append(f"{sign} {body}")
    lines = [" ".join(parts[i : i + per_line]) for i in range(0, len(parts), per_line)]
    return lines or ["0"]


def export_lp(model: MilpModel) -> str:
    """CPLEX LP text for the model."""
    names = model.names
    out = [f"\\ MTZ two-index CVRP model for {model.instance.name}", "Minimize"]
    obj_terms = [(v, a) for v, a in enumerate(model.objective) if a != 0]
    lines = _expr(obj_terms, names)
    out.append(f" obj: {lines[0]}")
    out.extend(f"   {ln}" for ln in lines[1:])
    out.append("Subject To")
    for r in model.rows:
        lines = _expr(sorted(r.coeffs.items()), names)
        if len(lines) == 1:
            out.append(f" {r.name}: {lines[0]} {r.sense} {_num(r.rhs)}")
        else:
            out.append(f" {r.name}: {lines[0]}")
            out.extend(f"   {ln}" for ln in lines[1:-1])
            out.append(f"   {lines[-1]} {r.sense} {_num(r.rhs)}")
    out.append("Bounds")
    for k in model.load_index.values():
        out.append(f" {_num(model.lower[k])} <= {names[k]} <= {_num(model.upper[k])}")
    out.append("Binary")
    binaries = [names[k] for k in range(model.n_vars) if model.kinds[k] == "binary"]
    out.extend(" " + " ".join(binaries[i : i + 10]) for i in range(0, len(binaries), 10))
    out.append("General")
    generals = [names[k] for k in range(model.n_vars) if model.kinds[k] == "integer"]
    out.extend(" " + " ".join(generals[i : i + 10]) for i in range(0, len(generals), 10))
    out.append("End")
    return "\n".join(out) + "\n"
