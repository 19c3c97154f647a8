"""CVRP instances, solutions and the CVRPLib text format.

Node 0 is always the depot; customers are numbered 1..n in file order.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

EXACT = "exact"
NEAREST_INTEGER = "nearest-integer"
ROUNDING_MODES = (EXACT, NEAREST_INTEGER)

# relative tolerance used when comparing a stored cost with a recomputed one
COST_RTOL = 1e-9


class InstanceFormatError(ValueError):
    """Malformed instance or solution text."""


class UnsupportedFeatureError(InstanceFormatError):
    """Valid TSPLIB keyword that this package does not handle."""


class InstanceSemanticError(ValueError):
    """Well-formed data that violates the CVRP definition."""


def _as_number(value):
    if isinstance(value, (bool, np.bool_)):
        raise TypeError("boolean is not a quantity")
    if isinstance(value, (int, np.integer)):
        return int(value)
    value = float(value)
    return int(value) if value.is_integer() else value


@dataclass(frozen=True)
class Instance:
    name: str
    depot: tuple[float, float]
    customers: tuple[tuple[float, float, float], ...]
    capacity: float
    distance_rounding: str = EXACT

    def __post_init__(self):
        depot = (float(self.depot[0]), float(self.depot[1]))
        customers = tuple(
            (float(x), float(y), _as_number(q)) for x, y, q in self.customers
        )
        object.__setattr__(self, "depot", depot)
        object.__setattr__(self, "customers", customers)
        object.__setattr__(self, "capacity", _as_number(self.capacity))

        if self.distance_rounding not in ROUNDING_MODES:
            raise ValueError(f"unknown distance rounding {self.distance_rounding!r}")
        if not customers:
            raise InstanceSemanticError("an instance needs at least one customer")
        if not self.capacity > 0:
            raise InstanceSemanticError(f"capacity must be positive, got {self.capacity}")
        for i, (_, _, q) in enumerate(customers, start=1):
            if not q > 0:
                raise InstanceSemanticError(f"customer {i} has non-positive demand {q}")
            if q > self.capacity:
                raise InstanceSemanticError(
                    f"customer {i} demand {q} exceeds vehicle capacity {self.capacity}"
                )

    @property
    def n(self) -> int:
        return len(self.customers)

    @cached_property
    def coords(self) -> np.ndarray:
        """(n+1, 2) array, row 0 is the depot."""
        xy = [self.depot] + [(x, y) for x, y, _ in self.customers]
        return np.array(xy, dtype=float)

    @cached_property
    def demands(self) -> np.ndarray:
        """(n+1,) array with a zero entry for the depot."""
        return np.array([0.0] + [q for _, _, q in self.customers], dtype=float)

    @cached_property
    def distances(self) -> np.ndarray:
        d = build_distances(self)
        d.flags.writeable = False
        return d

    @property
    def total_demand(self) -> float:
        return sum(q for _, _, q in self.customers)


@dataclass(frozen=True)
class Solution:
    routes: tuple[tuple[int, ...], ...]
    cost: float

    def __post_init__(self):
        routes = tuple(tuple(int(c) for c in r) for r in self.routes)
        object.__setattr__(self, "routes", routes)
        object.__setattr__(self, "cost", float(self.cost))

    @classmethod
    def from_routes(cls, inst: Instance, routes: Iterable[Sequence[int]]) -> "Solution":
        routes = [list(r) for r in routes if len(r) > 0]
        return cls(tuple(tuple(r) for r in routes), solution_cost(inst, routes))


@dataclass(frozen=True)
class Violation:
    kind: str  # missing | duplicate | unknown | capacity | cost
    customer: int | None = None
    route: int | None = None
    amount: float | None = None

    def __str__(self):
        if self.kind == "capacity":
            return f"route {self.route} exceeds capacity by {self.amount:g}"
        if self.kind == "cost":
            return f"stored cost differs from recomputed cost by {self.amount:.6g}"
        where = f" (route {self.route})" if self.route is not None else ""
        return f"customer {self.customer} {self.kind}{where}"


@dataclass
class FeasibilityReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return not self.violations

    def __bool__(self):
        # truthy when there is something to report
        return bool(self.violations)

    def __len__(self):
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)

    def kinds(self) -> list[str]:
        return [v.kind for v in self.violations]


def build_distances(inst: Instance) -> np.ndarray:
    xy = inst.coords
    diff = xy[:, None, :] - xy[None, :, :]
    d = np.sqrt(diff[..., 0] * diff[..., 0] + diff[..., 1] * diff[..., 1])
    if inst.distance_rounding == NEAREST_INTEGER:
        # TSPLIB nint: round half up
        d = np.floor(d + 0.5)
    return d


def solution_cost(inst: Instance, routes: Iterable[Sequence[int]]) -> float:
    """Total closed-loop distance of a route list, legs summed in travel order."""
    d = inst.distances
    total = 0.0
    for route in routes:
        prev = 0
        for c in route:
            total += float(d[prev, c])
            prev = c
        if len(route):
            total += float(d[prev, 0])
    return total


def validate(inst: Instance, sol: Solution) -> FeasibilityReport:
    """Check a solution against the instance. Never raises."""
    report = FeasibilityReport()
    try:
        routes = [list(r) for r in sol.routes]
    except TypeError:
        report.violations.append(Violation("unknown"))
        return report

    seen: dict[int, int] = {}
    for r_idx, route in enumerate(routes):
        load = 0.0
        for c in route:
            if not isinstance(c, (int, np.integer)) or not 1 <= c <= inst.n:
                report.violations.append(Violation("unknown", customer=c, route=r_idx))
                continue
            if c in seen:
                report.violations.append(Violation("duplicate", customer=c, route=r_idx))
            else:
                seen[c] = r_idx
            load += inst.customers[c - 1][2]
        if load > inst.capacity:
            report.violations.append(
                Violation("capacity", route=r_idx, amount=load - inst.capacity)
            )
    for c in range(1, inst.n + 1):
        if c not in seen:
            report.violations.append(Violation("missing", customer=c))

    if not any(v.kind == "unknown" for v in report.violations):
        actual = solution_cost(inst, routes)
        if not math.isclose(sol.cost, actual, rel_tol=COST_RTOL, abs_tol=1e-12):
            report.violations.append(Violation("cost", amount=sol.cost - actual))
    return report


def gap(proposed: float, optimal: float) -> float:
    if not optimal > 0:
        raise ValueError(f"optimal cost must be positive, got {optimal}")
    return (proposed - optimal) / optimal


# --
# CVRPLib text format

_HEADER = re.compile(r"^\s*([A-Z_]+)\s*:\s*(.*?)\s*$")
_SECTIONS = ("NODE_COORD_SECTION", "DEMAND_SECTION", "DEPOT_SECTION")


def _number(token: str, what: str):
    try:
        v = float(token)
    except ValueError:
        raise InstanceFormatError(f"bad number {token!r} in {what}") from None
    return int(v) if v.is_integer() and re.fullmatch(r"[+-]?\d+", token) else v


def parse_cvrplib(text: str, rounding: str | None = None) -> Instance:
    """Parse a TSPLIB/CVRPLib ``.vrp`` file with EUC_2D coordinates.

    ``rounding`` overrides the distance convention; by default distances are
    exact Euclidean unless the file carries ``ROUNDING : NEAREST_INTEGER``.
    """
    headers: dict[str, str] = {}
    sections: dict[str, list[list[str]]] = {}
    current = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line == "EOF":
            break
        word = line.split()[0].rstrip(":")
        if word.endswith("_SECTION"):
            if word not in _SECTIONS:
                raise UnsupportedFeatureError(f"section {word} is not supported")
            current = word
            sections[current] = []
            continue
        m = _HEADER.match(line)
        if m and not line[0].isdigit() and not line[0] == "-":
            headers[m.group(1)] = m.group(2)
            current = None
            continue
        if current is None:
            raise InstanceFormatError(f"unexpected line outside any section: {line!r}")
        sections[current].append(line.split())

    for key in ("DIMENSION", "CAPACITY"):
        if key not in headers:
            raise InstanceFormatError(f"missing required header {key}")
    ewt = headers.get("EDGE_WEIGHT_TYPE", "EUC_2D")
    if ewt != "EUC_2D":
        raise UnsupportedFeatureError(f"EDGE_WEIGHT_TYPE {ewt} is not supported (EUC_2D only)")
    for key in ("NODE_COORD_SECTION", "DEMAND_SECTION"):
        if key not in sections:
            raise InstanceFormatError(f"missing required section {key}")

    try:
        dim = int(headers["DIMENSION"])
    except ValueError:
        raise InstanceFormatError(f"bad DIMENSION {headers['DIMENSION']!r}") from None
    capacity = _number(headers["CAPACITY"], "CAPACITY")

    coords: dict[int, tuple[float, float]] = {}
    for row in sections["NODE_COORD_SECTION"]:
        if len(row) != 3:
            raise InstanceFormatError(f"NODE_COORD_SECTION row needs 3 fields: {row}")
        coords[int(row[0])] = (float(row[1]), float(row[2]))
    demand: dict[int, float] = {}
    for row in sections["DEMAND_SECTION"]:
        if len(row) != 2:
            raise InstanceFormatError(f"DEMAND_SECTION row needs 2 fields: {row}")
        q = _number(row[1], "DEMAND_SECTION")
        if q < 0:
            raise InstanceSemanticError(f"node {row[0]} has negative demand {q}")
        demand[int(row[0])] = q
    if len(coords) != dim or len(demand) != dim or set(coords) != set(demand):
        raise InstanceFormatError(
            f"DIMENSION is {dim} but found {len(coords)} coordinates and {len(demand)} demands"
        )

    if "DEPOT_SECTION" in sections:
        ids = [int(tok) for row in sections["DEPOT_SECTION"] for tok in row]
        ids = ids[: ids.index(-1)] if -1 in ids else ids
        if len(ids) != 1:
            raise InstanceFormatError(f"expected exactly one depot, got {ids}")
        depot_id = ids[0]
        if depot_id not in coords:
            raise InstanceFormatError(f"depot {depot_id} has no coordinates")
    else:
        zero = [i for i in coords if demand[i] == 0]
        if len(zero) != 1:
            raise InstanceFormatError(
                "DEPOT_SECTION missing and depot is ambiguous "
                f"({len(zero)} zero-demand nodes)"
            )
        depot_id = zero[0]

    if rounding is None:
        rounding = NEAREST_INTEGER if headers.get("ROUNDING") == "NEAREST_INTEGER" else EXACT

    order = [i for i in coords if i != depot_id]
    customers = []
    for k, node in enumerate(order, start=1):
        q = demand[node]
        if q > capacity:
            raise InstanceSemanticError(
                f"customer {k} (node {node}) demand {q} exceeds capacity {capacity}"
            )
        customers.append((*coords[node], q))
    return Instance(
        name=headers.get("NAME", "unnamed"),
        depot=coords[depot_id],
        customers=tuple(customers),
        capacity=capacity,
        distance_rounding=rounding,
    )


def read_cvrplib(path, rounding: str | None = None) -> Instance:
    with open(path) as fh:
        return parse_cvrplib(fh.read(), rounding=rounding)


def _fmt(v) -> str:
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    return repr(v) if isinstance(v, float) else str(v)


def to_cvrplib(inst: Instance) -> str:
    lines = [
        f"NAME : {inst.name}",
        "TYPE : CVRP",
        f"DIMENSION : {inst.n + 1}",
        "EDGE_WEIGHT_TYPE : EUC_2D",
    ]
    if inst.distance_rounding == NEAREST_INTEGER:
        lines.append("ROUNDING : NEAREST_INTEGER")
    lines.append(f"CAPACITY : {_fmt(inst.capacity)}")
    lines.append("NODE_COORD_SECTION")
    lines.append(f"1 {_fmt(inst.depot[0])} {_fmt(inst.depot[1])}")
    for i, (x, y, _) in enumerate(inst.customers, start=2):
        lines.append(f"{i} {_fmt(x)} {_fmt(y)}")
    lines.append("DEMAND_SECTION")
    lines.append("1 0")
    for i, (_, _, q) in enumerate(inst.customers, start=2):
        lines.append(f"{i} {_fmt(q)}")
    lines += ["DEPOT_SECTION", " 1", " -1", "EOF"]
    return "\n".join(lines) + "\n"


def write_cvrplib(inst: Instance, path) -> None:
    with open(path, "w") as fh:
        fh.write(to_cvrplib(inst))


# --
# .sol text format

def format_solution(sol: Solution) -> str:
    lines = [f"Route #{k}: " + " ".join(str(c) for c in r) for k, r in enumerate(sol.routes, 1)]
    lines.append(f"Cost {sol.cost!r}")
    return "\n".join(lines) + "\n"


def parse_solution(text: str) -> Solution:
    routes, cost = [], None
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("Route"):
            _, _, body = line.partition(":")
            routes.append(tuple(int(t) for t in body.split()))
        elif line.startswith("Cost"):
            cost = float(line.split()[1])
    if cost is None:
        raise InstanceFormatError("solution text has no Cost line")
    return Solution(tuple(routes), cost)
