"""The CVRP as an episodic decision process.

A state holds the truck's position, the remaining load, what each customer
still needs and the distance driven so far. Actions pick the next node; the
mask forbids served customers, customers that do not fit the remaining load,
and staying at the depot. An episode ends when every customer is served and
the truck is back at the depot. The reward is minus the total distance.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .instance import Instance, Solution

GAMMA = 1.0  # undiscounted: the reward is the whole episode's distance


class MaskedActionError(ValueError):
    """An action the mask forbids was taken."""


class TerminalStateError(ValueError):
    pass


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class EnvState:
    instance: Instance
    current_node: int
    residual_demand: np.ndarray  # (n+1,), entry 0 unused and zero
    truck_load: float
    distance_so_far: float
    visited_mask: np.ndarray  # (n+1,) bool, entry 0 unused
    actions: tuple[int, ...] = ()
    terminal: bool = False

    @property
    def steps(self) -> int:
        return len(self.actions)

    def __eq__(self, other):
        if not isinstance(other, EnvState):
            return NotImplemented
        return (self.instance == other.instance
                and self.current_node == other.current_node
                and np.array_equal(self.residual_demand, other.residual_demand)
                and self.truck_load == other.truck_load
                and self.distance_so_far == other.distance_so_far
                and np.array_equal(self.visited_mask, other.visited_mask)
                and self.actions == other.actions
                and self.terminal == other.terminal)

    __hash__ = None


@dataclass(frozen=True)
class ActionMask:
    allowed: np.ndarray  # (n+1,) bool over nodes 0..n

    def indices(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.allowed)]

    def __contains__(self, a) -> bool:
        return 0 <= a < len(self.allowed) and bool(self.allowed[a])


def reset(inst: Instance) -> EnvState:
    q = inst.demands.copy()
    return EnvState(
        instance=inst,
        current_node=0,
        residual_demand=_frozen(q),
        truck_load=float(inst.capacity),
        distance_so_far=0.0,
        visited_mask=_frozen(np.zeros(inst.n + 1, dtype=bool)),
    )


def feasible_actions(s: EnvState) -> ActionMask:
    if s.terminal:
        raise TerminalStateError("the episode is over")
    q = s.residual_demand
    allowed = (q > 0) & (q <= s.truck_load)
    allowed[0] = s.current_node != 0
    if not allowed[1:].any():
        # nothing fits (or nothing is left): the only move is back to the depot
        allowed[0] = True
    return ActionMask(_frozen(allowed))


def step(s: EnvState, a: int) -> tuple[EnvState, bool]:
    a = int(a)
    if a not in feasible_actions(s):
        raise MaskedActionError(f"action {a} is masked in the current state")
    inst = s.instance
    dist = s.distance_so_far + float(inst.distances[s.current_node, a])
    if a == 0:
        load = float(inst.capacity)
        q, visited = s.residual_demand, s.visited_mask
    else:
        load = s.truck_load - float(s.residual_demand[a])
        q = s.residual_demand.copy()
        q[a] = 0.0
        visited = s.visited_mask.copy()
        visited[a] = True
        q, visited = _frozen(q), _frozen(visited)
    terminal = a == 0 and not q.any()
    nxt = replace(s, current_node=a, residual_demand=q, truck_load=load,
                  distance_so_far=dist, visited_mask=visited,
                  actions=s.actions + (a,), terminal=terminal)
    return nxt, terminal


def episode_reward(total_distance: float) -> float:
    return -float(total_distance)


def step_bound(n: int) -> int:
    return 3 * n + 2


def routes_from_actions(actions) -> list[list[int]]:
    routes, cur = [], []
    for a in actions:
        if a == 0:
            if cur:
                routes.append(cur)
            cur = []
        else:
            cur.append(int(a))
    if cur:
        routes.append(cur)
    return routes


def episode_solution(s: EnvState) -> Solution:
    return Solution.from_routes(s.instance, routes_from_actions(s.actions))


def run_episode(inst: Instance, choose) -> EnvState:
    """Play one episode; ``choose(state, mask)`` returns the next node."""
    s = reset(inst)
    limit = step_bound(inst.n)
    while not s.terminal:
        if s.steps >= limit:
            raise RuntimeError(f"episode exceeded {limit} steps")
        s, _ = step(s, choose(s, feasible_actions(s)))
    return s


def random_policy(rng: np.random.Generator):
    def choose(s, mask):
        return int(rng.choice(mask.indices()))
    return choose


def nearest_policy(s: EnvState, mask: ActionMask) -> int:
    """Closest allowed node; the depot loses ties to customers, then lowest index."""
    d = s.instance.distances[s.current_node]
    options = mask.indices()
    return min(options, key=lambda a: (d[a], a == 0, a))


def random_instance(n: int, demand_max: int, capacity, seed: int, name: str | None = None) -> Instance:
    """Depot and customers uniform on the unit square, demands uniform on 1..demand_max."""
    if n < 1:
        raise ValueError("need at least one customer")
    if not 1 <= demand_max <= capacity:
        raise ValueError(f"demand_max must lie in [1, capacity], got {demand_max} with Q={capacity}")
    rng = np.random.default_rng(seed)
    xy = rng.uniform(0.0, 1.0, size=(n + 1, 2))
    q = rng.integers(1, demand_max + 1, size=n)
    customers = tuple((float(x), float(y), int(d)) for (x, y), d in zip(xy[1:], q))
    return Instance(name or f"random-n{n}-s{seed}", (float(xy[0, 0]), float(xy[0, 1])),
                    customers, capacity)


def random_instances(count: int, n: int, demand_max: int, capacity, seed: int) -> list[Instance]:
    rng = np.random.default_rng(seed)
    seeds = rng.integers(0, 2**63 - 1, size=count)
    return [random_instance(n, demand_max, capacity, int(s)) for s in seeds]


def tsp_instance(inst: Instance) -> Instance:
    """The same points with unit demands and room for everyone: a single tour."""
    customers = tuple((x, y, 1) for x, y, _ in inst.customers)
    return Instance(inst.name + "-tsp", inst.depot, customers, inst.n)


# --
# features seen by the policy

def normalized_coords(inst: Instance) -> np.ndarray:
    """Coordinates in [0, 1]; anything outside the unit square is min-max scaled.

    Both axes share one scale so that distances keep their proportions.
    """
    xy = inst.coords
    if xy.min() >= 0.0 and xy.max() <= 1.0:
        return xy.copy()
    lo = xy.min(axis=0)
    span = float((xy.max(axis=0) - lo).max())
    return (xy - lo) / (span if span > 0 else 1.0)


def node_features(inst: Instance) -> np.ndarray:
    """(n+1, 3): x, y, demand / Q."""
    return np.column_stack([normalized_coords(inst), inst.demands / float(inst.capacity)])


@dataclass
class BatchEnv:
    """Many same-size episodes stepped together, for training.

    Finished episodes keep choosing the depot, which costs nothing there.
    """

    coords: np.ndarray  # (B, n+1, 2) normalised
    demands: np.ndarray  # (B, n+1) divided by Q
    dist: np.ndarray = field(init=False)  # (B, n+1, n+1) on the normalised coordinates
    current: np.ndarray = field(init=False)
    residual: np.ndarray = field(init=False)
    load: np.ndarray = field(init=False)
    length: np.ndarray = field(init=False)
    done: np.ndarray = field(init=False)

    def __post_init__(self):
        diff = self.coords[:, :, None, :] - self.coords[:, None, :, :]
        self.dist = np.sqrt((diff ** 2).sum(-1))
        self.reset()

    @classmethod
    def from_instances(cls, instances) -> "BatchEnv":
        sizes = {inst.n for inst in instances}
        if len(sizes) != 1:
            raise ValueError("a batch needs instances of one size")
        coords = np.stack([normalized_coords(i) for i in instances])
        demands = np.stack([i.demands / float(i.capacity) for i in instances])
        return cls(coords, demands)

    @property
    def batch(self) -> int:
        return self.coords.shape[0]

    @property
    def n(self) -> int:
        return self.coords.shape[1] - 1

    def reset(self):
        B = self.batch
        self.current = np.zeros(B, dtype=int)
        self.residual = self.demands.copy()
        self.load = np.ones(B)
        self.length = np.zeros(B)
        self.done = np.zeros(B, dtype=bool)

    def mask(self) -> np.ndarray:
        tol = 1e-9  # loads are fractions of Q here
        allowed = (self.residual > 0) & (self.residual <= self.load[:, None] + tol)
        allowed[:, 0] = self.current != 0
        stuck = ~allowed[:, 1:].any(axis=1)
        allowed[stuck, 0] = True
        return allowed

    def step(self, actions: np.ndarray):
        rows = np.arange(self.batch)
        allowed = self.mask()
        if not allowed[rows, actions].all():
            bad = int(np.flatnonzero(~allowed[rows, actions])[0])
            raise MaskedActionError(f"episode {bad}: action {actions[bad]} is masked")
        self.length += self.dist[rows, self.current, actions]
        at_depot = actions == 0
        served = self.residual[rows, actions]
        self.load = np.where(at_depot, 1.0, self.load - served)
        self.residual[rows[~at_depot], actions[~at_depot]] = 0.0
        self.current = actions.copy()
        self.done |= at_depot & ~(self.residual > 0).any(axis=1)


def write_trace(s: EnvState, path) -> None:
    """Per-step CSV (step, node, load, distance) replayed from a finished episode."""
    t = reset(s.instance)
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["step", "node", "load", "distance"])
        out.writerow([0, t.current_node, repr(t.truck_load), repr(t.distance_so_far)])
        for k, a in enumerate(s.actions, start=1):
            t, _ = step(t, a)
            out.writerow([k, a, repr(t.truck_load), repr(t.distance_so_far)])
