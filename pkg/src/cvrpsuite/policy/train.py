"""REINFORCE with a baseline.

Per batch: sample one episode per instance, compute the advantage
A = R - b = (baseline cost - sampled cost), and take a gradient-ascent step
on mean(A * sum_t log pi(a_t | s_t)). The rollout baseline is the greedy cost
of a frozen copy of the policy on the same instance; the copy is replaced at
the end of an epoch when the current policy is better on a held-out batch.
"""
from __future__ import annotations

import csv
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from ..env import BatchEnv
from ..instance import Instance
from .decode import GREEDY, SAMPLE, backward, instance_env, play
from .network import CVRP, TSP, NetConfig, PolicyParams, init_params

ROLLOUT, EMA, NONE = "rollout", "exponential-moving-average", "none"
CURVE_COLUMNS = ("epoch", "batch", "mean_cost", "baseline_cost", "wall_seconds")
PLATEAU_WINDOW = 10
PLATEAU_RTOL = 0.01


@dataclass
class TrainConfig:
    embedding_dim: int = 64
    encoder_layers: int = 3
    heads: int = 8
    ff_dim: int = 128
    learning_rate: float = 1e-4
    batch_size: int = 64
    batches_per_epoch: int = 8
    epochs: int = 50
    baseline: str = ROLLOUT
    ema_beta: float = 0.8
    gamma: float = 1.0
    optimizer: str = "sgd"  # plain gradient ascent; "adam" is available
    momentum: float = 0.0  # sgd only
    n_customers: int = 20
    demand_max: int = 9
    capacity: int = 30
    problem: str = CVRP
    eval_size: int = 256
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate >= 0:
            raise ValueError("learning_rate must be non-negative")
        if self.embedding_dim <= 0:
            raise ValueError("embedding_dim must be positive")
        if self.baseline not in (ROLLOUT, EMA, NONE):
            raise ValueError(f"unknown baseline {self.baseline!r}")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.gamma != 1.0:
            raise ValueError("episodes are undiscounted; gamma must be 1.0")

    def net_config(self) -> NetConfig:
        return NetConfig(self.embedding_dim, self.encoder_layers, self.heads, self.ff_dim,
                         problem=self.problem)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class CurveRow:
    epoch: int
    batch: int
    mean_cost: float
    baseline_cost: float
    wall_seconds: float


@dataclass
class TrainResult:
    params: PolicyParams
    curve: list[CurveRow] = field(default_factory=list)
    # per batch, (advantage mean, advantage std, raw return std) on the same sampled episodes
    spread: list[tuple[float, float, float]] = field(default_factory=list)

    def epoch_means(self) -> np.ndarray:
        epochs = sorted({r.epoch for r in self.curve})
        return np.array([np.mean([r.mean_cost for r in self.curve if r.epoch == e]) for e in epochs])


# --
# instance streams (arrays on the unit square, demands as fractions of Q)

def random_batch(rng: np.random.Generator, cfg: TrainConfig, size: int):
    n = cfg.n_customers
    coords = rng.uniform(0.0, 1.0, size=(size, n + 1, 2))
    if cfg.problem == TSP:
        # one tour: every customer takes an equal share of a single truck
        demands = np.full((size, n + 1), 1.0 / n)
    else:
        demands = rng.integers(1, cfg.demand_max + 1, size=(size, n + 1)) / float(cfg.capacity)
    demands[:, 0] = 0.0
    return coords, demands


def _fixed_stream(inst: Instance, size: int):
    env = instance_env(inst, size)
    return env.coords, env.demands


class _Optimizer:
    def __init__(self, cfg: TrainConfig, params: PolicyParams):
        self.cfg = cfg
        self.t = 0
        self.m = params.zeros_like()
        self.v = params.zeros_like()

    def step(self, params: PolicyParams, grads):
        """Ascent along ``grads``."""
        cfg = self.cfg
        self.t += 1
        for k, g in grads.items():
            if not np.all(np.isfinite(g)):
                raise FloatingPointError(f"non-finite gradient for parameter {k}")
        if cfg.learning_rate == 0:
            return
        for k, g in grads.items():
            if cfg.optimizer == "sgd":
                if cfg.momentum:
                    self.m[k] = cfg.momentum * self.m[k] + g
                    g = self.m[k]
                params.tensors[k] += cfg.learning_rate * g
            else:
                b1, b2 = 0.9, 0.999
                self.m[k] = b1 * self.m[k] + (1 - b1) * g
                self.v[k] = b2 * self.v[k] + (1 - b2) * g * g
                mh = self.m[k] / (1 - b1 ** self.t)
                vh = self.v[k] / (1 - b2 ** self.t)
                params.tensors[k] += cfg.learning_rate * mh / (np.sqrt(vh) + 1e-8)


def _greedy_lengths(params, coords, demands):
    return play(params, BatchEnv(coords, demands), mode=GREEDY).length


def train_reinforce(cfg: TrainConfig, params: PolicyParams | None = None,
                    stream=None, eval_set=None, on_epoch=None) -> TrainResult:
    """Train on a stream of random instances (or the given ``stream``).

    ``stream(rng, size)`` returns (coords, demands) arrays; ``eval_set`` is the
    held-out (coords, demands) pair used to decide baseline refreshes.
    """
    rng = np.random.default_rng(cfg.seed)
    if params is None:
        params = init_params(cfg.net_config(), cfg.seed)
    else:
        params = params.copy()
        params.check_finite()
    if stream is None:
        stream = lambda r, size: random_batch(r, cfg, size)  # noqa: E731
    if eval_set is None:
        eval_set = random_batch(np.random.default_rng(cfg.seed + 1_000_003), cfg, cfg.eval_size)
    opt = _Optimizer(cfg, params)
    baseline_params = params.copy()
    baseline_eval = _greedy_lengths(baseline_params, *eval_set).mean()
    ema = None
    result = TrainResult(params)
    start = time.perf_counter()
    for epoch in range(cfg.epochs):
        for b in range(cfg.batches_per_epoch):
            coords, demands = stream(rng, cfg.batch_size)
            try:
                out = play(params, BatchEnv(coords, demands), mode=SAMPLE, rng=rng, record=True)
            except FloatingPointError:
                params.check_finite()  # names the tensor when a parameter went bad
                raise
            cost = out.length
            if cfg.baseline == ROLLOUT:
                base = _greedy_lengths(baseline_params, coords, demands)
            elif cfg.baseline == EMA:
                ema = cost.mean() if ema is None else cfg.ema_beta * ema + (1 - cfg.ema_beta) * cost.mean()
                base = np.full_like(cost, ema)
            else:
                base = np.zeros_like(cost)
            advantage = base - cost  # R - b with R = -cost
            result.spread.append((float(advantage.mean()), float(advantage.std()), float(cost.std())))
            grads = backward(params, out, advantage / len(cost))
            opt.step(params, grads)
            result.curve.append(CurveRow(epoch, b, float(cost.mean()), float(base.mean()),
                                         time.perf_counter() - start))
        if cfg.baseline == ROLLOUT:
            current = _greedy_lengths(params, *eval_set).mean()
            if current < baseline_eval:
                baseline_params = params.copy()
                baseline_eval = current
        if on_epoch is not None:
            on_epoch(epoch, result)
    params.check_finite()
    return result


def train_overfit(cfg: TrainConfig, inst: Instance, params: PolicyParams | None = None,
                  on_epoch=None) -> TrainResult:
    """The same training loop fed one instance over and over."""
    stream = lambda r, size: _fixed_stream(inst, size)  # noqa: E731
    return train_reinforce(cfg, params, stream=stream, eval_set=_fixed_stream(inst, 1),
                           on_epoch=on_epoch)


# --
# curves

def write_curve(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(CURVE_COLUMNS)
        for r in rows:
            out.writerow([r.epoch, r.batch, repr(r.mean_cost), repr(r.baseline_cost),
                          f"{r.wall_seconds:.6f}"])


def read_curve(path) -> list[CurveRow]:
    with open(path, newline="") as fh:
        return [CurveRow(int(r["epoch"]), int(r["batch"]), float(r["mean_cost"]),
                         float(r["baseline_cost"]), float(r["wall_seconds"]))
                for r in csv.DictReader(fh)]


def plateau_epoch(epoch_means, window: int = PLATEAU_WINDOW, rtol: float = PLATEAU_RTOL):
    """First epoch that starts ``window`` consecutive epochs within ``rtol`` of the final mean.

    Returns None when the curve never settles that way.
    """
    m = np.asarray(epoch_means, dtype=float)
    if len(m) < window:
        return None
    final = m[-1]
    close = np.abs(m - final) <= rtol * abs(final)
    for e in range(len(m) - window + 1):
        if close[e : e + window].all():
            return e
    return None
