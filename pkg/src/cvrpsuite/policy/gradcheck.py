"""Finite-difference check of the hand-written backward pass."""
from __future__ import annotations

import numpy as np

from ..env import BatchEnv
from .decode import SAMPLE, backward, play
from .network import NetConfig, PolicyParams, init_params

TINY = NetConfig(embedding_dim=8, encoder_layers=2, heads=2, ff_dim=8)


def _tiny_batch(rng, batch: int, n: int):
    coords = rng.uniform(0, 1, size=(batch, n + 1, 2))
    demands = rng.integers(1, 4, size=(batch, n + 1)) / 5.0
    demands[:, 0] = 0.0
    return coords, demands


def surrogate(params: PolicyParams, coords, demands, actions, advantage) -> float:
    """-sum_b A_b * sum_t log pi(a_t | s_t) along the given action sequences."""
    out = play(params, BatchEnv(coords, demands), forced=actions)
    return float(-(advantage * out.log_prob).sum())


def analytic_gradient(params, coords, demands, actions, advantage):
    out = play(params, BatchEnv(coords, demands), forced=actions, record=True)
    grads = backward(params, out, advantage)
    return {k: -g for k, g in grads.items()}


def gradient_check(config: NetConfig = TINY, n: int = 4, batch: int = 3, seed: int = 0,
                   h: float = 1e-5, corrupt: str | None = None, advantage=None) -> float:
    """Max relative error between analytic and central-difference gradients.

    Every entry of every tensor is perturbed. ``corrupt`` names a tensor whose
    analytic gradient is deliberately damaged, to show the check notices.
    """
    if config.embedding_dim > 8 or n > 4:
        raise ValueError("the check is meant for embedding_dim <= 8 and n <= 4")
    rng = np.random.default_rng(seed)
    params = init_params(config, seed)
    coords, demands = _tiny_batch(rng, batch, n)
    sampled = play(params, BatchEnv(coords, demands), mode=SAMPLE, rng=rng)
    actions = sampled.actions
    if advantage is None:
        advantage = rng.normal(size=batch)
    advantage = np.asarray(advantage, dtype=float)

    grads = analytic_gradient(params, coords, demands, actions, advantage)
    if corrupt is not None:
        g = grads[corrupt]
        g.flat[0] += 1.0 + abs(g.flat[0])

    worst = 0.0
    for name, tensor in params.tensors.items():
        for idx in range(tensor.size):
            old = tensor.flat[idx]
            tensor.flat[idx] = old + h
            up = surrogate(params, coords, demands, actions, advantage)
            tensor.flat[idx] = old - h
            down = surrogate(params, coords, demands, actions, advantage)
            tensor.flat[idx] = old
            fd = (up - down) / (2 * h)
            an = grads[name].flat[idx]
            err = abs(an - fd) / max(abs(an) + abs(fd), 1e-6)
            worst = max(worst, err)
    return worst
