"""Running the policy: batched episodes, teacher forcing, and beam search."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..env import BatchEnv, normalized_coords, routes_from_actions, step_bound
from ..instance import Instance, Solution
from .network import (CVRP, PolicyParams, decode_step, decode_step_backward, decoder_keys,
                      decoder_keys_backward, empty_key_grads, encode, encode_backward)

GREEDY, SAMPLE, BEAM = "greedy", "sample", "beam"


def batch_features(env: BatchEnv, problem: str) -> np.ndarray:
    if problem == CVRP:
        return np.concatenate([env.coords, env.demands[:, :, None]], axis=2)
    return env.coords.copy()


@dataclass
class EpisodeBatch:
    actions: np.ndarray  # (B, T), padded with depot no-ops after the end
    log_prob: np.ndarray  # (B,) sum of per-step log-probabilities
    length: np.ndarray  # (B,) tour length on the normalised coordinates
    tape: tuple | None = None  # what backward() needs

    def costs(self) -> np.ndarray:
        return self.length


def play(params: PolicyParams, env: BatchEnv, mode: str = GREEDY, rng=None,
         forced: np.ndarray | None = None, record: bool = False) -> EpisodeBatch:
    """Run every episode of ``env`` to the end.

    ``forced`` (B, T) replays a given action sequence (teacher forcing).
    Greedy picks the first most likely node; sampling draws by inverse CDF.
    """
    env.reset()
    feats = batch_features(env, params.config.problem)
    H, hbar, enc_cache = encode(params, feats)
    keys = decoder_keys(params, H, hbar)
    B = env.batch
    rows = np.arange(B)
    log_prob = np.zeros(B)
    actions, steps = [], []
    limit = step_bound(env.n)
    t = 0
    while not env.done.all():
        if t >= limit:
            raise RuntimeError(f"episodes exceeded {limit} steps")
        mask = env.mask()
        logp, cache = decode_step(params, keys, env.current, env.load, mask)
        if not np.isfinite(logp[mask]).all():
            raise FloatingPointError(f"non-finite log-probabilities at step {t}")
        if forced is not None:
            a = forced[:, t] if t < forced.shape[1] else np.zeros(B, dtype=int)
        elif mode == GREEDY:
            a = logp.argmax(axis=1)
        elif mode == SAMPLE:
            p = np.exp(logp)
            cdf = np.cumsum(p, axis=1)
            r = rng.random(B)[:, None] * cdf[:, -1:]
            a = np.minimum((cdf <= r).sum(axis=1), env.n)
            # never land on a masked node through round-off
            bad = ~mask[rows, a]
            if bad.any():
                a[bad] = logp[bad].argmax(axis=1)
        else:
            raise ValueError(f"unknown mode {mode!r}")
        a = np.where(env.done, 0, a)
        live = ~env.done
        log_prob += np.where(live, logp[rows, a], 0.0)
        if record:
            steps.append((cache, a.copy(), live))
        env.step(a)
        actions.append(a)
        t += 1
    acts = np.stack(actions, axis=1) if actions else np.zeros((B, 0), dtype=int)
    tape = (feats, enc_cache, keys, steps) if record else None
    return EpisodeBatch(acts, log_prob, env.length.copy(), tape)


def backward(params: PolicyParams, batch: EpisodeBatch, weights: np.ndarray):
    """Gradients of sum_b weights[b] * log_prob[b] for every parameter."""
    feats, enc_cache, keys, steps = batch.tape
    grads = params.zeros_like()
    dkeys = empty_key_grads(keys)
    B = len(weights)
    N = keys.H.shape[1]
    for cache, a, live in reversed(steps):
        dlogp = np.zeros((B, N))
        dlogp[np.arange(B), a] = np.where(live, weights, 0.0)
        decode_step_backward(params, keys, cache, dlogp, grads, dkeys)
    dH, dhbar = decoder_keys_backward(params, keys, dkeys, grads)
    encode_backward(params, enc_cache, dH, dhbar, grads)
    return grads


# --
# single instances

def instance_env(inst: Instance, copies: int = 1) -> BatchEnv:
    coords = np.repeat(normalized_coords(inst)[None], copies, axis=0)
    demands = np.repeat((inst.demands / float(inst.capacity))[None], copies, axis=0)
    return BatchEnv(coords, demands)


def evaluate_actions(params: PolicyParams, inst: Instance, actions) -> float:
    """Sum of log-probabilities of a given action sequence (teacher forcing)."""
    env = instance_env(inst)
    forced = np.asarray(actions, dtype=int)[None, :]
    return float(play(params, env, forced=forced).log_prob[0])


def rollout(params: PolicyParams, inst: Instance, mode: str = GREEDY, seed: int = 0,
            width: int = 1, return_log_prob: bool = False):
    """Decode one instance into a Solution (costed on the instance's own distances)."""
    if mode == BEAM:
        actions, lp = beam_search(params, inst, width)
    else:
        rng = np.random.default_rng(seed) if mode == SAMPLE else None
        out = play(params, instance_env(inst), mode=mode, rng=rng)
        actions, lp = [int(a) for a in out.actions[0]], float(out.log_prob[0])
    sol = Solution.from_routes(inst, routes_from_actions(actions))
    return (sol, actions, lp) if return_log_prob else sol


def greedy_costs(params: PolicyParams, instances, chunk: int = 256) -> np.ndarray:
    """Greedy tour lengths of many same-size instances, on their own distances."""
    out = []
    for k in range(0, len(instances), chunk):
        part = instances[k : k + chunk]
        res = play(params, BatchEnv.from_instances(part), mode=GREEDY)
        for inst, acts in zip(part, res.actions):
            out.append(Solution.from_routes(inst, routes_from_actions(acts)).cost)
    return np.array(out)


def beam_search(params: PolicyParams, inst: Instance, width: int):
    """Nested beam search; returns the cheapest finished sequence and its log-probability.

    The beam of width w is built so that it always contains the beam of every
    smaller width: the k-th slot takes the best expansion (by total
    log-probability) of the first k parents that no earlier slot took. A wider
    beam therefore never returns a worse tour, and width 1 is greedy decoding.
    """
    if width < 1:
        raise ValueError("beam width must be at least 1")
    env1 = instance_env(inst)
    feats = batch_features(env1, params.config.problem)
    H, hbar, _ = encode(params, feats)
    keys1 = decoder_keys(params, H, hbar)
    N = inst.n + 1

    # beam entries with the slot each one was chosen for
    seqs: list[list[int]] = [[]]
    score = np.zeros(1)
    slot = np.zeros(1, dtype=int)
    env = instance_env(inst, 1)
    limit = step_bound(inst.n)
    for _ in range(limit + 1):
        if env.done.all():
            break
        K = env.batch
        mask = env.mask()
        logp, _ = decode_step(params, keys1.take(np.zeros(K, dtype=int)), env.current, env.load, mask)
        # candidates (parent, node); a finished parent only continues as itself
        cand_score = np.where(mask, score[:, None] + logp, -np.inf)
        cand_score[env.done] = -np.inf
        cand_score[env.done, 0] = score[env.done]
        flat = cand_score.ravel()
        parent_slot = np.repeat(slot, N)
        taken = np.zeros(K * N, dtype=bool)
        remaining = int(np.isfinite(flat).sum())
        chosen, chosen_slot = [], []
        for k in range(width):
            if not remaining:
                break
            avail = np.where((parent_slot <= k) & ~taken, flat, -np.inf)
            j = int(np.argmax(avail))
            if not np.isfinite(avail[j]):
                continue  # nothing new is reachable from the first k slots
            taken[j] = True
            remaining -= 1
            chosen.append(j)
            chosen_slot.append(k)
        parents = np.array([j // N for j in chosen])
        nodes = np.array([j % N for j in chosen])
        new_env = BatchEnv(env.coords[parents], env.demands[parents])
        new_env.current = env.current[parents].copy()
        new_env.residual = env.residual[parents].copy()
        new_env.load = env.load[parents].copy()
        new_env.length = env.length[parents].copy()
        new_env.done = env.done[parents].copy()
        finished = new_env.done.copy()
        # finished entries take the free depot no-op
        new_env.step(np.where(finished, 0, nodes))
        seqs = [seqs[p] + ([] if f else [int(a)]) for p, a, f in zip(parents, nodes, finished)]
        score = flat[chosen]
        slot = np.array(chosen_slot)
        env = new_env

    costs = [Solution.from_routes(inst, routes_from_actions(s)).cost for s in seqs]
    # cheapest tour; ties go to the earlier slot
    best = int(np.argmin(costs))
    return seqs[best], float(score[best])
