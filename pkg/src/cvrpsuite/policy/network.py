"""Attention encoder-decoder over the nodes of one instance, forward and backward.

Shapes: B episodes, N = n+1 nodes (the depot first), d embedding size,
h heads of size dk = d/h.

Encoder: separate linear projections for the depot and the customers, then
E layers of multi-head self-attention and a ReLU feed-forward block, each
wrapped in a residual connection and layer normalisation. The graph
embedding is the mean over nodes.

Decoder (one step): the context [graph, current node, remaining load] is
projected to a query, a masked multi-head glimpse over the nodes refines it,
and the pointer logits are C * tanh(glimpse . key / sqrt(d)), masked again.
"""
from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

MASK_VALUE = -1e9
LN_EPS = 1e-5
CVRP, TSP = "cvrp", "tsp"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class NetConfig:
    embedding_dim: int = 64
    encoder_layers: int = 3
    heads: int = 8
    ff_dim: int = 256
    clip: float = 10.0
    problem: str = CVRP

    def __post_init__(self):
        if self.embedding_dim <= 0 or self.embedding_dim % self.heads:
            raise ConfigError("embedding_dim must be a positive multiple of heads")
        if self.problem not in (CVRP, TSP):
            raise ConfigError(f"unknown problem {self.problem!r}")

    @property
    def node_dim(self) -> int:
        # x, y and (for the CVRP) demand / Q
        return 3 if self.problem == CVRP else 2

    @property
    def context_dim(self) -> int:
        # graph embedding, current node and (for the CVRP) load / Q
        return 2 * self.embedding_dim + (1 if self.problem == CVRP else 0)


def param_shapes(cfg: NetConfig) -> OrderedDict:
    d, f = cfg.embedding_dim, cfg.ff_dim
    shapes = OrderedDict()
    shapes["W_dep"] = (2, d)
    shapes["b_dep"] = (d,)
    shapes["W_in"] = (cfg.node_dim, d)
    shapes["b_in"] = (d,)
    for l in range(cfg.encoder_layers):
        p = f"enc{l}."
        for name in ("Wq", "Wk", "Wv", "Wo"):
            shapes[p + name] = (d, d)
        shapes[p + "ln1_g"] = (d,)
        shapes[p + "ln1_b"] = (d,)
        shapes[p + "W1"] = (d, f)
        shapes[p + "b1"] = (f,)
        shapes[p + "W2"] = (f, d)
        shapes[p + "b2"] = (d,)
        shapes[p + "ln2_g"] = (d,)
        shapes[p + "ln2_b"] = (d,)
    shapes["W_ctx"] = (cfg.context_dim, d)
    shapes["W_gk"] = (d, d)
    shapes["W_gv"] = (d, d)
    shapes["W_go"] = (d, d)
    shapes["W_pk"] = (d, d)
    return shapes


class PolicyParams:
    """Named float64 tensors plus the network configuration."""

    def __init__(self, config: NetConfig, tensors: OrderedDict):
        expected = param_shapes(config)
        if list(tensors) != list(expected):
            raise ConfigError("tensor names do not match the configuration")
        for name, shape in expected.items():
            if tuple(tensors[name].shape) != shape:
                raise ConfigError(f"{name}: shape {tensors[name].shape}, expected {shape}")
        self.config = config
        self.tensors = tensors

    def __getitem__(self, name):
        return self.tensors[name]

    def copy(self) -> "PolicyParams":
        return PolicyParams(self.config, OrderedDict((k, v.copy()) for k, v in self.tensors.items()))

    def zeros_like(self) -> OrderedDict:
        return OrderedDict((k, np.zeros_like(v)) for k, v in self.tensors.items())

    def equals(self, other: "PolicyParams") -> bool:
        return (self.config == other.config
                and all(np.array_equal(a, other.tensors[k]) for k, a in self.tensors.items()))

    def check_finite(self):
        for k, v in self.tensors.items():
            if not np.all(np.isfinite(v)):
                raise FloatingPointError(f"non-finite values in parameter {k}")


def init_params(cfg: NetConfig, seed: int = 0) -> PolicyParams:
    """Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)]; layer-norm gains 1 and shifts 0."""
    rng = np.random.default_rng(seed)
    tensors = OrderedDict()
    for name, shape in param_shapes(cfg).items():
        base = name.split(".")[-1]
        if base.endswith("_g"):
            tensors[name] = np.ones(shape)
        elif base.startswith("ln") and base.endswith("_b"):
            tensors[name] = np.zeros(shape)
        else:
            fan = {"b_dep": 2, "b_in": cfg.node_dim, "b1": cfg.embedding_dim,
                   "b2": cfg.ff_dim}.get(base, shape[0])
            bound = 1.0 / np.sqrt(fan)
            tensors[name] = rng.uniform(-bound, bound, size=shape)
    return PolicyParams(cfg, tensors)


# --
# building blocks

def _split(x, h):
    B, N, d = x.shape
    return x.reshape(B, N, h, d // h).transpose(0, 2, 1, 3)


def _merge(x):
    B, h, N, dk = x.shape
    return x.transpose(0, 2, 1, 3).reshape(B, N, h * dk)


def _softmax(s, axis=-1):
    s = s - s.max(axis=axis, keepdims=True)
    e = np.exp(s)
    return e / e.sum(axis=axis, keepdims=True)


def _ln_forward(x, g, b):
    mu = x.mean(-1, keepdims=True)
    var = x.var(-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + LN_EPS)
    xhat = (x - mu) * inv
    return xhat * g + b, (xhat, inv)


def _ln_backward(dy, g, cache):
    xhat, inv = cache
    axes = tuple(range(dy.ndim - 1))
    dg = (dy * xhat).sum(axes)
    db = dy.sum(axes)
    dxh = dy * g
    dx = inv * (dxh - dxh.mean(-1, keepdims=True) - xhat * (dxh * xhat).mean(-1, keepdims=True))
    return dx, dg, db


# --
# encoder

def encode(params: PolicyParams, features: np.ndarray):
    """features: (B, N, node_dim) with the depot in row 0. Returns (H, hbar, cache)."""
    cfg = params.config
    P = params.tensors
    if features.shape[-1] != cfg.node_dim:
        raise ConfigError(f"features have {features.shape[-1]} columns, the network expects {cfg.node_dim}")
    h = cfg.heads
    dk = cfg.embedding_dim // h
    dep = features[:, :1, :2] @ P["W_dep"] + P["b_dep"]
    cus = features[:, 1:, :] @ P["W_in"] + P["b_in"]
    H = np.concatenate([dep, cus], axis=1)
    layers = []
    for l in range(cfg.encoder_layers):
        p = f"enc{l}."
        Qh, Kh, Vh = (_split(H @ P[p + w], h) for w in ("Wq", "Wk", "Wv"))
        A = _softmax(Qh @ Kh.transpose(0, 1, 3, 2) / np.sqrt(dk))
        O = _merge(A @ Vh)
        H1, ln1 = _ln_forward(H + O @ P[p + "Wo"], P[p + "ln1_g"], P[p + "ln1_b"])
        Z = H1 @ P[p + "W1"] + P[p + "b1"]
        R = np.maximum(Z, 0.0)
        H2, ln2 = _ln_forward(H1 + R @ P[p + "W2"] + P[p + "b2"], P[p + "ln2_g"], P[p + "ln2_b"])
        layers.append((H, Qh, Kh, Vh, A, O, H1, ln1, Z, R, ln2))
        H = H2
    hbar = H.mean(axis=1)
    return H, hbar, (features, layers)


def encode_backward(params: PolicyParams, cache, dH, dhbar, grads):
    cfg = params.config
    P = params.tensors
    h = cfg.heads
    dk = cfg.embedding_dim // h
    features, layers = cache
    N = features.shape[1]
    dH = dH + dhbar[:, None, :] / N
    for l in reversed(range(cfg.encoder_layers)):
        p = f"enc{l}."
        H, Qh, Kh, Vh, A, O, H1, ln1, Z, R, ln2 = layers[l]
        dX2, dg, db = _ln_backward(dH, P[p + "ln2_g"], ln2)
        grads[p + "ln2_g"] += dg
        grads[p + "ln2_b"] += db
        grads[p + "W2"] += np.einsum("bnf,bnd->fd", R, dX2)
        grads[p + "b2"] += dX2.sum((0, 1))
        dZ = (dX2 @ P[p + "W2"].T) * (Z > 0)
        grads[p + "W1"] += np.einsum("bnd,bnf->df", H1, dZ)
        grads[p + "b1"] += dZ.sum((0, 1))
        dH1 = dX2 + dZ @ P[p + "W1"].T
        dX1, dg, db = _ln_backward(dH1, P[p + "ln1_g"], ln1)
        grads[p + "ln1_g"] += dg
        grads[p + "ln1_b"] += db
        grads[p + "Wo"] += np.einsum("bnd,bne->de", O, dX1)
        dO = _split(dX1 @ P[p + "Wo"].T, h)
        dA = dO @ Vh.transpose(0, 1, 3, 2)
        dVh = A.transpose(0, 1, 3, 2) @ dO
        dS = A * (dA - (dA * A).sum(-1, keepdims=True)) / np.sqrt(dk)
        dQh = dS @ Kh
        dKh = dS.transpose(0, 1, 3, 2) @ Qh
        dHin = dX1.copy()
        for w, dproj in (("Wq", dQh), ("Wk", dKh), ("Wv", dVh)):
            dm = _merge(dproj)
            grads[p + w] += np.einsum("bnd,bne->de", H, dm)
            dHin += dm @ P[p + w].T
        dH = dHin
    grads["W_dep"] += np.einsum("bi,bd->id", features[:, 0, :2], dH[:, 0])
    grads["b_dep"] += dH[:, 0].sum(0)
    grads["W_in"] += np.einsum("bni,bnd->id", features[:, 1:], dH[:, 1:])
    grads["b_in"] += dH[:, 1:].sum((0, 1))


# --
# decoder

@dataclass
class DecoderKeys:
    H: np.ndarray
    hbar: np.ndarray
    Kg: np.ndarray  # (B, h, N, dk)
    Vg: np.ndarray  # (B, h, N, dk)
    Kp: np.ndarray  # (B, N, d)

    def take(self, idx) -> "DecoderKeys":
        return DecoderKeys(self.H[idx], self.hbar[idx], self.Kg[idx], self.Vg[idx], self.Kp[idx])


def decoder_keys(params: PolicyParams, H, hbar) -> DecoderKeys:
    P = params.tensors
    h = params.config.heads
    return DecoderKeys(H, hbar, _split(H @ P["W_gk"], h), _split(H @ P["W_gv"], h), H @ P["W_pk"])


def decode_step(params: PolicyParams, keys: DecoderKeys, current, load, mask):
    """Log-probabilities over nodes, shape (B, N); masked entries are ~-1e9.

    ``current`` (B,) node indices, ``load`` (B,) remaining load / Q, ``mask``
    (B, N) allowed actions.
    """
    cfg = params.config
    P = params.tensors
    h, d = cfg.heads, cfg.embedding_dim
    dk = d // h
    if not mask.any(axis=1).all():
        raise ValueError("every episode needs at least one allowed action")
    B = len(current)
    rows = np.arange(B)
    parts = [keys.hbar, keys.H[rows, current]]
    if cfg.problem == CVRP:
        parts.append(np.asarray(load, dtype=float)[:, None])
    ctx = np.concatenate(parts, axis=1)
    q = (ctx @ P["W_ctx"]).reshape(B, h, 1, dk)
    penalty = np.where(mask, 0.0, MASK_VALUE)
    S = (q @ keys.Kg.transpose(0, 1, 3, 2))[:, :, 0, :] / np.sqrt(dk) + penalty[:, None, :]
    A = _softmax(S)
    O = (A[:, :, None, :] @ keys.Vg)[:, :, 0, :].reshape(B, d)
    g = O @ P["W_go"]
    z = np.einsum("bd,bnd->bn", g, keys.Kp) / np.sqrt(d)
    t = np.tanh(z)
    u = cfg.clip * t + penalty
    m = u.max(axis=1, keepdims=True)
    logp = u - m - np.log(np.exp(u - m).sum(axis=1, keepdims=True))
    cache = (current, ctx, q, A, O, g, t, np.exp(logp))
    return logp, cache


def decode_step_backward(params: PolicyParams, keys: DecoderKeys, cache, dlogp, grads, dkeys):
    """Accumulate gradients of sum(dlogp * logp) into ``grads`` and ``dkeys``."""
    cfg = params.config
    P = params.tensors
    h, d = cfg.heads, cfg.embedding_dim
    dk = d // h
    current, ctx, q, A, O, g, t, p = cache
    B = len(current)
    du = dlogp - p * dlogp.sum(axis=1, keepdims=True)
    dz = du * cfg.clip * (1.0 - t * t) / np.sqrt(d)
    dg = np.einsum("bn,bnd->bd", dz, keys.Kp)
    dkeys["Kp"] += dz[:, :, None] * g[:, None, :]
    grads["W_go"] += O.T @ dg
    dO = (dg @ P["W_go"].T).reshape(B, h, 1, dk)
    dA = (dO @ keys.Vg.transpose(0, 1, 3, 2))[:, :, 0, :]
    dkeys["Vg"] += A[:, :, :, None] * dO
    dS = A * (dA - (dA * A).sum(-1, keepdims=True)) / np.sqrt(dk)
    dq = (dS[:, :, None, :] @ keys.Kg).reshape(B, d)
    dkeys["Kg"] += dS[:, :, :, None] * q
    grads["W_ctx"] += ctx.T @ dq
    dctx = dq @ P["W_ctx"].T
    dkeys["hbar"] += dctx[:, :d]
    np.add.at(dkeys["H"], (np.arange(B), current), dctx[:, d : 2 * d])


def decoder_keys_backward(params: PolicyParams, keys: DecoderKeys, dkeys, grads):
    """Turn key gradients into gradients for H / hbar and the key projections."""
    P = params.tensors
    H = keys.H
    dKg = _merge(dkeys["Kg"])
    dVg = _merge(dkeys["Vg"])
    grads["W_gk"] += np.einsum("bnd,bne->de", H, dKg)
    grads["W_gv"] += np.einsum("bnd,bne->de", H, dVg)
    grads["W_pk"] += np.einsum("bnd,bne->de", H, dkeys["Kp"])
    dH = dkeys["H"] + dKg @ P["W_gk"].T + dVg @ P["W_gv"].T + dkeys["Kp"] @ P["W_pk"].T
    return dH, dkeys["hbar"]


def empty_key_grads(keys: DecoderKeys) -> dict:
    return {"H": np.zeros_like(keys.H), "hbar": np.zeros_like(keys.hbar),
            "Kg": np.zeros_like(keys.Kg), "Vg": np.zeros_like(keys.Vg),
            "Kp": np.zeros_like(keys.Kp)}
