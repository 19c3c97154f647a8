"""Weight files and TSP-to-CVRP weight reuse.

File layout (little-endian): magic ``CVRPW\\0``, uint16 version, uint32 length
and UTF-8 JSON of the network configuration, uint32 tensor count, then per
tensor: uint16 name length, name, uint8 rank, uint32 dims, float64 payload
in row-major order. The training configuration goes to a JSON sidecar.
"""
from __future__ import annotations

import json
import struct
from collections import OrderedDict
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .network import CVRP, TSP, ConfigError, NetConfig, PolicyParams, init_params

MAGIC = b"CVRPW\x00"
VERSION = 1


class WeightFileError(ValueError):
    pass


def dumps_params(params: PolicyParams) -> bytes:
    header = json.dumps(asdict(params.config), sort_keys=True).encode()
    out = [MAGIC, struct.pack("<HI", VERSION, len(header)), header,
           struct.pack("<I", len(params.tensors))]
    for name, t in params.tensors.items():
        raw = name.encode()
        out.append(struct.pack("<HB", len(raw), t.ndim) + raw)
        out.append(struct.pack(f"<{t.ndim}I", *t.shape))
        out.append(np.ascontiguousarray(t, dtype="<f8").tobytes())
    return b"".join(out)


def loads_params(data: bytes) -> PolicyParams:
    if not data.startswith(MAGIC):
        raise WeightFileError("not a weight file (bad magic)")
    pos = len(MAGIC)
    version, hlen = struct.unpack_from("<HI", data, pos)
    if version != VERSION:
        raise WeightFileError(f"unsupported weight file version {version}")
    pos += 6
    config = NetConfig(**json.loads(data[pos : pos + hlen]))
    pos += hlen
    (count,) = struct.unpack_from("<I", data, pos)
    pos += 4
    tensors = OrderedDict()
    for _ in range(count):
        nlen, ndim = struct.unpack_from("<HB", data, pos)
        pos += 3
        name = data[pos : pos + nlen].decode()
        pos += nlen
        shape = struct.unpack_from(f"<{ndim}I", data, pos)
        pos += 4 * ndim
        size = int(np.prod(shape)) if ndim else 1
        tensors[name] = np.frombuffer(data, dtype="<f8", count=size, offset=pos).reshape(shape).astype(float)
        pos += 8 * size
    if pos != len(data):
        raise WeightFileError("trailing bytes after the last tensor")
    return PolicyParams(config, tensors)


def save_params(params: PolicyParams, path, train_config: dict | None = None) -> None:
    path = Path(path)
    path.write_bytes(dumps_params(params))
    if train_config is not None:
        sidecar = path.with_name(path.name + ".json")
        sidecar.write_text(json.dumps(train_config, indent=2, sort_keys=True) + "\n")


def load_params(path) -> PolicyParams:
    return loads_params(Path(path).read_bytes())


def load_sidecar(path) -> dict | None:
    sidecar = Path(path).with_name(Path(path).name + ".json")
    return json.loads(sidecar.read_text()) if sidecar.exists() else None


def transfer_init(tsp_params: PolicyParams, target: NetConfig, seed: int = 0) -> PolicyParams:
    """CVRP parameters that start from a TSP policy.

    Tensors of matching shape are copied. The customer projection gains a
    demand column and the context projection a load row, both zero, so the
    new network sees exactly what the TSP network saw until training moves
    them. Anything else is freshly initialised.
    """
    src = tsp_params.config
    if src.problem != TSP or target.problem != CVRP:
        raise ConfigError("transfer goes from a TSP policy to a CVRP policy")
    if src.embedding_dim != target.embedding_dim:
        raise ConfigError(
            f"embedding_dim mismatch: TSP policy has {src.embedding_dim}, target wants {target.embedding_dim}")
    fresh = init_params(target, seed)
    tensors = OrderedDict()
    for name, t in fresh.tensors.items():
        old = tsp_params.tensors.get(name)
        if old is not None and old.shape == t.shape:
            tensors[name] = old.copy()
        elif name == "W_in" and old is not None:
            w = np.zeros(t.shape)
            w[: old.shape[0]] = old
            tensors[name] = w
        elif name == "W_ctx" and old is not None:
            # rows: graph embedding, current node, then the new load row
            w = np.zeros(t.shape)
            w[: old.shape[0]] = old
            tensors[name] = w
        else:
            tensors[name] = t
    return PolicyParams(target, tensors)
