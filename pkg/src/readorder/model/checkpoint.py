"""Single-file model checkpoints.

Layout: 4-byte magic, little-endian uint32 format version, uint32 header
length, a JSON header (config plus the parameter manifest in state-dict
order), then the raw parameter blob as little-endian float32.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict

import numpy as np
import torch

from ..core import DataError
from .config import ModelConfig
from .network import ReadingOrderNet

MAGIC = b"RORD"
FORMAT_VERSION = 1


def save_checkpoint(net: ReadingOrderNet, path: str) -> None:
    state = net.state_dict()
    header = {
        "format_version": FORMAT_VERSION,
        "config": asdict(net.config),
        "params": [{"name": name, "shape": list(tensor.shape)} for name, tensor in state.items()],
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as handle:
        handle.write(MAGIC)
        handle.write(struct.pack("<II", FORMAT_VERSION, len(header_bytes)))
        handle.write(header_bytes)
        for tensor in state.values():
            handle.write(tensor.detach().cpu().numpy().astype("<f4").tobytes())


def load_checkpoint(path: str) -> ReadingOrderNet:
    with open(path, "rb") as handle:
        magic = handle.read(4)
        if magic != MAGIC:
            raise DataError(f"{path}: not a model checkpoint (bad magic {magic!r})")
        version, header_len = struct.unpack("<II", handle.read(8))
        if version != FORMAT_VERSION:
            raise DataError(f"{path}: unsupported checkpoint version {version}")
        try:
            header = json.loads(handle.read(header_len).decode("utf-8"))
            config = ModelConfig(**header["config"])
            manifest = header["params"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise DataError(f"{path}: corrupt checkpoint header: {exc}") from exc
        torch.manual_seed(config.seed)
        net = ReadingOrderNet(config)
        state = {}
        for entry in manifest:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            blob = handle.read(count * 4)
            if len(blob) != count * 4:
                raise DataError(f"{path}: truncated parameter blob at {entry['name']!r}")
            array = np.frombuffer(blob, dtype="<f4").reshape(shape).copy()
            state[entry["name"]] = torch.from_numpy(array)
        if handle.read(1):
            raise DataError(f"{path}: trailing bytes after parameter blob")
    try:
        net.load_state_dict(state, strict=True)
    except RuntimeError as exc:
        raise DataError(f"{path}: checkpoint does not match model: {exc}") from exc
    net.eval()
    return net
