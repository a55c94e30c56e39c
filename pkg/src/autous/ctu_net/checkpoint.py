"""Single-file checkpoint container.

Layout: magic, format version, the model config as UTF-8 JSON, then named
arrays stored as little-endian float32 (name, shape, raw values).  Loading
validates the version and the full shape table before touching a model, and a
save/load round trip reproduces every array bitwise.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from dataclasses import dataclass

import numpy as np
import torch

from ..exceptions import ValidationError
from .config import ModelConfig
from .model import CTUNet, build_model

MAGIC = b"CTUNETCK"
FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    config: ModelConfig
    arrays: dict[str, np.ndarray]  # name -> float32 array
    format_version: int = FORMAT_VERSION


def checkpoint_from_model(model: CTUNet) -> Checkpoint:
    arrays = {}
    for name, tensor in model.state_dict().items():
        arrays[name] = (
            tensor.detach().cpu().to(torch.float32).numpy().astype("<f4")
        )
    return Checkpoint(config=model.config, arrays=arrays)


def save_checkpoint(model: CTUNet, path: str) -> Checkpoint:
    ckpt = checkpoint_from_model(model)
    write_checkpoint(ckpt, path)
    return ckpt


def write_checkpoint(ckpt: Checkpoint, path: str) -> None:
    config_blob = json.dumps(ckpt.config.to_dict()).encode("utf-8")
    chunks = [MAGIC, struct.pack("<I", ckpt.format_version)]
    chunks.append(struct.pack("<I", len(config_blob)))
    chunks.append(config_blob)
    chunks.append(struct.pack("<I", len(ckpt.arrays)))
    for name, arr in ckpt.arrays.items():
        encoded = name.encode("utf-8")
        arr = np.asarray(arr, dtype="<f4")
        if not arr.flags["C_CONTIGUOUS"]:  # 0-d arrays are always contiguous
            arr = np.ascontiguousarray(arr)
        chunks.append(struct.pack("<H", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack("<B", arr.ndim))
        chunks.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        chunks.append(arr.tobytes())

    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".ckpt-")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(b"".join(chunks))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_checkpoint(path: str) -> Checkpoint:
    with open(path, "rb") as f:
        blob = f.read()
    view = memoryview(blob)
    if bytes(view[:8]) != MAGIC:
        raise ValidationError(f"{path}: not a checkpoint file (bad magic)")
    offset = 8
    (version,) = struct.unpack_from("<I", view, offset)
    offset += 4
    if version != FORMAT_VERSION:
        raise ValidationError(
            f"{path}: format version {version} not supported "
            f"(expected {FORMAT_VERSION})"
        )
    (config_len,) = struct.unpack_from("<I", view, offset)
    offset += 4
    config = ModelConfig.from_dict(
        json.loads(bytes(view[offset : offset + config_len]).decode("utf-8"))
    )
    offset += config_len
    (num_arrays,) = struct.unpack_from("<I", view, offset)
    offset += 4

    arrays: dict[str, np.ndarray] = {}
    for _ in range(num_arrays):
        (name_len,) = struct.unpack_from("<H", view, offset)
        offset += 2
        name = bytes(view[offset : offset + name_len]).decode("utf-8")
        offset += name_len
        (ndim,) = struct.unpack_from("<B", view, offset)
        offset += 1
        shape = struct.unpack_from(f"<{ndim}I", view, offset)
        offset += 4 * ndim
        count = int(np.prod(shape)) if ndim else 1
        arr = np.frombuffer(view, dtype="<f4", count=count, offset=offset).reshape(
            shape
        )
        offset += 4 * count
        arrays[name] = arr.copy()
    return Checkpoint(config=config, arrays=arrays, format_version=version)


def model_from_checkpoint(ckpt: Checkpoint) -> CTUNet:
    """Rebuild the model and install the stored arrays (shape table verified)."""
    model = build_model(ckpt.config)
    state = model.state_dict()
    expected = {name: tuple(t.shape) for name, t in state.items()}
    got = {name: tuple(a.shape) for name, a in ckpt.arrays.items()}
    if expected != got:
        missing = sorted(set(expected) - set(got))
        extra = sorted(set(got) - set(expected))
        mismatched = sorted(
            n for n in set(expected) & set(got) if expected[n] != got[n]
        )
        raise ValidationError(
            f"checkpoint shape table mismatch: missing={missing} "
            f"extra={extra} mismatched={mismatched}"
        )
    new_state = {
        name: torch.from_numpy(ckpt.arrays[name]).to(state[name].dtype)
        for name in state
    }
    model.load_state_dict(new_state)
    return model


def load_model(path: str) -> CTUNet:
    return model_from_checkpoint(read_checkpoint(path))
