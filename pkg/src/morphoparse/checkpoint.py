"""Checkpoint persistence.

Binary layout (little-endian): magic "MCK1", version u32, entry count u32;
then per entry a u16 name length, the UTF-8 name, a u8 rank, u32 dims and
a float32 payload; finally a CRC32 over everything before it.  Experiment
metadata (config snapshot, best dev metric, selected epoch) travels as a
reserved "__meta__" entry whose payload is the UTF-8 JSON encoded
byte-per-float, which keeps the container format uniform.
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

MAGIC = b"MCK1"
VERSION = 1
META_ENTRY = "__meta__"


class CheckpointError(ValueError):
    pass


@dataclass
class Checkpoint:
    entries: dict[str, np.ndarray]
    config: dict = field(default_factory=dict)
    best_metric: float = 0.0
    epoch: int = 0

    @classmethod
    def from_params(cls, params: dict, config: dict, best_metric: float,
                    epoch: int) -> "Checkpoint":
        entries = {}
        for name, value in params.items():
            data = value.data if hasattr(value, "data") else value
            entries[name] = np.ascontiguousarray(data, dtype=np.float32)
        return cls(entries=entries, config=config, best_metric=best_metric,
                   epoch=epoch)

    def load_into(self, params: dict) -> None:
        """Copy stored arrays into live parameters; names and shapes must
        match exactly."""
        missing = set(params) - set(self.entries)
        extra = set(self.entries) - set(params) - {META_ENTRY}
        if missing or extra:
            raise CheckpointError(
                f"parameter names disagree (missing {sorted(missing)}, "
                f"unexpected {sorted(extra)})")
        for name, p in params.items():
            stored = self.entries[name]
            if stored.shape != p.data.shape:
                raise CheckpointError(
                    f"{name}: stored shape {stored.shape} != model shape {p.data.shape}")
            p.data[...] = stored.astype(p.data.dtype, copy=False)


def _pack_entry(name: str, arr: np.ndarray) -> bytes:
    encoded = name.encode("utf-8")
    if len(encoded) > 0xFFFF:
        raise CheckpointError(f"entry name too long: {name!r}")
    if arr.ndim > 0xFF:
        raise CheckpointError(f"entry rank too large: {arr.ndim}")
    head = struct.pack("<H", len(encoded)) + encoded + struct.pack("<B", arr.ndim)
    head += struct.pack(f"<{arr.ndim}I", *arr.shape)
    return head + np.ascontiguousarray(arr, dtype="<f4").tobytes()


def save_checkpoint(path, ckpt: Checkpoint) -> None:
    meta = json.dumps({
        "config": ckpt.config,
        "best_metric": ckpt.best_metric,
        "epoch": ckpt.epoch,
    }, sort_keys=True).encode("utf-8")
    meta_arr = np.frombuffer(meta, dtype=np.uint8).astype(np.float32)
    blob = MAGIC + struct.pack("<II", VERSION, len(ckpt.entries) + 1)
    blob += _pack_entry(META_ENTRY, meta_arr)
    for name in ckpt.entries:
        blob += _pack_entry(name, ckpt.entries[name])
    blob += struct.pack("<I", zlib.crc32(blob) & 0xFFFFFFFF)
    with open(path, "wb") as fh:
        fh.write(blob)


def load_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 16 or blob[:4] != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)")
    (stored_crc,) = struct.unpack("<I", blob[-4:])
    if zlib.crc32(blob[:-4]) & 0xFFFFFFFF != stored_crc:
        raise CheckpointError("checkpoint CRC mismatch (corrupt or truncated)")
    version, count = struct.unpack("<II", blob[4:12])
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    pos = 12
    end = len(blob) - 4
    entries: dict[str, np.ndarray] = {}

    def take(n):
        nonlocal pos
        if pos + n > end:
            raise CheckpointError("truncated checkpoint")
        out = blob[pos:pos + n]
        pos += n
        return out

    for _ in range(count):
        (name_len,) = struct.unpack("<H", take(2))
        name = take(name_len).decode("utf-8")
        (rank,) = struct.unpack("<B", take(1))
        shape = struct.unpack(f"<{rank}I", take(4 * rank)) if rank else ()
        n_values = int(np.prod(shape)) if shape else 1
        payload = take(4 * n_values)
        entries[name] = np.frombuffer(payload, dtype="<f4").reshape(shape).copy()
    if pos != end:
        raise CheckpointError("trailing bytes after final entry")

    meta = {"config": {}, "best_metric": 0.0, "epoch": 0}
    if META_ENTRY in entries:
        raw = entries.pop(META_ENTRY)
        meta = json.loads(raw.astype(np.uint8).tobytes().decode("utf-8"))
    return Checkpoint(entries=entries, config=meta["config"],
                      best_metric=meta["best_metric"], epoch=meta["epoch"])
