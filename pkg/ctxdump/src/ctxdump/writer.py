"""CTXD binary format.

Layout (little-endian): magic "CTXD", version u32, layer count u32, d_ctx
u32, sentence count u32; then, per sentence, token count u32 followed by
token-major, layer-major float32 vectors.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"CTXD"
VERSION = 1


class FormatError(ValueError):
    pass


def write_ctxd(path, sentence_blocks: list[np.ndarray], layers: int, d_ctx: int) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IIII", VERSION, layers, d_ctx, len(sentence_blocks)))
        for block in sentence_blocks:
            if block.shape[1:] != (layers, d_ctx):
                raise FormatError(
                    f"block shape {block.shape} disagrees with header "
                    f"({layers} layers, {d_ctx} dims)")
            fh.write(struct.pack("<I", block.shape[0]))
            fh.write(np.ascontiguousarray(block, dtype="<f4").tobytes())


def read_ctxd(path) -> tuple[int, int, list[np.ndarray]]:
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise FormatError("bad magic")
        version, layers, d_ctx, count = struct.unpack("<IIII", fh.read(16))
        if version != VERSION:
            raise FormatError(f"unsupported version {version}")
        blocks = []
        for _ in range(count):
            raw = fh.read(4)
            if len(raw) != 4:
                raise FormatError("truncated file")
            (n_tok,) = struct.unpack("<I", raw)
            payload = fh.read(n_tok * layers * d_ctx * 4)
            if len(payload) != n_tok * layers * d_ctx * 4:
                raise FormatError("truncated file")
            blocks.append(np.frombuffer(payload, dtype="<f4")
                          .reshape(n_tok, layers, d_ctx).copy())
        return layers, d_ctx, blocks
