"""Checkpoint container: JSON metadata + named float64 arrays.

Layout (all little-endian):
  magic ``CKP1`` | u32 version | u32 meta_len | meta JSON (utf-8)
  | u32 n_entries | per entry: u16 name_len, name utf-8, u8 ndim,
  ndim x u32 dims, float64 values.

Metadata carries the model-rebuild arguments and the training seed;
entries include BatchNorm running statistics, so a reloaded model gives
bit-identical inference.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile

import numpy as np

from ..errors import BadMagic, TruncatedPayload

MAGIC = b"CKP1"
VERSION = 1


def save_checkpoint(path, meta: dict, state: dict) -> None:
    meta_blob = json.dumps(meta, sort_keys=True).encode("utf-8")
    parts = [MAGIC, struct.pack("<II", VERSION, len(meta_blob)), meta_blob,
             struct.pack("<I", len(state))]
    for name in sorted(state):
        arr = np.ascontiguousarray(state[name], dtype="<f8")
        blob = name.encode("utf-8")
        parts.append(struct.pack("<H", len(blob)))
        parts.append(blob)
        parts.append(struct.pack("<B", arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        parts.append(arr.tobytes())
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".ckpt.tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(b"".join(parts))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_checkpoint(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != MAGIC:
        raise BadMagic(f"{path}: not a checkpoint file")
    try:
        version, meta_len = struct.unpack_from("<II", raw, 4)
        pos = 12
        meta = json.loads(raw[pos : pos + meta_len].decode("utf-8"))
        pos += meta_len
        (n_entries,) = struct.unpack_from("<I", raw, pos)
        pos += 4
        state = {}
        for _ in range(n_entries):
            (name_len,) = struct.unpack_from("<H", raw, pos)
            pos += 2
            name = raw[pos : pos + name_len].decode("utf-8")
            pos += name_len
            (ndim,) = struct.unpack_from("<B", raw, pos)
            pos += 1
            shape = struct.unpack_from(f"<{ndim}I", raw, pos)
            pos += 4 * ndim
            count = int(np.prod(shape)) if ndim else 1
            arr = np.frombuffer(raw, dtype="<f8", count=count, offset=pos).reshape(shape)
            pos += 8 * count
            state[name] = arr.astype(np.float64)
    except (struct.error, ValueError, UnicodeDecodeError) as err:
        raise TruncatedPayload(f"{path}: {err}") from None
    if pos != len(raw):
        raise TruncatedPayload(f"{path}: {len(raw) - pos} trailing bytes")
    return meta, state
