"""Shared plumbing: stable seed derivation, atomic file writes, checkpoints.

Everything here must be deterministic across processes and platforms, so no
builtin ``hash()`` (randomized per process) and no zip containers (embedded
timestamps break byte-stable round trips).
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import tempfile

import numpy as np

CHECKPOINT_MAGIC = b"AUGSEARCH-CKPT"
CHECKPOINT_VERSION = 1


def stable_hash(*parts: int | str) -> int:
    """Hash ints/strings to a 64-bit int, stable across runs and machines."""
    h = hashlib.sha256()
    for part in parts:
        h.update(repr(part).encode("utf-8"))
        h.update(b"\x1f")
    return int.from_bytes(h.digest()[:8], "little")


def derive_rng(seed: int, *parts: int | str) -> random.Random:
    """Independent random stream for (seed, *parts).

    Used to give every example/episode its own stream so that processing
    order never changes per-item results.
    """
    return random.Random(stable_hash(seed, *parts))


def write_text_atomic(path: str | os.PathLike, text: str) -> None:
    """Write text via a temp file + rename so readers never see partial files."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_checkpoint(path: str | os.PathLike, arrays: dict[str, np.ndarray], meta: dict) -> None:
    """Versioned binary dump: JSON header + raw little-endian float64 buffers.

    Byte-stable: saving identical state twice produces identical bytes.
    """
    names = sorted(arrays)
    header = {
        "version": CHECKPOINT_VERSION,
        "meta": meta,
        "arrays": [{"name": n, "shape": list(arrays[n].shape)} for n in names],
    }
    blob = bytearray()
    blob += CHECKPOINT_MAGIC + b"\n"
    blob += json.dumps(header, sort_keys=True).encode("utf-8") + b"\n"
    for n in names:
        arr = np.ascontiguousarray(arrays[n], dtype=np.float64)
        blob += arr.tobytes()

    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(bytes(blob))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_checkpoint(path: str | os.PathLike) -> tuple[dict[str, np.ndarray], dict]:
    """Inverse of :func:`save_checkpoint`. Returns (arrays, meta)."""
    with open(path, "rb") as fh:
        magic = fh.readline().rstrip(b"\n")
        if magic != CHECKPOINT_MAGIC:
            raise ValueError(f"{path}: not an augsearch checkpoint")
        header = json.loads(fh.readline().decode("utf-8"))
        if header.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {header.get('version')}")
        arrays: dict[str, np.ndarray] = {}
        for spec in header["arrays"]:
            shape = tuple(spec["shape"])
            count = int(np.prod(shape)) if shape else 1
            buf = fh.read(count * 8)
            if len(buf) != count * 8:
                raise ValueError(f"{path}: truncated checkpoint")
            arrays[spec["name"]] = np.frombuffer(buf, dtype=np.float64).reshape(shape).copy()
    return arrays, header["meta"]
