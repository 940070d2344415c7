"""Named-tensor checkpoint container.

Layout (little-endian throughout):
  magic "S2BF", u32 format version,
  u32 metadata byte length, UTF-8 key=value lines,
  u32 tensor count, then per tensor:
    u32 name length, name bytes, u32 rank, u32*rank dims,
    float32 values row-major.

Round trips are bit-exact: values are stored and restored as float32.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"S2BF"
VERSION = 1


class CheckpointFormatError(ValueError):
    """Raised when a file does not match the S2BF layout."""


def save_checkpoint(path, tensors: dict[str, np.ndarray], metadata: dict[str, str]) -> None:
    meta_lines = []
    for key, value in metadata.items():
        if "=" in key or "\n" in key or "\n" in str(value):
            raise ValueError(f"metadata key/value must be single-line: {key!r}")
        meta_lines.append(f"{key}={value}")
    meta_blob = "\n".join(meta_lines).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<I", len(meta_blob)))
        fh.write(meta_blob)
        fh.write(struct.pack("<I", len(tensors)))
        for name, values in tensors.items():
            arr = np.ascontiguousarray(values, dtype="<f4")
            raw = name.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<I", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            fh.write(arr.tobytes())


def load_checkpoint(path) -> tuple[dict[str, np.ndarray], dict[str, str]]:
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise CheckpointFormatError(f"{path}: bad magic, not an S2BF checkpoint")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != VERSION:
            raise CheckpointFormatError(f"{path}: unsupported version {version}")
        (meta_len,) = struct.unpack("<I", fh.read(4))
        meta_blob = fh.read(meta_len).decode("utf-8")
        metadata = {}
        for line in meta_blob.split("\n"):
            if line:
                key, _, value = line.partition("=")
                metadata[key] = value
        (count,) = struct.unpack("<I", fh.read(4))
        tensors = {}
        for _ in range(count):
            (name_len,) = struct.unpack("<I", fh.read(4))
            name = fh.read(name_len).decode("utf-8")
            (rank,) = struct.unpack("<I", fh.read(4))
            dims = struct.unpack(f"<{rank}I", fh.read(4 * rank))
            n = int(np.prod(dims, dtype=np.int64)) if rank else 1
            values = np.frombuffer(fh.read(4 * n), dtype="<f4").reshape(dims)
            tensors[name] = values.copy()  # writable, native layout
        return tensors, metadata
