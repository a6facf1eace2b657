"""Versioned little-endian binary container with a JSON field manifest.

Layout::

    magic (8 bytes) | version (u32 LE) | manifest length (u64 LE) | manifest (UTF-8 JSON)
    | raw array payloads, concatenated in manifest order

The manifest records name, dtype (explicit little-endian), shape and byte
offset of each array plus a free-form ``meta`` object. JSON is written with
sorted keys so that identical inputs always yield identical bytes.
"""
from __future__ import annotations

import json
import struct

import numpy as np


def pack(magic: bytes, version: int, arrays: dict, meta: dict | None = None) -> bytes:
    if len(magic) != 8:
        raise ValueError("magic must be 8 bytes")
    fields = []
    chunks = []
    offset = 0
    for name in sorted(arrays):
        a = np.asarray(arrays[name])
        le = a.astype(a.dtype.newbyteorder("<"), copy=False)
        raw = np.ascontiguousarray(le).tobytes()
        fields.append({"name": name, "dtype": le.dtype.str, "shape": list(a.shape),
                       "offset": offset, "nbytes": len(raw)})
        chunks.append(raw)
        offset += len(raw)
    manifest = json.dumps({"fields": fields, "meta": meta or {}}, sort_keys=True,
                          separators=(",", ":")).encode()
    head = magic + struct.pack("<IQ", version, len(manifest))
    return head + manifest + b"".join(chunks)


def unpack(blob: bytes, magic: bytes, version: int):
    """Inverse of :func:`pack`; returns ``(arrays, meta)``."""
    if blob[:8] != magic:
        raise ValueError(f"not a {magic!r} file")
    ver, mlen = struct.unpack("<IQ", blob[8:20])
    if ver != version:
        raise ValueError(f"format version {ver} does not match expected {version}")
    manifest = json.loads(blob[20:20 + mlen].decode())
    base = 20 + mlen
    arrays = {}
    for f in manifest["fields"]:
        start = base + f["offset"]
        buf = blob[start:start + f["nbytes"]]
        if len(buf) != f["nbytes"]:
            raise ValueError(f"truncated payload for field {f['name']!r}")
        a = np.frombuffer(buf, dtype=np.dtype(f["dtype"])).reshape(f["shape"])
        arrays[f["name"]] = a.astype(a.dtype.newbyteorder("="))
    return arrays, manifest["meta"]


def rng_state(rng: np.random.Generator) -> dict:
    """JSON-serialisable bit-generator state."""
    return json.loads(json.dumps(rng.bit_generator.state))


def rng_from_state(state: dict) -> np.random.Generator:
    bg = getattr(np.random, state["bit_generator"])()
    bg.state = state
    return np.random.Generator(bg)
