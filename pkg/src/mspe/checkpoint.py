"""Binary checkpoint container.

Layout: magic "MSPE" | u32 format version | u32 header length | UTF-8 JSON
manifest | payload of little-endian float32 blocks. The manifest lists named
entries (kind, shape, dtype, byte offset, byte length, offsets relative to
the payload) plus an arbitrary config object echoed for provenance.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import DataFormatError

MAGIC = b"MSPE"
FORMAT_VERSION = 1


def save_checkpoint(path, arrays: dict, kinds: dict | None = None, config: dict | None = None):
    """Write named float32 arrays; entry order is name-sorted so identical
    content gives identical bytes."""
    kinds = kinds or {}
    entries = []
    blobs = []
    offset = 0
    for name in sorted(arrays):
        arr = np.asarray(arrays[name], dtype="<f4")  # tobytes() gives C order
        blob = arr.tobytes()
        entries.append(
            {
                "name": name,
                "kind": kinds.get(name, "tensor"),
                "shape": list(arr.shape),
                "dtype": "f32",
                "offset": offset,
                "length": len(blob),
            }
        )
        blobs.append(blob)
        offset += len(blob)
    header = json.dumps(
        {"entries": entries, "config": config or {}}, sort_keys=True, separators=(",", ":")
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(header)))
        fh.write(header)
        for blob in blobs:
            fh.write(blob)


def load_checkpoint(path):
    """Read a container; returns (arrays, kinds, config). Version or layout
    problems raise DataFormatError naming what mismatched."""
    data = Path(path).read_bytes()
    if len(data) < 12:
        raise DataFormatError(f"container truncated: {len(data)} bytes")
    if data[:4] != MAGIC:
        raise DataFormatError(f"bad magic {data[:4]!r}, expected {MAGIC!r}")
    version, header_len = struct.unpack("<II", data[4:12])
    if version != FORMAT_VERSION:
        raise DataFormatError(
            f"container version {version} unsupported, this build reads version {FORMAT_VERSION}"
        )
    if len(data) < 12 + header_len:
        raise DataFormatError(f"header claims {header_len} bytes, file has {len(data) - 12}")
    try:
        header = json.loads(data[12 : 12 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"manifest is not valid JSON: {exc}") from exc
    payload = data[12 + header_len :]
    arrays = {}
    kinds = {}
    seen = []
    for entry in header["entries"]:
        start, length = entry["offset"], entry["length"]
        if start < 0 or start + length > len(payload):
            raise DataFormatError(
                f"entry {entry['name']!r} spans [{start}, {start + length}) outside the "
                f"{len(payload)}-byte payload"
            )
        for other, (o_start, o_len) in seen:
            if start < o_start + o_len and o_start < start + length:
                raise DataFormatError(f"entries {entry['name']!r} and {other!r} overlap")
        seen.append((entry["name"], (start, length)))
        expected = int(np.prod(entry["shape"])) * 4 if entry["shape"] else 4
        if length != expected:
            raise DataFormatError(
                f"entry {entry['name']!r} length {length} != shape {entry['shape']} * 4"
            )
        arr = np.frombuffer(payload[start : start + length], dtype="<f4")
        arrays[entry["name"]] = arr.reshape(entry["shape"]).copy()
        kinds[entry["name"]] = entry.get("kind", "tensor")
    return arrays, kinds, header.get("config", {})
