"""CSV metrics and the versioned checkpoint container.

Checkpoint layout (all integers little-endian)::

    b"STARCKPT" | u32 version | u64 payload length | 32-byte SHA-256 of payload | payload
    payload = u32 header length | JSON header | raw array bytes

The JSON header lists every array as ``[name, dtype, shape, offset, nbytes]``
plus free-form metadata. Serialisation is canonical (sorted keys, no
timestamps), so saving the same state twice yields identical bytes.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"STARCKPT"
VERSION = 1
_PREFIX = struct.Struct("<8sIQ32s")


class CheckpointError(ValueError):
    """Unreadable or corrupted checkpoint."""


class CheckpointVersionError(CheckpointError):
    pass


@dataclasses.dataclass(frozen=True)
class MetricRow:
    episode: int
    step: int
    reward: float
    P_w: float
    P_s: float
    hits_bs: int
    hits_stars: int
    qos_met: int
    mode: str
    lambda_r: int
    lambda_u: int


METRIC_COLUMNS = tuple(f.name for f in dataclasses.fields(MetricRow))


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_csv(rows, path) -> Path:
    """Write a header line and one line per row; floats keep full precision."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(METRIC_COLUMNS)
            for row in rows:
                w.writerow([_fmt(getattr(row, c)) for c in METRIC_COLUMNS])
    except OSError as exc:
        raise OSError(f"cannot write metrics to {path}: {exc}") from exc
    return path


def read_csv(path) -> list[MetricRow]:
    types = {f.name: f.type for f in dataclasses.fields(MetricRow)}
    conv = {"int": int, "float": float, "str": str}
    out = []
    with Path(path).open(newline="") as fh:
        for rec in csv.DictReader(fh):
            out.append(MetricRow(**{k: conv[types[k]](v) for k, v in rec.items()}))
    return out


def write_table(records: list[dict], path) -> Path:
    """Generic CSV for aggregated sweep tables."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = list(records[0]) if records else []
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for rec in records:
            w.writerow([_fmt(rec[c]) for c in cols])
    return path


# ---------------------------------------------------------------------------
# checkpoint container
# ---------------------------------------------------------------------------

def encode_checkpoint(arrays: dict[str, np.ndarray], meta: dict) -> bytes:
    entries, chunks, offset = [], [], 0
    for name in sorted(arrays):
        arr = np.ascontiguousarray(arrays[name])
        dt = arr.dtype.newbyteorder("<") if arr.dtype.byteorder == ">" else arr.dtype
        raw = arr.astype(dt, copy=False).tobytes()
        entries.append([name, dt.str, list(arr.shape), offset, len(raw)])
        chunks.append(raw)
        offset += len(raw)
    header = json.dumps({"arrays": entries, "meta": meta}, sort_keys=True, separators=(",", ":")).encode()
    payload = struct.pack("<I", len(header)) + header + b"".join(chunks)
    return _PREFIX.pack(MAGIC, VERSION, len(payload), hashlib.sha256(payload).digest()) + payload


def decode_checkpoint(blob: bytes) -> tuple[dict[str, np.ndarray], dict]:
    if len(blob) < _PREFIX.size:
        raise CheckpointError("checkpoint truncated before its header")
    magic, version, length, digest = _PREFIX.unpack_from(blob)
    if magic != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)")
    if version != VERSION:
        raise CheckpointVersionError(f"checkpoint format version {version} is incompatible with {VERSION}")
    payload = blob[_PREFIX.size:]
    if len(payload) != length:
        raise CheckpointError(f"checkpoint truncated: {len(payload)} of {length} payload bytes")
    if hashlib.sha256(payload).digest() != digest:
        raise CheckpointError("checkpoint checksum mismatch")
    (hlen,) = struct.unpack_from("<I", payload)
    header = json.loads(payload[4:4 + hlen])
    data = payload[4 + hlen:]
    arrays = {}
    for name, dtype, shape, offset, nbytes in header["arrays"]:
        arrays[name] = np.frombuffer(data[offset:offset + nbytes], dtype=np.dtype(dtype)).reshape(shape).copy()
    return arrays, header["meta"]


def save_checkpoint(path, arrays: dict[str, np.ndarray], meta: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    blob = encode_checkpoint(arrays, meta)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(blob)
    tmp.replace(path)
    return path


def load_checkpoint(path) -> tuple[dict[str, np.ndarray], dict]:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    try:
        return decode_checkpoint(blob)
    except CheckpointError as exc:
        raise type(exc)(f"{path}: {exc}") from None
