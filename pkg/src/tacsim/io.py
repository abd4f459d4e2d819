"""File formats: binary PPM images, raw depth images, pull-trace CSV."""

from __future__ import annotations

import csv
import hashlib
import io
import struct
from pathlib import Path

import numpy as np

from .pullsim import PullTrace


def encode_ppm(rgb: np.ndarray) -> bytes:
    rgb = np.asarray(rgb)
    if rgb.dtype != np.uint8 or rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError("PPM needs an (H, W, 3) uint8 array")
    h, w, _ = rgb.shape
    return b"P6\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(rgb).tobytes()


def _header_tokens(data: bytes, count: int):
    tokens = []
    pos = 0
    while len(tokens) < count:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise ValueError("truncated PPM header")
        tokens.append(data[start:pos])
    # exactly one whitespace byte separates maxval from the raster
    return tokens, pos + 1


def decode_ppm(data: bytes) -> np.ndarray:
    tokens, offset = _header_tokens(data, 4)
    if tokens[0] != b"P6":
        raise ValueError(f"not a binary PPM (magic {tokens[0]!r})")
    w, h, maxval = (int(t) for t in tokens[1:])
    if maxval != 255:
        raise ValueError("only 8-bit PPM (maxval 255) is supported")
    size = w * h * 3
    raster = data[offset:offset + size]
    if len(raster) != size:
        raise ValueError("truncated PPM raster")
    return np.frombuffer(raster, dtype=np.uint8).reshape(h, w, 3).copy()


def write_ppm(path, rgb) -> str:
    """Write the image and return the SHA-256 of the file bytes."""
    data = encode_ppm(rgb)
    Path(path).write_bytes(data)
    return hashlib.sha256(data).hexdigest()


def read_ppm(path) -> np.ndarray:
    return decode_ppm(Path(path).read_bytes())


def encode_depth(depth: np.ndarray) -> bytes:
    """8-byte header (width, height as little-endian int32) then float32 LE rows."""
    depth = np.asarray(depth)
    h, w = depth.shape
    return struct.pack("<ii", w, h) + depth.astype("<f4").tobytes()


def decode_depth(data: bytes) -> np.ndarray:
    w, h = struct.unpack_from("<ii", data)
    body = np.frombuffer(data, dtype="<f4", offset=8)
    if body.size != w * h:
        raise ValueError("depth payload size does not match header")
    return body.reshape(h, w).astype(np.float32)


def write_depth(path, depth):
    Path(path).write_bytes(encode_depth(depth))


def read_depth(path) -> np.ndarray:
    return decode_depth(Path(path).read_bytes())


TRACE_HEADER = ("t", "f_des", "f_meas", "z")


def trace_to_csv(tr: PullTrace, decimation: int = 1) -> str:
    """CSV with header ``t,f_des,f_meas,z``, six significant digits."""
    if decimation < 1:
        raise ValueError("decimation must be >= 1")
    buf = io.StringIO()
    buf.write(",".join(TRACE_HEADER) + "\n")
    for i in range(0, len(tr), decimation):
        buf.write(f"{tr.t[i]:.6g},{tr.f_des[i]:.6g},{tr.f_meas[i]:.6g},{tr.z[i]:.6g}\n")
    return buf.getvalue()


def write_trace(path, tr: PullTrace, decimation: int = 1) -> str:
    data = trace_to_csv(tr, decimation).encode()
    Path(path).write_bytes(data)
    return hashlib.sha256(data).hexdigest()


def read_trace(path, terminated_reason: str = "displacement") -> PullTrace:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != TRACE_HEADER:
            raise ValueError(f"unexpected trace header {header!r}")
        rows = np.array([[float(v) for v in row] for row in reader if row])
    rows = rows.reshape(-1, 4)
    return PullTrace(rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3], terminated_reason)


def read_force_points(path) -> np.ndarray:
    """Read ``(grip_force, f_pull_max)`` pairs from a two-column CSV.

    A header row is skipped when its first cell is not numeric.
    """
    out = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip():
                continue
            try:
                out.append((float(row[0]), float(row[1])))
            except ValueError:
                if out:
                    raise
    if not out:
        raise ValueError(f"no data rows in {path}")
    return np.array(out)


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
