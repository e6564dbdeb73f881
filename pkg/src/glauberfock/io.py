"""Writers for the delimited, image and JSON outputs.

Every writer goes through :func:`atomic_write`, so a crashed run never leaves
a half-written file behind.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError

FLOAT_FMT = "%.8e"  # 9 significant digits


def atomic_write(path, data: bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _fmt(x) -> str:
    s = FLOAT_FMT % x
    # normalise signed zero so reruns stay byte-identical
    return s[1:] if s.startswith("-0.00000000e+00") else s


def format_rows(rows, header=None) -> str:
    lines = [",".join(header)] if header else []
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(path, rows, header=None) -> Path:
    return atomic_write(path, format_rows(rows, header).encode("ascii"))


def write_intensity_csv(path, imap) -> Path:
    """``z,site_0,...,site_{N-1}`` with one row per z sample."""
    n = imap.intensities.shape[1]
    header = ["z"] + [f"site_{i}" for i in range(n)]
    rows = np.column_stack([imap.z_samples, imap.intensities])
    return write_csv(path, rows, header)


def write_matrix_csv(path, matrix) -> Path:
    """Bare N x N block, no header."""
    return write_csv(path, np.asarray(matrix))


def read_csv(path, header=False) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1 if header else 0, ndmin=2)


def to_gray(values, scale="global", bits=8, gamma=1.0) -> np.ndarray:
    """Map a non-negative 2-D array onto integer gray levels.

    ``scale="global"`` divides by the overall peak, ``"row"`` by each row's
    own peak. Negative inputs (noisy estimates) are clipped to black.
    """
    if bits not in (8, 16):
        raise InvalidArgumentError(f"PGM depth must be 8 or 16 bits, got {bits}")
    if scale not in ("global", "row"):
        raise InvalidArgumentError(f"unknown PGM scaling {scale!r}")
    if not gamma > 0:
        raise InvalidArgumentError(f"gamma must be > 0, got {gamma!r}")
    x = np.clip(np.atleast_2d(np.asarray(values, dtype=float)), 0.0, None)
    peak = x.max(axis=1, keepdims=True) if scale == "row" else np.array([[x.max()]])
    with np.errstate(invalid="ignore", divide="ignore"):
        norm = np.where(peak > 0, x / peak, 0.0)
    if gamma != 1.0:
        norm = norm ** (1.0 / gamma)
    maxval = (1 << bits) - 1
    return np.rint(norm * maxval).astype(np.uint8 if bits == 8 else np.uint16)


def pgm_bytes(values, scale="global", bits=8, gamma=1.0) -> bytes:
    gray = to_gray(values, scale, bits, gamma)
    h, w = gray.shape
    maxval = (1 << bits) - 1
    body = gray.astype(">u2").tobytes() if bits == 16 else gray.tobytes()
    return f"P5\n{w} {h}\n{maxval}\n".encode("ascii") + body


def write_pgm(path, values, scale="global", bits=8, gamma=1.0) -> Path:
    return atomic_write(path, pgm_bytes(values, scale, bits, gamma))


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while data[pos : pos + 1].isspace():
            pos += 1
        start = pos
        while not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    if tokens[0] != b"P5":
        raise InvalidArgumentError(f"{path} is not a binary PGM")
    w, h, maxval = (int(t) for t in tokens[1:])
    raw = data[pos + 1 :]
    dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
    return np.frombuffer(raw, dtype=dtype, count=w * h).reshape(h, w)


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "value"):
        return obj.value
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def json_bytes(doc) -> bytes:
    return (json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n").encode("utf-8")


def write_json(path, doc) -> Path:
    return atomic_write(path, json_bytes(doc))
