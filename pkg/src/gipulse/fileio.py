"""On-disk formats: TimeSeries CSV (+ JSON sidecar) and the GIFR image-stack container."""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .signal_core import TimeSeries

GIFR_MAGIC = "GIFR"
GIFR_VERSION = 1


def _fmt(v: float) -> str:
    return f"{v:.9g}"


def sidecar_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".json")


def write_timeseries(path, x: TimeSeries, sidecar: bool = True) -> Path:
    """Write ``t,value`` CSV (9 significant digits) and, optionally, its ``.json`` sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    buf.write("t,value\n")
    for t, v in zip(x.t, x.samples):
        buf.write(f"{_fmt(t)},{_fmt(v)}\n")
    path.write_text(buf.getvalue(), encoding="utf-8")
    if sidecar:
        write_json(sidecar_path(path), {"fs_hz": x.fs, "n": len(x)})
    return path


def read_timeseries(path) -> TimeSeries:
    """Read a TimeSeries CSV; fs comes from the sidecar if present, else from median dt."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["t", "value"]:
            raise InvalidInputError(f"{path}: expected header 't,value'")
        rows = [(float(r[0]), float(r[1])) for r in reader if r]
    if not rows:
        raise InvalidInputError(f"{path}: no samples")
    t, v = np.array(rows).T
    side = sidecar_path(path)
    if side.exists():
        meta = json.loads(side.read_text(encoding="utf-8"))
        fs = float(meta["fs_hz"])
        if "n" in meta and int(meta["n"]) != v.size:
            raise InvalidInputError(f"{path}: sidecar says n={meta['n']}, file has {v.size}")
    else:
        if v.size < 2:
            raise InvalidInputError(f"{path}: cannot infer fs from a single sample")
        fs = 1.0 / float(np.median(np.diff(t)))
    return TimeSeries(v, fs)


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_gifr(path, stack: np.ndarray, fs_hz: float) -> Path:
    """Write an ``(F, H, W)`` stack as GIFR v1 (JSON header line + f32le payload)."""
    stack = np.asarray(stack)
    if stack.ndim == 2:
        stack = stack[None]
    if stack.ndim != 3:
        raise InvalidInputError("GIFR payload must be 2-D or 3-D")
    f, h, w = stack.shape
    header = {
        "magic": GIFR_MAGIC,
        "version": GIFR_VERSION,
        "width": w,
        "height": h,
        "frames": f,
        "fs_hz": fs_hz,
        "dtype": "f32le",
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as fh:
        fh.write(json.dumps(header, separators=(",", ":")).encode("utf-8") + b"\n")
        fh.write(np.ascontiguousarray(stack, dtype="<f4").tobytes())
    return path


def read_gifr(path) -> tuple[np.ndarray, float]:
    """Return ``(stack, fs_hz)`` with ``stack`` shaped ``(F, H, W)`` as float64."""
    raw = Path(path).read_bytes()
    nl = raw.find(b"\n")
    if nl < 0:
        raise InvalidInputError(f"{path}: missing GIFR header line")
    try:
        header = json.loads(raw[:nl].decode("utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: bad GIFR header: {exc}") from None
    if header.get("magic") != GIFR_MAGIC or header.get("version") != GIFR_VERSION:
        raise InvalidInputError(f"{path}: not a GIFR v1 file")
    if header.get("dtype") != "f32le":
        raise InvalidInputError(f"{path}: unsupported dtype {header.get('dtype')!r}")
    f, h, w = int(header["frames"]), int(header["height"]), int(header["width"])
    payload = raw[nl + 1:]
    if len(payload) != 4 * f * h * w:
        raise InvalidInputError(
            f"{path}: payload holds {len(payload)} bytes, header implies {4 * f * h * w}"
        )
    stack = np.frombuffer(payload, dtype="<f4").astype(np.float64).reshape(f, h, w)
    return stack, float(header["fs_hz"])
