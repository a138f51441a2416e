"""File formats: binary RF captures, CSV tables, graymaps and config files."""
from __future__ import annotations

import csv
import json
import struct
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .pam import RfCapture

RF_MAGIC = b"ASRF"
RF_VERSION = 1
_HEADER = struct.Struct("<4sIIIddd")


class RfFormatError(OSError):
    """Unreadable, truncated or foreign RF file."""


def write_rf(path, rf: RfCapture, sidecar: bool = True) -> Path:
    """Little-endian header then row-major float64 samples ``[sensor, time]``.

    With ``sidecar`` the capture metadata goes to ``<path>.json``.
    """
    path = Path(path)
    head = _HEADER.pack(RF_MAGIC, RF_VERSION, rf.sensor_count, rf.sample_count,
                        rf.dx, rf.fs, rf.aperture_origin)
    with open(path, "wb") as fh:
        fh.write(head)
        fh.write(np.ascontiguousarray(rf.samples, dtype="<f8").tobytes())
    if sidecar:
        sidecar_path(path).write_text(json.dumps(_jsonable(rf.meta), indent=2, sort_keys=True) + "\n")
    return path


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def read_rf(path) -> RfCapture:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise RfFormatError(f"{path}: {exc.strerror or exc}") from exc
    if len(raw) < _HEADER.size:
        raise RfFormatError(f"{path}: file shorter than the RF header")
    magic, version, ns, nt, dx, fs, origin = _HEADER.unpack_from(raw)
    if magic != RF_MAGIC:
        raise RfFormatError(f"{path}: not an RF file (bad magic {magic!r})")
    if version != RF_VERSION:
        raise RfFormatError(f"{path}: unsupported RF version {version}")
    expected = _HEADER.size + 8 * ns * nt
    if len(raw) != expected:
        raise RfFormatError(f"{path}: expected {expected} bytes for {ns}x{nt} samples, found {len(raw)}")
    samples = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(ns, nt).astype(float)
    meta = {}
    side = sidecar_path(path)
    if side.exists():
        try:
            meta = json.loads(side.read_text())
        except ValueError as exc:
            raise RfFormatError(f"{side}: corrupt metadata ({exc})") from exc
    try:
        return RfCapture(samples, dx, fs, origin, meta=meta)
    except ValueError as exc:
        raise RfFormatError(f"{path}: {exc}") from exc


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def write_csv(path, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([format_value(v) for v in row])
    return path


def read_csv(path) -> list:
    """Rows as dicts; numeric-looking fields become floats."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        for k, v in row.items():
            try:
                row[k] = float(v)
            except (TypeError, ValueError):
                pass
    return rows


def write_pgm(path, image: np.ndarray) -> Path:
    """8-bit binary graymap scaled so the image maximum maps to 255.

    ``image`` is ``[row, column]``; negative values clip to black.
    """
    img = np.asarray(image, dtype=float)
    if img.ndim != 2:
        raise ValueError("graymap needs a 2-D array")
    top = float(np.max(img)) if img.size else 0.0
    scaled = np.zeros(img.shape) if top <= 0 else np.clip(img / top, 0.0, 1.0) * 255.0
    data = np.rint(scaled).astype(np.uint8)
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii"))
        fh.write(data.tobytes())
    return path


def read_pgm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    parts = raw.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError(f"{path}: not a binary graymap")
    w, h, _ = int(parts[1]), int(parts[2]), int(parts[3])
    return np.frombuffer(parts[4][: w * h], dtype=np.uint8).reshape(h, w)


def load_config_file(path) -> dict:
    """Parse a YAML or JSON mapping (chosen by extension; YAML otherwise)."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        data = json.loads(text)
    else:
        import yaml
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ValueError(f"{path}: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ValueError(f"{path}: top level must be a mapping")
    return data


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def dump_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path
