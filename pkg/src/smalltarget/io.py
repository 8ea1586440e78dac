"""PGM frame sequences and the CSV/JSON files exchanged between stages."""

from __future__ import annotations

import csv
import json
import re
from io import StringIO
from pathlib import Path
from typing import Iterable

import numpy as np

from .core import BBox, DataError, Detection, Frame
from .evaluation import GroundTruth, GTRecord

DETECTION_FIELDS = ["frame", "x_min", "y_min", "x_max", "y_max", "cx", "cy", "score", "area"]
ORIGINAL_SCALE_FIELDS = ["cx_orig", "cy_orig"]
TRACK_FIELDS = ["frame", "track_id", "x_min", "y_min", "x_max", "y_max", "score"]
GT_FIELDS = ["frame", "cx", "cy", "x_min", "y_min", "x_max", "y_max"]
SIDECAR = "frames.json"

_PGM_TOKEN = re.compile(rb"(?:\s*(?:#[^\n]*\n)?)*\s*(\S+)")


# --- PGM -----------------------------------------------------------------


def read_pgm(path: str | Path) -> tuple[np.ndarray, int]:
    """Binary (P5) PGM as an integer array plus its maxval."""
    data = Path(path).read_bytes()
    pos, tokens = 0, []
    for _ in range(4):
        m = _PGM_TOKEN.match(data, pos)
        if not m:
            raise DataError(f"{path}: truncated PGM header")
        tokens.append(m.group(1))
        pos = m.end()
    if tokens[0] != b"P5":
        raise DataError(f"{path}: not a binary PGM (magic {tokens[0]!r})")
    try:
        w, h, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise DataError(f"{path}: bad PGM header") from None
    pos += 1  # single whitespace byte after maxval
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    n = w * h * dtype.itemsize
    if len(data) - pos < n:
        raise DataError(f"{path}: expected {n} bytes of pixel data")
    return np.frombuffer(data, dtype=dtype, count=w * h, offset=pos).reshape(h, w), maxval


def write_pgm(path: str | Path, raw: np.ndarray) -> None:
    raw = np.asarray(raw)
    h, w = raw.shape
    if raw.dtype == np.uint8:
        body, maxval = raw.tobytes(), 255
    else:
        body, maxval = raw.astype(">u2").tobytes(), 65535
    Path(path).write_bytes(b"P5\n%d %d\n%d\n" % (w, h, maxval) + body)


def write_frame(path: str | Path, frame: Frame) -> None:
    write_pgm(path, frame.to_raw())


def list_frames(video_dir: str | Path) -> tuple[list[Path], int | None]:
    """Frame paths in processing order and an optional depth override from the sidecar."""
    d = Path(video_dir)
    if not d.is_dir():
        raise DataError(f"{d}: no such directory")
    depth = None
    side = d / SIDECAR
    if side.exists():
        meta = json.loads(side.read_text())
        depth = meta.get("source_depth")
        if "order" in meta:
            return [d / name for name in meta["order"]], depth
    return sorted(d.glob("*.pgm")), depth


def load_frames(video_dir: str | Path) -> list[Frame]:
    paths, depth = list_frames(video_dir)
    if not paths:
        raise DataError(f"{video_dir}: no frames found")
    frames = []
    for i, p in enumerate(paths):
        try:
            raw, maxval = read_pgm(p)
        except (OSError, DataError) as exc:
            raise DataError(f"frame {i} ({p.name}): {exc}") from None
        bits = depth or (8 if maxval <= 255 else 16)
        frame = Frame.from_raw(raw, index=i, source_depth=bits)
        if frames and frame.pixels.shape != frames[0].pixels.shape:
            raise DataError(f"frame {i} ({p.name}): size {frame.pixels.shape} differs from {frames[0].pixels.shape}")
        frames.append(frame)
    return frames


# --- CSV -----------------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.4f}"


def _csv_text(header: list[str], rows: Iterable[list]) -> str:
    buf = StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def format_detections(dets: Iterable[Detection], factor: int = 1) -> str:
    """Detections CSV text; original-scale centroid columns are appended when upsampled."""
    from .upsample import to_original_coord

    def row(d: Detection) -> list:
        r = [d.frame_index, *(_fmt(v) for v in d.bbox.as_tuple()), _fmt(d.centroid[0]), _fmt(d.centroid[1])]
        r += [f"{d.score:.6f}", d.area]
        if factor != 1:
            r += [_fmt(to_original_coord(c, factor)) for c in d.centroid]
        return r

    header = DETECTION_FIELDS + (ORIGINAL_SCALE_FIELDS if factor != 1 else [])
    return _csv_text(header, (row(d) for d in dets))


def write_detections(path: str | Path, dets: Iterable[Detection], factor: int = 1) -> None:
    Path(path).write_text(format_detections(dets, factor))


def _rows(path: str | Path, required: list[str]):
    """Yield (line_number, dict) with float-parsed required fields."""
    path = Path(path)
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty file (header row required)")
        missing = [c for c in required if c not in header]
        if missing:
            raise DataError(f"{path}:1: missing columns {missing}")
        cols = {name: header.index(name) for name in required}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                yield lineno, {name: float(row[i]) for name, i in cols.items()}
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric field") from None


def _box(path, lineno, rec) -> BBox:
    try:
        return BBox(rec["x_min"], rec["y_min"], rec["x_max"], rec["y_max"])
    except DataError as exc:
        raise DataError(f"{path}:{lineno}: {exc}") from None


def read_detections(path: str | Path) -> list[Detection]:
    out = []
    last = -1
    for lineno, rec in _rows(path, DETECTION_FIELDS):
        frame = int(rec["frame"])
        if frame < last:
            raise DataError(f"{path}:{lineno}: frame {frame} after frame {last} (input must be sorted)")
        last = frame
        try:
            out.append(Detection(frame, _box(path, lineno, rec), (rec["cx"], rec["cy"]), rec["score"], int(rec["area"])))
        except DataError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from None
    return out


def format_tracks(rows: Iterable[tuple[int, int, BBox, float]]) -> str:
    return _csv_text(
        TRACK_FIELDS,
        ([frame, tid, *(_fmt(v) for v in b.as_tuple()), f"{score:.6f}"] for frame, tid, b, score in rows),
    )


def write_tracks(path: str | Path, rows: Iterable[tuple[int, int, BBox, float]]) -> None:
    Path(path).write_text(format_tracks(rows))


def read_tracks(path: str | Path) -> list[tuple[int, int, BBox, float]]:
    out = []
    for lineno, rec in _rows(path, TRACK_FIELDS):
        out.append((int(rec["frame"]), int(rec["track_id"]), _box(path, lineno, rec), rec["score"]))
    return out


def read_points(path: str | Path) -> dict[int, list[tuple[float, float]]]:
    """Per-frame centroids from either a detections or a tracks file."""
    with open(path, newline="") as f:
        header = next(csv.reader(f), [])
    by_frame: dict[int, list[tuple[float, float]]] = {}
    if "cx" in header:
        for d in read_detections(path):
            by_frame.setdefault(d.frame_index, []).append(d.centroid)
    else:
        for frame, _, b, _ in read_tracks(path):
            by_frame.setdefault(frame, []).append(b.center)
    return by_frame


def write_ground_truth(path: str | Path, gt: GroundTruth) -> None:
    rows = (
        [i, _fmt(gt[i].centroid[0]), _fmt(gt[i].centroid[1]), *(_fmt(v) for v in gt[i].bbox.as_tuple())]
        for i in sorted(gt)
    )
    Path(path).write_text(_csv_text(GT_FIELDS, rows))


def read_ground_truth(path: str | Path) -> GroundTruth:
    recs = []
    for lineno, rec in _rows(path, GT_FIELDS):
        recs.append(GTRecord(int(rec["frame"]), _box(path, lineno, rec), (rec["cx"], rec["cy"])))
    try:
        return GroundTruth.from_records(recs)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None


def write_json(path: str | Path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
