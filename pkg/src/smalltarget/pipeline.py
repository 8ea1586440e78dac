"""End-to-end workflows: detect, track, evaluate, benchmark, render."""

from __future__ import annotations

import json
import logging
import os
import time
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from . import io
from .cc import dilate, label_components, rule_filter, select_targets
from .core import BBox, DataError, Detection, Frame, PipelineConfig, SortParams
from .evaluation import GroundTruth, MetricsReport, evaluate
from .lig import LigParams, adaptive_threshold, binarize, compute_ig_map
from .sort import SortTracker
from .synth import Scenario, generate_sequence
from .upsample import bicubic_upsample

log = logging.getLogger(__name__)

WORKERS_ENV = "SMALLTARGET_WORKERS"
STAGES = ("upsample", "lig", "threshold", "cc")


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def lig_params(config: PipelineConfig) -> LigParams:
    return LigParams(
        patch_size=config.effective_patch_size,
        center_size=config.effective_center_size,
        sector_count=config.sector_count,
        top_fraction=config.top_fraction,
    )


def detect_frame(frame: Frame, config: PipelineConfig, timings: dict | None = None) -> list[Detection]:
    """Upsample (optional), LIG, threshold, dilate, label, filter, select."""
    t = time.perf_counter()
    marks = {}
    if config.upsample_factor != 1:
        frame = bicubic_upsample(frame, config.upsample_factor)
    marks["upsample"] = time.perf_counter()
    ig = compute_ig_map(frame, lig_params(config))
    marks["lig"] = time.perf_counter()
    mask = binarize(ig, adaptive_threshold(ig, config.top_fraction))
    marks["threshold"] = time.perf_counter()
    comps = label_components(dilate(mask, config.effective_dilation_side), frame.pixels)
    comps = rule_filter(comps, *config.area_bounds)
    dets = select_targets(comps, config.top_n_targets, frame.index)
    marks["cc"] = time.perf_counter()
    if timings is not None:
        for stage in STAGES:
            timings[stage] = marks[stage] - t
            t = marks[stage]
    return dets


@dataclass
class DetectResult:
    detections: list[list[Detection]]
    stage_seconds: dict[str, float]
    wall_seconds: float
    workers: int

    def flat(self) -> list[Detection]:
        return [d for frame_dets in self.detections for d in frame_dets]


def detect_frames(frames: Sequence[Frame], config: PipelineConfig, workers: int = 1) -> DetectResult:
    """Run detection on every frame; output order follows the input order.

    Frames are spread over a thread pool. Stage timings are summed over
    frames and divided by the worker count (mean busy time per worker).
    """
    workers = max(1, workers)

    def one(frame):
        tm: dict[str, float] = {}
        return detect_frame(frame, config, tm), tm

    start = time.perf_counter()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, frames))
    else:
        results = [one(f) for f in frames]
    wall = time.perf_counter() - start
    stage = defaultdict(float)
    for _, tm in results:
        for k, v in tm.items():
            stage[k] += v / workers
    return DetectResult([r for r, _ in results], dict(stage), wall, workers)


@dataclass
class RunManifest:
    config: dict
    input_path: str
    timings_ms: dict[str, float]
    wall_ms: float
    workers: int
    detections_per_frame: list[int]
    tool_version: str = __version__
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "config": self.config,
            "input_path": self.input_path,
            "timings_ms": self.timings_ms,
            "wall_ms": self.wall_ms,
            "workers": self.workers,
            "detections_per_frame": self.detections_per_frame,
            "tool_version": self.tool_version,
        }
        d.update(self.extra)
        return d


def manifest_path(out_csv: str | Path) -> Path:
    p = Path(out_csv)
    return p.with_name(p.stem + ".manifest.json")


def detect(video_dir: str | Path, config: PipelineConfig, out_csv: str | Path, workers: int | None = None) -> RunManifest:
    """Detect targets in a PGM sequence; writes the detections CSV and a manifest next to it."""
    frames = io.load_frames(video_dir)
    workers = workers or default_workers()
    res = detect_frames(frames, config, workers)
    io.write_detections(out_csv, res.flat(), config.upsample_factor)
    manifest = RunManifest(
        config=config.to_dict(),
        input_path=str(video_dir),
        timings_ms={k: v * 1e3 for k, v in res.stage_seconds.items()},
        wall_ms=res.wall_seconds * 1e3,
        workers=workers,
        detections_per_frame=[len(d) for d in res.detections],
        extra={"frame_count": len(frames)},
    )
    io.write_json(manifest_path(out_csv), manifest.to_dict())
    return manifest


def track_detections(
    detections: Sequence[Detection], params: SortParams | None = None, frame_count: int | None = None
) -> list[tuple[int, int, BBox, float]]:
    """Feed detections frame by frame through SORT; frames without detections are stepped too."""
    by_frame: dict[int, list[Detection]] = defaultdict(list)
    last = -1
    for d in detections:
        if d.frame_index < last:
            raise DataError(f"detections not sorted by frame ({d.frame_index} after {last})")
        last = d.frame_index
        by_frame[d.frame_index].append(d)
    n = frame_count if frame_count is not None else last + 1
    tracker = SortTracker(params)
    rows = []
    for i in range(n):
        for rep in tracker.step(i, by_frame.get(i, [])):
            rows.append((i, rep.track_id, rep.bbox, rep.score))
    return rows


def track(det_csv: str | Path, params: SortParams | None, out_csv: str | Path, frame_count: int | None = None):
    dets = io.read_detections(det_csv)
    if frame_count is None:
        mp = manifest_path(det_csv)
        if mp.exists():
            frame_count = json.loads(mp.read_text()).get("frame_count")
    rows = track_detections(dets, params, frame_count)
    io.write_tracks(out_csv, rows)
    return rows


def evaluate_points(points_by_frame, gt: GroundTruth, tp_distance: float, upsample_factor: int = 1) -> MetricsReport:
    """Score processed-scale points against original-scale ground truth."""
    return evaluate(points_by_frame, gt.rescaled(upsample_factor), tp_distance * upsample_factor)


def eval_files(
    result_csv: str | Path,
    gt_csv: str | Path,
    tp_distance: float = 10.0,
    upsample_factor: int = 1,
    out_json: str | Path | None = None,
) -> MetricsReport:
    report = evaluate_points(io.read_points(result_csv), io.read_ground_truth(gt_csv), tp_distance, upsample_factor)
    if out_json is not None:
        io.write_json(out_json, report.to_dict())
    return report


def bench(frames: Sequence[Frame] | str | Path, config: PipelineConfig, worker_counts: Sequence[int]) -> dict:
    """Time detection at several worker counts and check the outputs agree."""
    if len(worker_counts) < 2:
        raise ValueError("bench needs at least two worker counts")
    if isinstance(frames, (str, Path)):
        frames = io.load_frames(frames)
    runs = []
    reference = None
    for w in worker_counts:
        res = detect_frames(frames, config, w)
        text = io.format_detections(res.flat(), config.upsample_factor)
        if reference is None:
            reference = text
        runs.append(
            {
                "workers": w,
                "wall_s": res.wall_seconds,
                "lig_ms_per_frame": res.stage_seconds.get("lig", 0.0) * w * 1e3 / len(frames),
                "identical": text == reference,
            }
        )
    base = next((r["wall_s"] for r in runs if r["workers"] == 1), runs[0]["wall_s"])
    for r in runs:
        r["speedup"] = base / r["wall_s"] if r["wall_s"] > 0 else float("inf")
    return {
        "frames": len(frames),
        "frame_shape": list(frames[0].pixels.shape),
        "cpu_count": os.cpu_count(),
        "runs": runs,
        "outputs_identical": all(r["identical"] for r in runs),
    }


def synth(scenario: Scenario | str | Path, out_dir: str | Path):
    """Write PGM frames, ground truth, speck list and the scenario echo."""
    if not isinstance(scenario, Scenario):
        scenario = Scenario.from_dict(json.loads(Path(scenario).read_text()))
    seq = generate_sequence(scenario)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for f in seq.frames:
        io.write_frame(out / f"frame_{f.index:05d}.pgm", f)
    io.write_ground_truth(out / "gt.csv", seq.gt)
    with open(out / "specks.csv", "w") as fh:
        fh.write("frame,cx,cy\n")
        for t, u, v in seq.specks:
            fh.write(f"{t},{u:.4f},{v:.4f}\n")
    io.write_json(out / "scenario.json", {"scenario": scenario.to_dict(), **seq.metadata})
    return seq


def draw_box(raw: np.ndarray, box: BBox, value: int, thickness: int = 3) -> None:
    """Burn a box outline (drawn inward from its edges) into ``raw``; clipped to the frame."""
    h, w = raw.shape
    x0, y0 = int(round(box.x_min)), int(round(box.y_min))
    x1, y1 = int(round(box.x_max)), int(round(box.y_max))
    if x1 < 0 or y1 < 0 or x0 >= w or y0 >= h:
        return
    t = thickness
    xs0, xs1 = max(x0, 0), min(x1, w - 1)
    ys0, ys1 = max(y0, 0), min(y1, h - 1)
    for ya, yb in ((y0, y0 + t - 1), (y1 - t + 1, y1)):
        ya, yb = max(ya, ys0), min(yb, ys1)
        if ya <= yb:
            raw[ya : yb + 1, xs0 : xs1 + 1] = value
    for xa, xb in ((x0, x0 + t - 1), (x1 - t + 1, x1)):
        xa, xb = max(xa, xs0), min(xb, xs1)
        if xa <= xb:
            raw[ys0 : ys1 + 1, xa : xb + 1] = value


def render(video_dir: str | Path, tracks_csv: str | Path, out_dir: str | Path) -> int:
    """Copy frames with track boxes burned in; returns the number of boxes drawn."""
    paths, _ = io.list_frames(video_dir)
    rows = io.read_tracks(tracks_csv)
    by_frame = defaultdict(list)
    for frame, _, b, _ in rows:
        if not 0 <= frame < len(paths):
            raise DataError(f"track row references missing frame {frame}")
        by_frame[frame].append(b)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    drawn = 0
    for i, p in enumerate(paths):
        raw, maxval = io.read_pgm(p)
        raw = raw.astype(np.uint8 if maxval <= 255 else np.uint16)
        top = 255 if maxval <= 255 else 65535
        for b in by_frame.get(i, ()):
            draw_box(raw, b, top)
            drawn += 1
        io.write_pgm(out / p.name, raw)
    return drawn


def upsample_dir(video_dir: str | Path, factor: int, out_dir: str | Path) -> int:
    frames = io.load_frames(video_dir)
    paths, _ = io.list_frames(video_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for p, f in zip(paths, frames):
        io.write_frame(out / p.name, bicubic_upsample(f, factor))
    return len(frames)
