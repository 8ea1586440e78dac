"""Centroid-distance scoring and precision / recall / F1."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable, Mapping, Sequence

from .core import BBox, centroid_distance
from .upsample import to_upsampled_coord

Point = tuple[float, float]


@dataclass(frozen=True)
class GTRecord:
    frame_index: int
    bbox: BBox
    centroid: Point


class GroundTruth(dict):
    """frame index -> :class:`GTRecord`; a missing frame has no target."""

    @classmethod
    def from_records(cls, records: Iterable[GTRecord]) -> "GroundTruth":
        gt = cls()
        for rec in records:
            if rec.frame_index in gt:
                raise ValueError(f"duplicate ground truth for frame {rec.frame_index}")
            gt[rec.frame_index] = rec
        return gt

    def rescaled(self, factor: int) -> "GroundTruth":
        """Ground truth expressed on a grid upsampled by ``factor``."""
        if factor == 1:
            return self
        f = lambda c: to_upsampled_coord(c, factor)  # noqa: E731
        return GroundTruth(
            {
                i: GTRecord(
                    i,
                    BBox(f(r.bbox.x_min), f(r.bbox.y_min), f(r.bbox.x_max), f(r.bbox.y_max)),
                    (f(r.centroid[0]), f(r.centroid[1])),
                )
                for i, r in self.items()
            }
        )


@dataclass(frozen=True)
class MetricsReport:
    tp: int
    fp: int
    missed: int
    precision: float
    recall: float
    f1: float

    def to_dict(self) -> dict:
        return asdict(self)


def _point(d) -> Point:
    if hasattr(d, "centroid"):
        return d.centroid
    if hasattr(d, "bbox"):
        return d.bbox.center
    if isinstance(d, BBox):
        return d.center
    return (float(d[0]), float(d[1]))


def match_frame(dets: Sequence, gt: GTRecord | None, tp_distance: float) -> tuple[int, int, int]:
    """(tp, fp, missed) for one frame.

    At most one detection, the one nearest the target centroid within
    ``tp_distance``, counts as a hit; every other detection is a false positive.
    """
    if gt is None:
        return 0, len(dets), 0
    dists = [centroid_distance(_point(d), gt.centroid) for d in dets]
    if dists and min(dists) <= tp_distance:
        return 1, len(dets) - 1, 0
    return 0, len(dets), 1


def f1_score(precision: float, recall: float) -> float:
    return 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0


def compute_metrics(tp: int, fp: int, missed: int) -> MetricsReport:
    if min(tp, fp, missed) < 0:
        raise ValueError("counts must be non-negative")
    p = tp / (tp + fp) if tp + fp > 0 else 0.0
    r = tp / (tp + missed) if tp + missed > 0 else 0.0
    return MetricsReport(tp, fp, missed, p, r, f1_score(p, r))


def evaluate(dets_by_frame: Mapping[int, Sequence], gt: GroundTruth, tp_distance: float) -> MetricsReport:
    """Score every frame that has ground truth or detections."""
    tp = fp = missed = 0
    for i in sorted(set(gt) | set(dets_by_frame)):
        a, b, c = match_frame(dets_by_frame.get(i, ()), gt.get(i), tp_distance)
        tp, fp, missed = tp + a, fp + b, missed + c
    return compute_metrics(tp, fp, missed)
