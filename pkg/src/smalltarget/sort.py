"""SORT: constant-velocity Kalman tracking of boxes with IoU assignment.

The state is ``[u, v, s, r, u_dot, v_dot, s_dot]``: box center, area, aspect
ratio (width / height) and the rates of the first three. Aspect ratio has no
rate term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import BBox, DataError, Detection, SortParams, bbox_iou

F = np.eye(7)
F[0, 4] = F[1, 5] = F[2, 6] = 1.0
H = np.eye(4, 7)


def bbox_to_measurement(b: BBox) -> np.ndarray:
    """(u, v, s, r) of a box; a 1-pixel box has s = r = 1."""
    w, h = b.width, b.height
    u, v = b.center
    return np.array([u, v, w * h, w / h])


def measurement_to_bbox(u: float, v: float, s: float, r: float) -> BBox:
    """Inverse of :func:`bbox_to_measurement`.

    Extents narrower than one pixel collapse onto the center.
    """
    if not (s > 0 and r > 0):
        raise ValueError(f"scale and aspect ratio must be positive, got s={s}, r={r}")
    w = math.sqrt(s * r)
    h = s / w
    hw, hh = max(w - 1.0, 0.0) / 2, max(h - 1.0, 0.0) / 2
    return BBox(u - hw, v - hh, u + hw, v + hh)


@dataclass
class TrackState:
    mean: np.ndarray
    covariance: np.ndarray

    @property
    def u(self) -> float:
        return float(self.mean[0])

    @property
    def v(self) -> float:
        return float(self.mean[1])

    @property
    def s(self) -> float:
        return float(self.mean[2])

    @property
    def r(self) -> float:
        return float(self.mean[3])

    def bbox(self) -> BBox:
        return measurement_to_bbox(*self.mean[:4])


@dataclass
class Track:
    id: int
    state: TrackState
    hits: int = 1
    age: int = 0
    time_since_update: int = 0
    birth_ordinal: int = 0
    score: float = 0.0
    params: SortParams = field(default_factory=SortParams, repr=False)

    @classmethod
    def from_detection(cls, det: Detection, track_id: int, params: SortParams, birth_ordinal: int = 0) -> "Track":
        mean = np.zeros(7)
        mean[:4] = bbox_to_measurement(det.bbox)
        cov = np.diag(params.initial_covariance)
        return cls(track_id, TrackState(mean, cov), birth_ordinal=birth_ordinal, score=det.score, params=params)

    @property
    def confirmed(self) -> bool:
        return self.hits >= self.params.min_hits


def predict(track: Track) -> BBox:
    """Advance one frame under constant velocity and return the predicted box."""
    x, P = track.state.mean, track.state.covariance
    if x[2] + x[6] <= 0:
        x[6] = 0.0
    x[:] = F @ x
    P = F @ P @ F.T + np.diag(track.params.process_noise)
    track.state.covariance = (P + P.T) / 2
    track.age += 1
    track.time_since_update += 1
    return track.state.bbox()


def update(track: Track, det: Detection) -> Track:
    """Kalman correction with the detection's (u, v, s, r); Joseph-form covariance."""
    x, P = track.state.mean, track.state.covariance
    R = np.diag(track.params.measurement_noise)
    innovation = bbox_to_measurement(det.bbox) - H @ x
    S = H @ P @ H.T + R
    K = np.linalg.solve(S, H @ P).T
    x += K @ innovation
    A = np.eye(7) - K @ H
    P = A @ P @ A.T + K @ R @ K.T
    track.state.covariance = (P + P.T) / 2
    # Posterior s and r are convex blends of positive values; guard against round-off only.
    x[2] = max(x[2], 1e-6)
    x[3] = max(x[3], 1e-6)
    track.hits += 1
    track.time_since_update = 0
    track.score = det.score
    return track


def iou_matrix(boxes_a: list[BBox], boxes_b: list[BBox]) -> np.ndarray:
    m = np.zeros((len(boxes_a), len(boxes_b)))
    for i, a in enumerate(boxes_a):
        for j, b in enumerate(boxes_b):
            m[i, j] = bbox_iou(a, b)
    return m


def associate(predicted: list[BBox], detections: list[Detection], iou_min: float = 0.3):
    """Match predicted track boxes to detections.

    Pairs below ``iou_min`` are zeroed before solving, so the assignment
    maximizes the total IoU of the matches actually kept.

    Returns ``(matches, unmatched_tracks, unmatched_detections)`` where
    ``matches`` is a list of ``(track_idx, det_idx)``.
    """
    if not predicted or not detections:
        return [], list(range(len(predicted))), list(range(len(detections)))
    iou = iou_matrix(predicted, [d.bbox for d in detections])
    gated = np.where(iou >= iou_min, iou, 0.0)
    rows, cols = linear_sum_assignment(gated, maximize=True)
    matches = [(int(i), int(j)) for i, j in zip(rows, cols) if iou[i, j] >= iou_min]
    mt = {i for i, _ in matches}
    md = {j for _, j in matches}
    return (
        matches,
        [i for i in range(len(predicted)) if i not in mt],
        [j for j in range(len(detections)) if j not in md],
    )


class TrackReport(NamedTuple):
    track_id: int
    bbox: BBox
    score: float


class SortTracker:
    """Online tracker over one video; call :meth:`step` once per frame, in order."""

    def __init__(self, params: SortParams | None = None):
        self.params = params or SortParams()
        self.tracks: list[Track] = []
        self.frame_count = 0
        self.last_index: int | None = None
        self._next_id = 1

    def step(self, frame_index: int, detections: list[Detection]) -> list[TrackReport]:
        if self.last_index is not None and frame_index <= self.last_index:
            raise DataError(f"frame {frame_index} arrived after frame {self.last_index}")
        self.last_index = frame_index
        ordinal = self.frame_count
        self.frame_count += 1
        p = self.params

        predicted = []
        alive = []
        for t in self.tracks:
            box = predict(t)
            if np.all(np.isfinite(t.state.mean)):
                predicted.append(box)
                alive.append(t)
        self.tracks = alive

        matches, _, unmatched = associate(predicted, detections, p.iou_min)
        for ti, di in matches:
            update(self.tracks[ti], detections[di])
        for di in unmatched:
            self.tracks.append(Track.from_detection(detections[di], self._next_id, p, birth_ordinal=ordinal))
            self._next_id += 1

        reports = []
        for t in self.tracks:
            if t.time_since_update > 0:
                continue
            # Warm-up: tracks alive and matched on every frame since the video started.
            warm = p.warmup and ordinal < p.min_hits and t.birth_ordinal == 0 and t.hits == t.age + 1
            if t.hits >= p.min_hits or warm:
                reports.append(TrackReport(t.id, t.state.bbox(), t.score))
        self.tracks = [t for t in self.tracks if t.time_since_update <= p.max_age]
        return sorted(reports, key=lambda rep: rep.track_id)
