"""Shared domain types and geometry used by every pipeline stage."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any

import numpy as np


class DataError(ValueError):
    """Input data is malformed or violates a documented invariant."""


@dataclass(frozen=True)
class Frame:
    """A single grayscale frame with intensities normalized to [0, 1]."""

    pixels: np.ndarray
    index: int = 0
    source_depth: int = 16

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise DataError(f"frame {self.index}: pixels must be a non-empty 2-D array")
        if not np.all(np.isfinite(px)) or px.min() < 0.0 or px.max() > 1.0:
            raise DataError(f"frame {self.index}: intensities must lie in [0, 1]")
        if self.source_depth not in (8, 16):
            raise DataError(f"frame {self.index}: source_depth must be 8 or 16")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @classmethod
    def from_raw(cls, raw: np.ndarray, index: int = 0, source_depth: int = 16) -> "Frame":
        """Normalize integer counts by 2**depth - 1."""
        scale = float(2**source_depth - 1)
        return cls(np.asarray(raw, dtype=np.float64) / scale, index, source_depth)

    def to_raw(self) -> np.ndarray:
        scale = 2**self.source_depth - 1
        dtype = np.uint8 if self.source_depth == 8 else np.uint16
        return np.rint(self.pixels * scale).astype(dtype)


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box with inclusive extents (a 1-pixel box has x_min == x_max)."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min <= self.x_max and self.y_min <= self.y_max):
            raise DataError(f"invalid box {self.as_tuple()}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min + 1

    @property
    def height(self) -> float:
        return self.y_max - self.y_min + 1

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)

    def contains(self, u: float, v: float) -> bool:
        return self.x_min <= u <= self.x_max and self.y_min <= v <= self.y_max


@dataclass(frozen=True)
class Detection:
    frame_index: int
    bbox: BBox
    centroid: tuple[float, float]
    score: float
    area: int

    def __post_init__(self):
        if self.area < 1:
            raise DataError("detection area must be >= 1")
        if not self.bbox.contains(*self.centroid):
            raise DataError(f"centroid {self.centroid} outside {self.bbox.as_tuple()}")


def bbox_iou(a: BBox, b: BBox) -> float:
    """Intersection over union using the inclusive-extent area convention."""
    iw = min(a.x_max, b.x_max) - max(a.x_min, b.x_min) + 1
    ih = min(a.y_max, b.y_max) - max(a.y_min, b.y_min) + 1
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (a.area + b.area - inter)


def centroid_distance(p: tuple[float, float], q: tuple[float, float]) -> float:
    return math.hypot(p[0] - q[0], p[1] - q[1])


@dataclass(frozen=True)
class SortParams:
    """Tracker gates and Kalman noise scales.

    Noise values are diagonal entries over (u, v, s, r) for the measurement and
    (u, v, s, r, u_dot, v_dot, s_dot) for the state.
    """

    iou_min: float = 0.3
    max_age: int = 1
    min_hits: int = 3
    measurement_noise: tuple[float, ...] = (1.0, 1.0, 10.0, 0.01)
    initial_covariance: tuple[float, ...] = (10.0, 10.0, 10.0, 10.0, 1e4, 1e4, 1e4)
    process_noise: tuple[float, ...] = (1.0, 1.0, 1.0, 0.01, 0.01, 0.01, 1e-4)
    warmup: bool = True

    def __post_init__(self):
        if not 0.0 < self.iou_min < 1.0:
            raise ValueError("iou_min must lie in (0, 1)")
        if self.max_age < 1 or self.min_hits < 1:
            raise ValueError("max_age and min_hits must be >= 1")
        for name, n in (("measurement_noise", 4), ("initial_covariance", 7), ("process_noise", 7)):
            vals = tuple(float(x) for x in getattr(self, name))
            if len(vals) != n or min(vals) <= 0:
                raise ValueError(f"{name} needs {n} positive values")
            object.__setattr__(self, name, vals)


# Patch size at each upsample factor; 4x is extrapolated, not measured.
PATCH_BY_FACTOR = {1: 7, 2: 19, 4: 39}


def default_center_size(patch_size: int) -> int:
    """3 for a 7-pixel patch, 7 for 19; always odd and smaller than the patch."""
    return (patch_size // 3) | 1


@dataclass(frozen=True)
class PipelineConfig:
    """Every knob of the detect/track pipeline.

    ``patch_size``, ``center_size`` and ``dilation_side`` left as ``None`` are
    resolved from ``upsample_factor``. ``tp_distance`` is given at original
    scale and multiplied by the factor when scoring.
    """

    patch_size: int | None = None
    center_size: int | None = None
    sector_count: int = 8
    top_fraction: float = 1e-4
    dilation_side: int | None = None
    area_min_exclusive: int = 1
    area_max_exclusive: int = 100
    scale_area_rule: bool = True
    upsample_factor: int = 1
    top_n_targets: int = 1
    tp_distance: float = 10.0
    sort: SortParams = field(default_factory=SortParams)

    def __post_init__(self):
        if self.upsample_factor not in (1, 2, 4):
            raise ValueError("upsample_factor must be 1, 2 or 4")
        k = self.effective_patch_size
        c = self.effective_center_size
        if k < 3 or k % 2 == 0:
            raise ValueError("patch_size must be odd and >= 3")
        if c < 1 or c % 2 == 0 or c >= k:
            raise ValueError("center_size must be odd and smaller than patch_size")
        if self.sector_count < 4:
            raise ValueError("sector_count must be >= 4")
        if not 0.0 < self.top_fraction <= 1.0:
            raise ValueError("top_fraction must lie in (0, 1]")
        if self.effective_dilation_side < 1:
            raise ValueError("dilation_side must be >= 1")
        if self.area_min_exclusive >= self.area_max_exclusive:
            raise ValueError("area_min_exclusive must be < area_max_exclusive")
        if self.top_n_targets < 1:
            raise ValueError("top_n_targets must be >= 1")
        if self.tp_distance <= 0:
            raise ValueError("tp_distance must be positive")
        if isinstance(self.sort, dict):
            object.__setattr__(self, "sort", SortParams(**self.sort))

    @property
    def effective_patch_size(self) -> int:
        return self.patch_size if self.patch_size is not None else PATCH_BY_FACTOR[self.upsample_factor]

    @property
    def effective_center_size(self) -> int:
        if self.center_size is not None:
            return self.center_size
        return default_center_size(self.effective_patch_size)

    @property
    def effective_dilation_side(self) -> int:
        if self.dilation_side is not None:
            return self.dilation_side
        return 5 if self.upsample_factor == 1 else 10

    @property
    def area_bounds(self) -> tuple[int, int]:
        if self.scale_area_rule:
            f2 = self.upsample_factor**2
            return self.area_min_exclusive * f2, self.area_max_exclusive * f2
        return self.area_min_exclusive, self.area_max_exclusive

    @property
    def scaled_tp_distance(self) -> float:
        return self.tp_distance * self.upsample_factor

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["sort"] = {k: list(v) if isinstance(v, tuple) else v for k, v in d["sort"].items()}
        d["resolved"] = {
            "patch_size": self.effective_patch_size,
            "center_size": self.effective_center_size,
            "dilation_side": self.effective_dilation_side,
        }
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        d = {k: v for k, v in d.items() if k != "resolved"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        sort = d.pop("sort", None)
        cfg = cls(**d)
        if sort is not None:
            cfg = replace(cfg, sort=SortParams(**sort))
        return cfg
