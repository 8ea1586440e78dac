"""Connected-component analysis of the binarized IG map."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .core import BBox, Detection

EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class Component:
    label: int
    pixels: np.ndarray  # (area, 2) integer (x, y) pairs in raster order
    bbox: BBox
    max_intensity: float
    centroid: tuple[float, float]

    @property
    def area(self) -> int:
        return len(self.pixels)


def _dilate_axis(mask: np.ndarray, side: int, axis: int) -> np.ndarray:
    lo = -((side - 1) // 2)
    hi = lo + side - 1
    n = mask.shape[axis]
    out = np.zeros_like(mask)
    for off in range(max(lo, 1 - n), min(hi, n - 1) + 1):
        # out[p] |= mask[p + off]
        src = slice(max(off, 0), n + min(off, 0))
        dst = slice(max(-off, 0), n - max(off, 0))
        if axis == 0:
            out[dst] |= mask[src]
        else:
            out[:, dst] |= mask[:, src]
    return out


def dilate(mask: np.ndarray, se_side: int) -> np.ndarray:
    """Binary dilation by a ``se_side`` square.

    Pixel p is set when any input pixel lies in the square covering offsets
    ``-(se_side - 1) // 2 .. se_side // 2`` on both axes, so even squares
    reach one pixel further right/down. The square is clipped at the border.
    """
    if se_side < 1:
        raise ValueError("se_side must be >= 1")
    mask = np.asarray(mask, dtype=bool)
    return _dilate_axis(_dilate_axis(mask, se_side, 1), se_side, 0)


def label_components(mask: np.ndarray, intensity: np.ndarray | None = None) -> list[Component]:
    """8-connected labeling with labels 1..n in raster order of first pixel.

    ``max_intensity`` is read from ``intensity`` (the frame, not the IG map);
    without it every component reports 0.
    """
    mask = np.asarray(mask, dtype=bool)
    labels, n = ndimage.label(mask, structure=EIGHT_CONNECTED)
    if n == 0:
        return []
    flat = labels.ravel()
    idx = np.flatnonzero(flat)
    idx = idx[np.argsort(flat[idx], kind="stable")]
    bounds = np.cumsum(np.bincount(flat[idx], minlength=n + 1)[1:])
    w = mask.shape[1]
    values = None if intensity is None else np.asarray(intensity, dtype=np.float64).ravel()
    comps = []
    for lab, chunk in enumerate(np.split(idx, bounds[:-1]), start=1):
        ys, xs = np.divmod(chunk, w)
        comps.append(
            Component(
                label=lab,
                pixels=np.column_stack([xs, ys]),
                bbox=BBox(int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max())),
                max_intensity=float(values[chunk].max()) if values is not None else 0.0,
                centroid=(float(xs.mean()), float(ys.mean())),
            )
        )
    return comps


def rule_filter(components: list[Component], area_min_exclusive: int = 1, area_max_exclusive: int = 100) -> list[Component]:
    """Keep components whose area is strictly between the two bounds."""
    return [c for c in components if area_min_exclusive < c.area < area_max_exclusive]


def select_targets(components: list[Component], top_n: int = 1, frame_index: int = 0) -> list[Detection]:
    """Brightest components first; ties go to the larger, then the top-left-most."""
    ranked = sorted(components, key=lambda c: (-c.max_intensity, -c.area, c.bbox.y_min, c.bbox.x_min))
    return [
        Detection(frame_index=frame_index, bbox=c.bbox, centroid=c.centroid, score=c.max_intensity, area=c.area)
        for c in ranked[:top_n]
    ]
