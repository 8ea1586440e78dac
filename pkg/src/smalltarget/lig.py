"""Local intensity and gradient (LIG) small-target detector.

Each pixel is scored by the product of two window statistics:

* local intensity: how much brighter the central cell is than the ring
  around it (clipped at zero);
* local gradient: for every ring pixel, the component of its intensity
  gradient pointing back at the window center (clipped at zero), averaged
  inside each angular sector; the weakest sector wins.

A blob that is bright on all sides scores high. A one-sided edge leaves at
least one sector with no inward gradient and scores zero.

The IG map is computed over fixed-height row bands so the result does not
depend on how many threads share the work.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import Frame, default_center_size

BAND_ROWS = 32


@dataclass(frozen=True)
class LigParams:
    patch_size: int = 7
    center_size: int | None = None
    sector_count: int = 8
    top_fraction: float = 1e-4

    def __post_init__(self):
        k, c = self.patch_size, self.center
        if k < 3 or k % 2 == 0:
            raise ValueError("patch_size must be odd and >= 3")
        if c < 1 or c % 2 == 0 or c >= k:
            raise ValueError("center_size must be odd and smaller than patch_size")
        if self.sector_count < 4:
            raise ValueError("sector_count must be >= 4")
        if not 0.0 < self.top_fraction <= 1.0:
            raise ValueError("top_fraction must lie in (0, 1]")

    @property
    def center(self) -> int:
        return self.center_size if self.center_size is not None else default_center_size(self.patch_size)

    @cached_property
    def ring(self) -> "_Ring":
        return _Ring.build(self.patch_size, self.center, self.sector_count)


@dataclass(frozen=True)
class _Ring:
    """Ring offsets (dy, dx), inward unit vectors and sector ids for one window shape."""

    dy: np.ndarray
    dx: np.ndarray
    uy: np.ndarray
    ux: np.ndarray
    sector: np.ndarray
    sector_sizes: np.ndarray

    @classmethod
    def build(cls, k: int, c: int, n: int) -> "_Ring":
        r, rc = k // 2, c // 2
        dy, dx = np.mgrid[-r : r + 1, -r : r + 1]
        keep = np.maximum(np.abs(dy), np.abs(dx)) > rc
        dy, dx = dy[keep], dx[keep]
        dist = np.hypot(dx, dy)
        bearing = np.mod(np.arctan2(dy, dx), 2 * np.pi)
        sector = np.minimum((n * bearing / (2 * np.pi)).astype(np.int64), n - 1)
        return cls(dy, dx, -dy / dist, -dx / dist, sector, np.bincount(sector, minlength=n))


def local_intensity(window: np.ndarray, center_size: int) -> float:
    """Center-cell mean minus ring mean, clipped at zero."""
    w = np.asarray(window, dtype=np.float64)
    k = w.shape[0]
    r, rc = k // 2, center_size // 2
    inner = np.zeros(w.shape, dtype=bool)
    inner[r - rc : r + rc + 1, r - rc : r + rc + 1] = True
    return max(0.0, float(w[inner].mean() - w[~inner].mean()))


def window_gradient(window: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Central differences (gy, gx) with edge samples replicated at the window border."""
    p = np.pad(np.asarray(window, dtype=np.float64), 1, mode="edge")
    gx = (p[1:-1, 2:] - p[1:-1, :-2]) / 2
    gy = (p[2:, 1:-1] - p[:-2, 1:-1]) / 2
    return gy, gx


def local_gradient(window: np.ndarray, sector_count: int = 8, center_size: int | None = None) -> float:
    """Weakest-sector mean of inward gradient over the ring of one window."""
    w = np.asarray(window, dtype=np.float64)
    k = w.shape[0]
    c = center_size if center_size is not None else default_center_size(k)
    ring = _Ring.build(k, c, sector_count)
    r = k // 2
    gy, gx = window_gradient(w)
    gy, gx = gy[ring.dy + r, ring.dx + r], gx[ring.dy + r, ring.dx + r]
    inward = np.maximum(0.0, gx * ring.ux + gy * ring.uy)
    sums = np.bincount(ring.sector, weights=inward, minlength=sector_count)
    filled = ring.sector_sizes > 0
    return float(np.min(sums[filled] / ring.sector_sizes[filled]))


def _box_sum(slab: np.ndarray, half: int, margin: int, rows: int) -> np.ndarray:
    # Sum over a (2*half+1)^2 box centered on every output pixel; slab carries `margin` extra rows/cols per side.
    w = slab.shape[1]
    acc = slab[:, margin - half : w - margin - half].copy()
    for d in range(-half + 1, half + 1):
        acc += slab[:, margin + d : w - margin + d]
    out = acc[margin - half : margin - half + rows].copy()
    for d in range(-half + 1, half + 1):
        out += acc[margin + d : margin + d + rows]
    return out


def _ig_band(img: np.ndarray, y0: int, y1: int, params: LigParams) -> np.ndarray:
    """IG values for interior rows y0..y1 and interior columns."""
    k, c, n = params.patch_size, params.center, params.sector_count
    r = k // 2
    rows = y1 - y0
    w = img.shape[1]
    ncols = w - 2 * r
    slab = img[y0 - r : y1 + r]

    total = _box_sum(slab, r, r, rows)
    center = _box_sum(slab, c // 2, r, rows)
    contrast = center / (c * c) - (total - center) / (k * k - c * c)
    intensity = np.maximum(contrast, 0.0)

    # Central differences away from the window border, one-sided on it.
    ddx = (slab[:, 1:] - slab[:, :-1]) / 2
    ddy = (slab[1:, :] - slab[:-1, :]) / 2
    gx_c = np.zeros_like(slab)
    gx_c[:, 1:-1] = (slab[:, 2:] - slab[:, :-2]) / 2
    gy_c = np.zeros_like(slab)
    gy_c[1:-1, :] = (slab[2:, :] - slab[:-2, :]) / 2

    ring = params.ring
    sums = np.zeros((n, rows, ncols))
    term = np.empty((rows, ncols))
    for dy, dx, uy, ux, s in zip(ring.dy, ring.dx, ring.uy, ring.ux, ring.sector):
        ry = r + dy
        if dy == -r:
            gy = ddy[ry : ry + rows, r + dx : r + dx + ncols]
        elif dy == r:
            gy = ddy[ry - 1 : ry - 1 + rows, r + dx : r + dx + ncols]
        else:
            gy = gy_c[ry : ry + rows, r + dx : r + dx + ncols]
        if dx == -r:
            gx = ddx[ry : ry + rows, r + dx : r + dx + ncols]
        elif dx == r:
            gx = ddx[ry : ry + rows, r + dx - 1 : r + dx - 1 + ncols]
        else:
            gx = gx_c[ry : ry + rows, r + dx : r + dx + ncols]
        np.multiply(gx, ux, out=term)
        term += gy * uy
        np.maximum(term, 0.0, out=term)
        sums[s] += term

    filled = np.flatnonzero(ring.sector_sizes)
    gradient = sums[filled[0]] / ring.sector_sizes[filled[0]]
    for s in filled[1:]:
        np.minimum(gradient, sums[s] / ring.sector_sizes[s], out=gradient)

    out = np.zeros((rows, w))
    out[:, r : w - r] = intensity * gradient
    return out


def compute_ig_map(frame: Frame | np.ndarray, params: LigParams = LigParams(), workers: int = 1) -> np.ndarray:
    """Per-pixel IG response; the band within ``patch_size // 2`` of the border is zero."""
    img = frame.pixels if isinstance(frame, Frame) else np.asarray(frame, dtype=np.float64)
    h, w = img.shape
    k = params.patch_size
    if h < k or w < k:
        raise ValueError(f"frame {w}x{h} is smaller than the {k}x{k} patch")
    r = k // 2
    ig = np.zeros((h, w))
    bands = [(y, min(y + BAND_ROWS, h - r)) for y in range(r, h - r, BAND_ROWS)]

    def run(band):
        y0, y1 = band
        ig[y0:y1] = _ig_band(img, y0, y1, params)

    if workers > 1 and len(bands) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, bands))
    else:
        for band in bands:
            run(band)
    return ig


def threshold_count(n_pixels: int, top_fraction: float) -> int:
    return max(1, round(top_fraction * n_pixels))


def top_values(ig: np.ndarray, top_fraction: float) -> np.ndarray:
    """The m largest IG values in ascending order."""
    flat = np.asarray(ig, dtype=np.float64).ravel()
    m = threshold_count(flat.size, top_fraction)
    return np.sort(np.partition(flat, flat.size - m)[flat.size - m :])


def adaptive_threshold(ig: np.ndarray, top_fraction: float = 1e-4) -> float:
    """Mean of the top ``top_fraction`` of IG values (at least one value)."""
    return float(np.mean(top_values(ig, top_fraction)))


def nonzero_mean_threshold(ig: np.ndarray) -> float:
    """The original LIG rule: mean of all non-zero responses."""
    nz = ig[ig > 0]
    return float(nz.mean()) if nz.size else 0.0


def binarize(ig: np.ndarray, threshold: float) -> np.ndarray:
    """Mask of pixels with a positive response at or above ``threshold``."""
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    return (ig >= threshold) & (ig > 0)
