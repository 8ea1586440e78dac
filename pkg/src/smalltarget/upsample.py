"""Single-frame bicubic (cubic convolution) upsampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Frame


@dataclass(frozen=True)
class BicubicKernel:
    """Cubic convolution kernel; ``a = -0.5`` gives the Catmull-Rom cubic."""

    a: float = -0.5

    def __call__(self, x):
        a = self.a
        x = np.abs(np.asarray(x, dtype=np.float64))
        x2, x3 = x * x, x * x * x
        near = (a + 2) * x3 - (a + 3) * x2 + 1
        far = a * x3 - 5 * a * x2 + 8 * a * x - 4 * a
        return np.where(x <= 1, near, np.where(x < 2, far, 0.0))

    def taps(self, n_src: int, factor: int):
        """Source indices (n_dst, 4) and weights (n_dst, 4) for one axis.

        Output sample ``d`` sits at source coordinate ``(d + 0.5) / factor - 0.5``
        (pixel-center alignment); out-of-range taps replicate the edge sample.
        """
        dst = np.arange(n_src * factor, dtype=np.float64)
        src = (dst + 0.5) / factor - 0.5
        base = np.floor(src)
        t = src - base
        offsets = np.arange(-1, 3)
        idx = np.clip(base[:, None].astype(np.int64) + offsets, 0, n_src - 1)
        weights = self(t[:, None] - offsets)
        return idx, weights


def _resample_axis(img: np.ndarray, idx: np.ndarray, w: np.ndarray, axis: int) -> np.ndarray:
    # Interpolate offsets from the floor tap so a constant signal is reproduced exactly.
    img = np.moveaxis(img, axis, -1)
    ref = img[..., idx[:, 1]]
    out = ref.copy()
    for j in (0, 2, 3):
        out += w[:, j] * (img[..., idx[:, j]] - ref)
    return np.moveaxis(out, -1, axis)


def bicubic_upsample_array(img: np.ndarray, factor: int, kernel: BicubicKernel | None = None) -> np.ndarray:
    if factor not in (2, 4):
        raise ValueError(f"upsample factor must be 2 or 4, got {factor}")
    kernel = kernel or BicubicKernel()
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    ri, rw = kernel.taps(h, factor)
    ci, cw = kernel.taps(w, factor)
    out = _resample_axis(img, ci, cw, axis=1)
    out = _resample_axis(out, ri, rw, axis=0)
    return np.clip(out, 0.0, 1.0)


def bicubic_upsample(frame: Frame, factor: int, kernel: BicubicKernel | None = None) -> Frame:
    """Upsample a frame by 2 or 4; output is clamped to [0, 1]."""
    return Frame(bicubic_upsample_array(frame.pixels, factor, kernel), frame.index, frame.source_depth)


def to_upsampled_coord(c, factor: int):
    """Map an original-scale pixel coordinate onto the upsampled grid."""
    return (c + 0.5) * factor - 0.5


def to_original_coord(c, factor: int):
    return (c + 0.5) / factor - 0.5
