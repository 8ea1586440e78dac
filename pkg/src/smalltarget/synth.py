"""Synthetic MWIR-like sequences with one moving target and ground truth.

Every frame draws from its own RNG stream keyed on ``(seed, frame index)``,
so frames can be generated independently and in any order.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from typing import Any

import numpy as np

from .core import BBox, Frame
from .evaluation import GroundTruth, GTRecord

RNG_ALGORITHM = "numpy PCG64 via default_rng([seed, stream, frame])"

# Specks are kept at least this far (px) from the target center and the border.
SPECK_CLEARANCE = 20.0
SPECK_MARGIN = 10


class ScenarioError(ValueError):
    """A scenario field is out of range; the message names the field."""


@dataclass(frozen=True)
class TargetSpec:
    start: tuple[float, float] = (40.0, 40.0)
    velocity: tuple[float, float] = (0.5, 0.25)
    amplitude: float = 0.5
    sigma: float = 1.5


@dataclass(frozen=True)
class ClutterSpec:
    count: int = 0
    amplitude_range: tuple[float, float] = (0.1, 0.25)
    sigma_range: tuple[float, float] = (2.5, 4.0)
    positions: tuple[tuple[float, float], ...] | None = None


@dataclass(frozen=True)
class Scenario:
    width: int = 320
    height: int = 240
    frame_count: int = 300
    background_level: float = 0.2
    target: TargetSpec = field(default_factory=TargetSpec)
    clutter: ClutterSpec = field(default_factory=ClutterSpec)
    noise_sigma: float = 0.0
    flicker: float = 0.0
    spurious_rate: float = 0.0
    speck_amplitude: float = 0.6
    speck_sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.target, dict):
            object.__setattr__(self, "target", TargetSpec(**_tuples(self.target)))
        if isinstance(self.clutter, dict):
            object.__setattr__(self, "clutter", ClutterSpec(**_tuples(self.clutter)))
        self.validate()

    def validate(self) -> None:
        def need(ok, name, why):
            if not ok:
                raise ScenarioError(f"{name}: {why}")

        need(self.width >= 1, "width", "must be >= 1")
        need(self.height >= 1, "height", "must be >= 1")
        need(self.frame_count >= 1, "frame_count", "must be >= 1")
        need(0.0 <= self.background_level <= 1.0, "background_level", "must lie in [0, 1]")
        t = self.target
        need(t.amplitude > 0, "target.amplitude", "must be positive")
        need(t.amplitude + self.background_level <= 1.0, "target.amplitude", "amplitude + background exceeds 1")
        need(t.sigma > 0, "target.sigma", "must be positive")
        for i in (0, self.frame_count - 1):
            u, v = self.target_center(i)
            need(
                0 <= u <= self.width - 1 and 0 <= v <= self.height - 1,
                "target.velocity",
                f"target leaves the frame at frame {i} ({u:.1f}, {v:.1f})",
            )
        c = self.clutter
        need(c.count >= 0, "clutter.count", "must be >= 0")
        lo, hi = c.amplitude_range
        need(0 <= lo <= hi and hi + self.background_level <= 1.0, "clutter.amplitude_range", "invalid or exceeds 1")
        need(0 < c.sigma_range[0] <= c.sigma_range[1], "clutter.sigma_range", "must be positive and ordered")
        if c.positions is not None:
            need(len(c.positions) == c.count, "clutter.positions", "length must equal clutter.count")
        need(self.noise_sigma >= 0, "noise_sigma", "must be >= 0")
        need(0 <= self.flicker < 1, "flicker", "must lie in [0, 1)")
        need(0 <= self.spurious_rate <= 1, "spurious_rate", "must lie in [0, 1]")
        need(
            self.speck_amplitude > 0 and self.speck_amplitude + self.background_level <= 1.0,
            "speck_amplitude",
            "must be positive with amplitude + background <= 1",
        )
        need(self.speck_sigma > 0, "speck_sigma", "must be positive")

    def target_center(self, t: int) -> tuple[float, float]:
        (u0, v0), (du, dv) = self.target.start, self.target.velocity
        return (u0 + t * du, v0 + t * dv)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Scenario":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ScenarioError(f"{sorted(unknown)[0]}: unknown scenario field")
        try:
            return cls(**_tuples(d))
        except TypeError as exc:
            raise ScenarioError(str(exc)) from None


def _tuples(d: dict) -> dict:
    def conv(v):
        if isinstance(v, list):
            return tuple(conv(x) for x in v)
        return v

    return {k: v if isinstance(v, dict) else conv(v) for k, v in d.items()}


@dataclass
class SyntheticSequence:
    frames: list[Frame]
    gt: GroundTruth
    specks: list[tuple[int, float, float]]
    metadata: dict[str, Any]


def gaussian_blob(shape: tuple[int, int], u: float, v: float, amplitude: float, sigma: float) -> np.ndarray:
    ys = np.arange(shape[0], dtype=np.float64)[:, None]
    xs = np.arange(shape[1], dtype=np.float64)[None, :]
    return amplitude * np.exp(-((xs - u) ** 2 + (ys - v) ** 2) / (2 * sigma * sigma))


def _clutter_image(sc: Scenario) -> np.ndarray:
    c = sc.clutter
    img = np.zeros((sc.height, sc.width))
    if c.count == 0:
        return img
    rng = np.random.default_rng([sc.seed, 1])
    amps = rng.uniform(*c.amplitude_range, size=c.count)
    sigmas = rng.uniform(*c.sigma_range, size=c.count)
    if c.positions is not None:
        pos = np.asarray(c.positions, dtype=np.float64)
    else:
        pos = np.column_stack([rng.uniform(0, sc.width - 1, c.count), rng.uniform(0, sc.height - 1, c.count)])
    for (u, v), a, s in zip(pos, amps, sigmas):
        img += gaussian_blob(img.shape, u, v, a, s)
    return img


def render_frame(sc: Scenario, t: int, clutter: np.ndarray | None = None):
    """Frame ``t`` and the speck drawn in it, if any."""
    rng = np.random.default_rng([sc.seed, 0, t])
    shape = (sc.height, sc.width)
    if clutter is None:
        clutter = _clutter_image(sc)
    u, v = sc.target_center(t)
    img = sc.background_level + clutter + gaussian_blob(shape, u, v, sc.target.amplitude, sc.target.sigma)

    speck = None
    if rng.random() < sc.spurious_rate:
        for _ in range(100):
            su = rng.uniform(SPECK_MARGIN, sc.width - 1 - SPECK_MARGIN)
            sv = rng.uniform(SPECK_MARGIN, sc.height - 1 - SPECK_MARGIN)
            if np.hypot(su - u, sv - v) > SPECK_CLEARANCE:
                speck = (t, float(su), float(sv))
                img += gaussian_blob(shape, su, sv, sc.speck_amplitude, sc.speck_sigma)
                break

    gain = 1.0 + sc.flicker * rng.uniform(-1.0, 1.0) if sc.flicker > 0 else 1.0
    img = img * gain
    if sc.noise_sigma > 0:
        img = img + rng.normal(0.0, sc.noise_sigma, size=shape)
    img = np.clip(img, 0.0, 1.0)
    # Quantize to 16 bits so in-memory frames equal their PGM round trip.
    raw = np.rint(img * 65535).astype(np.uint16)
    return Frame.from_raw(raw, index=t, source_depth=16), speck


def generate_sequence(sc: Scenario) -> SyntheticSequence:
    sc.validate()
    clutter = _clutter_image(sc)
    frames, specks, records = [], [], []
    half = 2 * sc.target.sigma
    for t in range(sc.frame_count):
        frame, speck = render_frame(sc, t, clutter)
        frames.append(frame)
        if speck is not None:
            specks.append(speck)
        u, v = sc.target_center(t)
        records.append(GTRecord(t, BBox(u - half, v - half, u + half, v + half), (u, v)))
    meta = {"rng": RNG_ALGORITHM, "seed": sc.seed, "speck_count": len(specks)}
    return SyntheticSequence(frames, GroundTruth.from_records(records), specks, meta)
