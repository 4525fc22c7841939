"""Spatially biased training corpora.

Digits (IDX files) or procedural glyphs are placed into a patch at a fixed
canvas position, upper-left by default, so the data carry a deliberate
location preference. Pixel convention is [-1, 1] with background -1.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError
from .rng import make_rng

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801

# label -> saturated RGB hue, in [0, 1] per channel
PALETTE = np.asarray(
    [
        (1.0, 0.0, 0.0),  # red
        (0.0, 1.0, 0.0),  # green
        (0.0, 0.0, 1.0),  # blue
        (1.0, 1.0, 0.0),  # yellow
        (1.0, 0.0, 1.0),  # magenta
        (0.0, 1.0, 1.0),  # cyan
        (1.0, 0.5, 0.0),  # orange
        (0.5, 0.0, 1.0),  # violet
        (0.0, 1.0, 0.5),  # spring green
        (1.0, 1.0, 1.0),  # white
    ],
    dtype=np.float32,
)


@dataclass
class BiasedCanvasSet:
    """Images (N, C, canvas, canvas) in [-1, 1], integer labels, and the
    per-image top-left patch offset."""

    images: np.ndarray
    labels: np.ndarray
    placement: np.ndarray  # (N, 2) row/col offsets
    patch: int

    def validate(self):
        if self.images.min() < -1.0 or self.images.max() > 1.0:
            raise ValueError("pixel values leave [-1, 1]")
        canvas = self.images.shape[-1]
        for idx in range(self.images.shape[0]):
            r0, c0 = self.placement[idx]
            support = np.argwhere(self.images[idx].max(axis=0) > -1.0)
            if support.size == 0:
                continue
            rows, cols = support[:, 0], support[:, 1]
            if (
                rows.min() < r0
                or cols.min() < c0
                or rows.max() >= r0 + self.patch
                or cols.max() >= c0 + self.patch
                or r0 + self.patch > canvas
                or c0 + self.patch > canvas
            ):
                raise ValueError(f"image {idx}: support escapes its {self.patch}px patch")
        return self


def parse_idx(data: bytes):
    """Decode IDX-format images (magic 0x803) or labels (magic 0x801).

    Returns a uint8 array of shape (N, rows, cols) or (N,). Malformed input
    raises DataFormatError naming the offending byte offset.
    """
    if len(data) < 8:
        raise DataFormatError(f"IDX header truncated: {len(data)} bytes, need >= 8 (offset 0)")
    (magic,) = struct.unpack(">I", data[:4])
    if magic == IDX_IMAGES_MAGIC:
        if len(data) < 16:
            raise DataFormatError(
                f"IDX image header truncated: {len(data)} bytes, need 16 (offset 4)"
            )
        n, rows, cols = struct.unpack(">III", data[4:16])
        expected = n * rows * cols
        payload = data[16:]
        if len(payload) != expected:
            raise DataFormatError(
                f"IDX image payload is {len(payload)} bytes, header implies {expected} "
                f"(offset 16)"
            )
        return np.frombuffer(payload, dtype=np.uint8).reshape(n, rows, cols)
    if magic == IDX_LABELS_MAGIC:
        (n,) = struct.unpack(">I", data[4:8])
        payload = data[8:]
        if len(payload) != n:
            raise DataFormatError(
                f"IDX label payload is {len(payload)} bytes, header implies {n} (offset 8)"
            )
        return np.frombuffer(payload, dtype=np.uint8).copy()
    raise DataFormatError(f"bad IDX magic 0x{magic:08x} (offset 0)")


def make_biased_canvas(digit: np.ndarray, canvas: int, patch: int, offset=(0, 0)) -> np.ndarray:
    """Center the [0, 1] digit inside a patch x patch box and place the box
    at `offset` on a black canvas; returns the (canvas, canvas) intensity."""
    digit = np.asarray(digit, dtype=np.float32)
    h, w = digit.shape
    if patch > canvas:
        raise ValueError(f"patch {patch} exceeds canvas {canvas}")
    if h > patch or w > patch:
        raise ValueError(f"digit {h}x{w} does not fit a {patch}px patch")
    r0, c0 = offset
    if r0 < 0 or c0 < 0 or r0 + patch > canvas or c0 + patch > canvas:
        raise ValueError(f"offset {offset} places the patch outside the canvas")
    out = np.zeros((canvas, canvas), dtype=np.float32)
    dr = r0 + (patch - h) // 2
    dc = c0 + (patch - w) // 2
    out[dr : dr + h, dc : dc + w] = digit
    return out


def colorize(digit: np.ndarray, palette_index: int) -> np.ndarray:
    """Modulate a fixed hue by the [0, 1] intensity; output is 3-channel in
    [-1, 1] with black mapping to (-1, -1, -1)."""
    color = PALETTE[palette_index % len(PALETTE)]
    return (2.0 * digit[None] * color[:, None, None] - 1.0).astype(np.float32)


def to_signed(intensity: np.ndarray) -> np.ndarray:
    """Single-channel [0, 1] intensity to the [-1, 1] convention."""
    return (2.0 * intensity[None] - 1.0).astype(np.float32)


def _glyph(cls: int, s: int, rng: np.random.Generator) -> np.ndarray:
    """Rasterize one of 10 deterministic stroke/blob classes into [0, 1]."""
    yy, xx = np.mgrid[0:s, 0:s].astype(np.float64)
    c = (s - 1) / 2.0
    cy = c + rng.uniform(-1.0, 1.0)
    cx = c + rng.uniform(-1.0, 1.0)
    t = s * rng.uniform(0.08, 0.12)
    R = s * rng.uniform(0.3, 0.38)
    r = np.hypot(yy - cy, xx - cx)
    box = np.maximum(np.abs(yy - cy), np.abs(xx - cx))
    m = s * 0.15
    inside = (yy > m) & (yy < s - 1 - m) & (xx > m) & (xx < s - 1 - m)
    vbar = (np.abs(xx - cx) < t) & (yy > m) & (yy < s - 1 - m)
    hbar = (np.abs(yy - cy) < t) & (xx > m) & (xx < s - 1 - m)
    if cls == 0:
        mask = np.abs(r - R) < t
    elif cls == 1:
        mask = vbar
    elif cls == 2:
        mask = hbar
    elif cls == 3:
        mask = vbar | hbar
    elif cls == 4:
        mask = ((np.abs(yy - xx) < 1.6 * t) | (np.abs(yy + xx - (s - 1)) < 1.6 * t)) & inside
    elif cls == 5:
        mask = (np.abs(box - R) < t) & (box <= R + t)
    elif cls == 6:
        mask = r < R * 0.85
    elif cls == 7:
        mask = (yy >= s - 1 - xx) & inside
    elif cls == 8:
        mask = ((np.abs(xx - m - t) < t) & (yy > m) & (yy < s - 1 - m)) | (
            (np.abs(yy - (s - 1 - m - t)) < t) & (xx > m) & (xx < s - 1 - m)
        )
    elif cls == 9:
        mask = (np.abs(r - R) < t) | (r < 1.8 * t)
    else:
        raise ValueError(f"glyph class {cls} outside 0..9")
    return mask.astype(np.float32)


def synth_glyphs(
    n: int,
    seed: int = 0,
    canvas: int = 64,
    patch: int = 32,
    offset=(0, 0),
    color: bool = True,
) -> BiasedCanvasSet:
    """Procedural offline stand-in for digit data: n glyphs with uniformly
    drawn classes, jittered strokes, placed at the given patch offset."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    rng = make_rng(seed, stream=30)
    labels = rng.integers(0, 10, size=n)
    channels = 3 if color else 1
    images = np.empty((n, channels, canvas, canvas), dtype=np.float32)
    for i in range(n):
        glyph = _glyph(int(labels[i]), patch, rng)
        placed = make_biased_canvas(glyph, canvas, patch, offset)
        images[i] = colorize(placed, int(labels[i])) if color else to_signed(placed)
    placement = np.tile(np.asarray(offset, dtype=np.int64), (n, 1))
    return BiasedCanvasSet(images=images, labels=labels, placement=placement, patch=patch)


def canonical_glyphs(
    canvas: int = 64, patch: int = 32, offset=(0, 0), color: bool = True
) -> BiasedCanvasSet:
    """One jitter-free exemplar per class, used as decoder targets."""
    channels = 3 if color else 1
    images = np.empty((10, channels, canvas, canvas), dtype=np.float32)
    for cls in range(10):
        glyph = _glyph(cls, patch, _FixedJitter())
        placed = make_biased_canvas(glyph, canvas, patch, offset)
        images[cls] = colorize(placed, cls) if color else to_signed(placed)
    labels = np.arange(10, dtype=np.int64)
    placement = np.tile(np.asarray(offset, dtype=np.int64), (10, 1))
    return BiasedCanvasSet(images=images, labels=labels, placement=placement, patch=patch)


class _FixedJitter:
    """Stands in for a Generator but returns jitter midpoints."""

    def uniform(self, lo, hi):
        return (lo + hi) / 2.0
