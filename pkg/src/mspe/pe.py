"""Multi-scale sinusoidal positional embeddings over real coordinate grids.

Every grid transform (shift, resize, tile, extend) manipulates the real
coordinate axes and re-evaluates the closed-form embedding there, so
fractional and out-of-range coordinates are exact rather than interpolated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

WAVELENGTH_BASE = 10000.0


def encode_axis(coord: float, d: int) -> np.ndarray:
    """Encode one real coordinate into 2*d interleaved sin/cos values.

    Element 2k is sin(coord / 10000^(k/(2d))), element 2k+1 the matching
    cosine, for k = 0..d-1.
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if not math.isfinite(coord):
        raise ValueError(f"coordinate must be finite, got {coord}")
    return _encode_coords(np.asarray([coord], dtype=np.float64), d)[0]


def encode_position(i: float, j: float, C: int) -> np.ndarray:
    """Full embedding of location (i, j): row half then column half, length C."""
    d = _quarter_channels(C)
    return np.concatenate([encode_axis(i, d), encode_axis(j, d)])


def _quarter_channels(C: int) -> int:
    if C % 4 != 0 or C <= 0:
        raise ValueError(f"channel count must be a positive multiple of 4, got {C}")
    return C // 4


def _encode_coords(coords: np.ndarray, d: int) -> np.ndarray:
    """Vectorized axis encoding: (n,) coordinates -> (n, 2d) embedding."""
    if not np.all(np.isfinite(coords)):
        raise ValueError("coordinates must be finite")
    k = np.arange(d, dtype=np.float64)
    inv_wavelength = WAVELENGTH_BASE ** (-k / (2.0 * d))
    phase = coords[:, None] * inv_wavelength[None, :]
    out = np.empty((coords.shape[0], 2 * d), dtype=np.float64)
    out[:, 0::2] = np.sin(phase)
    out[:, 1::2] = np.cos(phase)
    return out


@dataclass(frozen=True)
class PEGrid:
    """One scale's positional embedding sampled on explicit real coordinates.

    data[c, i, j] is the embedding of (row_coords[i], col_coords[j]); the
    first C/2 channels encode the row coordinate, the rest the column.
    wrap periods define the circular-shift semantics of this grid.
    """

    H: int
    W: int
    C: int
    row_coords: np.ndarray
    col_coords: np.ndarray
    data: np.ndarray
    wrap_period_h: float | None = None
    wrap_period_w: float | None = None


def grid_from_coords(
    row_coords: np.ndarray,
    col_coords: np.ndarray,
    C: int,
    wrap_period_h: float | None = None,
    wrap_period_w: float | None = None,
) -> PEGrid:
    """Evaluate the embedding analytically on the given coordinate axes."""
    d = _quarter_channels(C)
    rows = np.asarray(row_coords, dtype=np.float64)
    cols = np.asarray(col_coords, dtype=np.float64)
    if rows.ndim != 1 or cols.ndim != 1 or rows.size < 1 or cols.size < 1:
        raise ValueError("coordinate axes must be non-empty 1-D arrays")
    row_code = _encode_coords(rows, d)  # (H, 2d)
    col_code = _encode_coords(cols, d)  # (W, 2d)
    H, W = rows.size, cols.size
    data = np.empty((C, H, W), dtype=np.float32)
    data[: 2 * d] = row_code.T[:, :, None]
    data[2 * d :] = col_code.T[:, None, :]
    return PEGrid(
        H=H,
        W=W,
        C=C,
        row_coords=rows,
        col_coords=cols,
        data=data,
        wrap_period_h=wrap_period_h,
        wrap_period_w=wrap_period_w,
    )


def build_grid(H: int, W: int, C: int) -> PEGrid:
    """Default grid on integer pixel coordinates 0..H-1 x 0..W-1."""
    if H < 1 or W < 1:
        raise ValueError(f"grid extent must be >= 1, got {H}x{W}")
    return grid_from_coords(
        np.arange(H, dtype=np.float64),
        np.arange(W, dtype=np.float64),
        C,
        wrap_period_h=float(H),
        wrap_period_w=float(W),
    )


def shift_grid(grid: PEGrid, dh: float, dw: float, mode: str = "circular") -> PEGrid:
    """Translate grid content by (dh, dw) pixels.

    Positive dh moves content downward: output row i reads the source
    coordinate row_coords[i] - dh. Circular mode wraps coordinates modulo
    the grid's period; open mode leaves them unwrapped.
    """
    if not (math.isfinite(dh) and math.isfinite(dw)):
        raise ValueError("shift amounts must be finite")
    if mode not in ("circular", "open"):
        raise ValueError(f"unknown shift mode {mode!r}")
    rows = grid.row_coords - dh
    cols = grid.col_coords - dw
    if mode == "circular":
        ph = grid.wrap_period_h if grid.wrap_period_h is not None else float(grid.H)
        pw = grid.wrap_period_w if grid.wrap_period_w is not None else float(grid.W)
        rows = np.mod(rows, ph)
        cols = np.mod(cols, pw)
    return grid_from_coords(rows, cols, grid.C, grid.wrap_period_h, grid.wrap_period_w)


def scale_shift_amount(k: float, l: int, L: int) -> float:
    """Image-space shift of k pixels expressed at scale l of an L-scale stack."""
    if not 1 <= l <= L:
        raise ValueError(f"scale index l={l} outside 1..{L}")
    return k * 2.0 ** (l - L)


def resize_grid(grid: PEGrid, H2: int, W2: int) -> PEGrid:
    """Resample the grid to H2 x W2 by mapping output index i2 to the source
    coordinate at fractional index i2 * H / H2 (re-evaluated analytically)."""
    if H2 < 1 or W2 < 1:
        raise ValueError(f"target extent must be >= 1, got {H2}x{W2}")
    rows = _coords_at_fractional_indices(
        grid.row_coords, np.arange(H2) * (grid.H / H2), grid.wrap_period_h
    )
    cols = _coords_at_fractional_indices(
        grid.col_coords, np.arange(W2) * (grid.W / W2), grid.wrap_period_w
    )
    return grid_from_coords(rows, cols, grid.C, grid.wrap_period_h, grid.wrap_period_w)


def _coords_at_fractional_indices(coords, f, period):
    """Linear interpolation of a coordinate axis in index space.

    Wrapped (circularly shifted) axes are unwrapped before interpolating so
    the wrap discontinuity is not averaged across, then re-wrapped. Ends are
    extrapolated with the edge slope (unit slope for single-entry axes).
    """
    n = coords.size
    if n == 1:
        return coords[0] + np.asarray(f, dtype=np.float64)
    lifted = coords.astype(np.float64).copy()
    if period is not None:
        drops = np.diff(lifted) < 0
        lifted += period * np.concatenate([[0.0], np.cumsum(drops)])
    idx = np.clip(np.floor(f).astype(int), 0, n - 2)
    frac = f - idx
    out = lifted[idx] * (1.0 - frac) + lifted[idx + 1] * frac
    if period is not None:
        out = np.mod(out, period)
    return out


def tile_grid(grid: PEGrid, h_segments=None, w_segments=None) -> PEGrid:
    """Concatenate coordinate intervals sampled at unit steps along each axis.

    Segments are (start, stop) pairs in source coordinates; stop is
    exclusive. None keeps an axis unchanged. Repeating [0, W) twice yields a
    double-width grid whose halves are exact copies.
    """
    rows = _tiled_axis(grid.row_coords, h_segments, "h")
    cols = _tiled_axis(grid.col_coords, w_segments, "w")
    return grid_from_coords(
        rows, cols, grid.C, wrap_period_h=float(rows.size), wrap_period_w=float(cols.size)
    )


def _tiled_axis(coords, segments, axis_name):
    if segments is None:
        return coords
    if len(segments) == 0:
        raise ValueError(f"empty segment list for axis {axis_name}")
    parts = []
    for start, stop in segments:
        count = math.ceil(stop - start - 1e-9)
        if count < 1:
            raise ValueError(f"degenerate segment [{start}, {stop}) on axis {axis_name}")
        parts.append(start + np.arange(count, dtype=np.float64))
    return np.concatenate(parts)


def extend_grid(grid: PEGrid, margin_h: float, margin_w: float) -> PEGrid:
    """Extend the coordinate range to [-margin, extent + margin) on each axis.

    Exterior samples are evaluated analytically at out-of-range coordinates;
    for integral margins the interior block equals the source grid exactly.
    """
    if margin_h < 0 or margin_w < 0:
        raise ValueError("margins must be non-negative")
    rows = _extended_axis(grid.H, margin_h)
    cols = _extended_axis(grid.W, margin_w)
    return grid_from_coords(
        rows,
        cols,
        grid.C,
        wrap_period_h=float(grid.H + 2 * margin_h),
        wrap_period_w=float(grid.W + 2 * margin_w),
    )


def _extended_axis(extent, margin):
    count = math.ceil(extent + 2 * margin - 1e-9)
    return -margin + np.arange(count, dtype=np.float64)


@dataclass(frozen=True)
class PEPyramid:
    """Per-scale embeddings, coarsest first, with dyadic spatial growth.

    offsets records the cumulative (dh, dw) applied to each level so the
    per-scale shift rule can be read back exactly.
    """

    levels: tuple[PEGrid, ...]
    dyadic_factor: int = 2
    offsets: tuple[tuple[float, float], ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.offsets is None:
            object.__setattr__(self, "offsets", tuple((0.0, 0.0) for _ in self.levels))
        base = self.levels[0]
        for l, grid in enumerate(self.levels):
            factor = self.dyadic_factor**l
            if grid.H != base.H * factor or grid.W != base.W * factor:
                raise ValueError(
                    f"level {l} is {grid.H}x{grid.W}, expected "
                    f"{base.H * factor}x{base.W * factor}"
                )

    @property
    def L(self) -> int:
        return len(self.levels)


def build_pyramid(L: int, base_h: int, base_w: int, channels) -> PEPyramid:
    """Default pyramid of L dyadic levels; channels may be one int or a
    per-level sequence (each a multiple of 4)."""
    if L < 1:
        raise ValueError(f"pyramid needs at least one level, got L={L}")
    if isinstance(channels, int):
        channels = [channels] * L
    if len(channels) != L:
        raise ValueError(f"expected {L} channel counts, got {len(channels)}")
    levels = tuple(
        build_grid(base_h * 2**l, base_w * 2**l, channels[l]) for l in range(L)
    )
    return PEPyramid(levels=levels)


def shift_pyramid(pyr: PEPyramid, dh: float, dw: float, mode: str = "circular") -> PEPyramid:
    """Shift every level by its share of an image-scale (dh, dw) translation:
    level l moves by the image shift scaled with 2^(l - L)."""
    L = pyr.L
    levels = []
    offsets = []
    for idx, grid in enumerate(pyr.levels):
        level_dh = scale_shift_amount(dh, idx + 1, L)
        level_dw = scale_shift_amount(dw, idx + 1, L)
        levels.append(shift_grid(grid, level_dh, level_dw, mode))
        prev_dh, prev_dw = pyr.offsets[idx]
        offsets.append((prev_dh + level_dh, prev_dw + level_dw))
    return PEPyramid(
        levels=tuple(levels), dyadic_factor=pyr.dyadic_factor, offsets=tuple(offsets)
    )
