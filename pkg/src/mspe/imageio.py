"""Portable pixmap output (P5/P6) plus helpers for the [-1, 1] convention."""

from __future__ import annotations

import numpy as np

from .errors import DataFormatError


def to_unit(img: np.ndarray) -> np.ndarray:
    """[-1, 1] image to clipped [0, 1]."""
    return np.clip((np.asarray(img, dtype=np.float32) + 1.0) / 2.0, 0.0, 1.0)


def _quantize(arr: np.ndarray) -> np.ndarray:
    return np.clip(np.round(np.asarray(arr, dtype=np.float64) * 255.0), 0, 255).astype(np.uint8)


def write_pgm(path, gray01: np.ndarray):
    """Binary PGM from a (H, W) array in [0, 1]."""
    gray = _quantize(gray01)
    if gray.ndim != 2:
        raise ValueError(f"PGM needs a 2-D array, got {gray.shape}")
    with open(path, "wb") as fh:
        fh.write(f"P5\n{gray.shape[1]} {gray.shape[0]}\n255\n".encode("ascii"))
        fh.write(gray.tobytes())


def write_ppm(path, rgb01: np.ndarray):
    """Binary PPM from a (3, H, W) or (H, W, 3) array in [0, 1]."""
    rgb = np.asarray(rgb01)
    if rgb.ndim == 3 and rgb.shape[0] == 3:
        rgb = np.moveaxis(rgb, 0, -1)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError(f"PPM needs 3 channels, got shape {rgb.shape}")
    data = _quantize(rgb)
    with open(path, "wb") as fh:
        fh.write(f"P6\n{data.shape[1]} {data.shape[0]}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def write_image(path, img: np.ndarray):
    """Dispatch on channel count; img is CHW in [-1, 1]."""
    unit = to_unit(img)
    if unit.ndim == 2 or unit.shape[0] == 1:
        write_pgm(path, unit[0] if unit.ndim == 3 else unit)
    elif unit.shape[0] == 3:
        write_ppm(path, unit)
    else:
        raise ValueError(f"cannot render {unit.shape[0]}-channel image")


def read_pnm(path):
    """Read back P5/P6 files (testing aid); returns float [0, 1] HW or HWC."""
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        magic, rest = data.split(b"\n", 1)
        dims, rest = rest.split(b"\n", 1)
        maxval, raster = rest.split(b"\n", 1)
        w, h = (int(v) for v in dims.split())
        if int(maxval) != 255:
            raise ValueError
    except ValueError as exc:
        raise DataFormatError(f"unreadable PNM file {path}") from exc
    arr = np.frombuffer(raster, dtype=np.uint8)
    if magic == b"P5":
        return arr[: h * w].reshape(h, w).astype(np.float32) / 255.0
    if magic == b"P6":
        return arr[: h * w * 3].reshape(h, w, 3).astype(np.float32) / 255.0
    raise DataFormatError(f"unsupported PNM magic {magic!r} in {path}")


def write_grid_heatmaps(prefix, grid, channels=None):
    """Per-channel PGM heatmaps of an embedding grid, [-1, 1] -> [0, 1]."""
    chans = range(grid.C) if channels is None else channels
    paths = []
    for c in chans:
        path = f"{prefix}_c{c:03d}.pgm"
        write_pgm(path, (grid.data[c] + 1.0) / 2.0)
        paths.append(path)
    return paths
