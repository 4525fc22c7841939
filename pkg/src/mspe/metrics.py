"""Spatial-bias probes: soft-IoU patch similarity, shift-consistency curves,
fractional shift of the baseline constant, and quadrant mass statistics."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import pe
from .generator import BASELINE, MS_PE, SS_PE, GeneratorSpec, SynthInputs, synth_forward
from .tensor import Tensor, no_grad


def to_intensity(image: np.ndarray) -> np.ndarray:
    """Grayscale intensity of a [-1, 1] image: channels are unit-rescaled
    before averaging so saturated hues keep their brightness, then clamped;
    the -1 background maps to 0."""
    img = np.clip((np.asarray(image, dtype=np.float64) + 1.0) / 2.0, 0.0, 1.0)
    if img.ndim == 3:
        img = img.mean(axis=0)
    return img


def _gray01(patch: np.ndarray) -> np.ndarray:
    """Channel-mean grayscale clamped to [0, 1] (patches arrive unit-scaled)."""
    p = np.asarray(patch, dtype=np.float64)
    if p.ndim == 3:
        p = p.mean(axis=0)
    return np.clip(p, 0.0, 1.0)


def patch_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Continuous IoU relaxation: sum(min) / sum(max) on grayscale patches
    clamped to [0, 1]; defined as 1 when both patches are identically zero."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"patch shapes differ: {a.shape} vs {b.shape}")
    ga, gb = _gray01(a), _gray01(b)
    denom = np.maximum(ga, gb).sum()
    if denom == 0.0:
        return 1.0
    return float(np.minimum(ga, gb).sum() / denom)


def quadrant_mass(intensity: np.ndarray) -> np.ndarray:
    """Fraction of total intensity in (upper-left, upper-right, lower-left,
    lower-right); uniform when the image is empty."""
    img = np.asarray(intensity, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"quadrant_mass expects a 2-D intensity map, got {img.shape}")
    if img.min() < 0:
        raise ValueError("intensity must be non-negative; convert with to_intensity first")
    h2, w2 = img.shape[0] // 2, img.shape[1] // 2
    quads = np.asarray(
        [
            img[:h2, :w2].sum(),
            img[:h2, w2:].sum(),
            img[h2:, :w2].sum(),
            img[h2:, w2:].sum(),
        ]
    )
    total = quads.sum()
    if total == 0.0:
        return np.full(4, 0.25)
    return quads / total


def const_fractional_shift(c, dh: float, dw: float) -> np.ndarray:
    """Circularly shift the baseline constant tensor by a possibly fractional
    amount, bilinearly interpolating the four nearest lattice values."""
    arr = np.asarray(getattr(c, "data", c), dtype=np.float64)
    C, H, W = arr.shape
    si = (np.arange(H) - dh) % H
    sj = (np.arange(W) - dw) % W
    i0 = np.floor(si).astype(int)
    j0 = np.floor(sj).astype(int)
    fi = (si - i0)[None, :, None]
    fj = (sj - j0)[None, None, :]
    i0 %= H
    j0 %= W
    i1 = (i0 + 1) % H
    j1 = (j0 + 1) % W
    rows = arr[:, i0, :] * (1.0 - fi) + arr[:, i1, :] * fi
    out = rows[:, :, j0] * (1.0 - fj) + rows[:, :, j1] * fj
    return out.astype(np.float32)


@dataclass
class ShiftCurve:
    """Similarity against the unshifted generation per pixel offset."""

    shifts: list[float]
    similarities: list[float]
    mode: str

    def __post_init__(self):
        if len(self.shifts) != len(self.similarities):
            raise ValueError("shifts and similarities must align")
        for s in self.similarities:
            if not 0.0 <= s <= 1.0 + 1e-9:
                raise ValueError(f"similarity {s} outside [0, 1]")


def shifted_output(spec: GeneratorSpec, inputs: SynthInputs, dh: float, dw: float) -> np.ndarray:
    """Mode-appropriate generation at translated coordinates.

    ms-pe shifts every pyramid level per the dyadic rule; ss-pe shifts its
    single coarse embedding analytically; the baseline bilinearly
    interpolates its constant tensor at the scaled fractional offset.
    """
    with no_grad():
        if spec.mode == MS_PE:
            shifted = pe.shift_pyramid(inputs.pyramid, dh, dw)
            moved = SynthInputs(latents=inputs.latents, noises=inputs.noises, pyramid=shifted)
            return synth_forward(spec, moved).data
        coarse_dh = pe.scale_shift_amount(dh, 1, spec.L)
        coarse_dw = pe.scale_shift_amount(dw, 1, spec.L)
        if spec.mode == SS_PE:
            levels = (pe.shift_grid(inputs.pyramid.levels[0], coarse_dh, coarse_dw),)
            levels += inputs.pyramid.levels[1:]
            moved = SynthInputs(
                latents=inputs.latents,
                noises=inputs.noises,
                pyramid=pe.PEPyramid(levels=levels),
            )
            return synth_forward(spec, moved).data
        shifted_const = const_fractional_shift(spec.const, coarse_dh, coarse_dw)
        moved_spec = replace(spec, const=Tensor(shifted_const))
        return synth_forward(moved_spec, inputs).data


def crop_patch(image: np.ndarray, top: float, left: float, size: int) -> np.ndarray:
    """Circularly crop a size x size patch whose corner may wrap; fractional
    corners are rounded to the nearest pixel."""
    top = int(round(top)) % image.shape[-2]
    left = int(round(left)) % image.shape[-1]
    rolled = np.roll(np.roll(image, -top, axis=-2), -left, axis=-1)
    return rolled[..., :size, :size]


def shift_consistency_curve(
    spec: GeneratorSpec,
    inputs: SynthInputs,
    shifts,
    crop=(0, 0, 32),
) -> ShiftCurve:
    """Similarity of the digit patch under successive vertical translations.

    Patch A sits at `crop` in the unshifted generation; patch B follows the
    shift (crop at top+shift in the shifted generation).
    """
    top, left, size = crop
    unit = lambda img: np.clip((img + 1.0) / 2.0, 0.0, 1.0)
    with no_grad():
        base = synth_forward(spec, inputs).data[0]
    patch_a = crop_patch(unit(base), top, left, size)
    sims = []
    for s in shifts:
        img = shifted_output(spec, inputs, s, 0.0)[0]
        patch_b = crop_patch(unit(img), top + s, left, size)
        sims.append(patch_similarity(patch_a, patch_b))
    return ShiftCurve(shifts=[float(s) for s in shifts], similarities=sims, mode=spec.mode)
