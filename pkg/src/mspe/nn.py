"""Spatial network operations: convolution with selectable boundary rule,
anti-aliased 2x upsampling, feature/embedding injection, and a dense layer.

Convolution is cross-correlation over NCHW tensors; "zero" padding encodes
the absolute frame boundary while "circular" wraps indices and is exactly
translation-equivariant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import Tensor, _result

PADDING_MODES = ("zero", "circular")

# normalized 3x3 binomial kernel [1,2,1] x [1,2,1] / 16
_BLUR_KERNEL = (np.outer([1.0, 2.0, 1.0], [1.0, 2.0, 1.0]) / 16.0).astype(np.float32)


@dataclass
class ConvParams:
    """Weights (Cout, Cin, kh, kw), per-output bias, boundary rule, stride."""

    weights: Tensor
    bias: Tensor
    padding_mode: str = "zero"
    stride: int = 1

    def __post_init__(self):
        kh, kw = self.weights.data.shape[2:]
        if kh % 2 == 0 or kw % 2 == 0:
            raise ValueError(f"kernel must be odd for same-size output, got {kh}x{kw}")
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")
        if self.padding_mode not in PADDING_MODES:
            raise ValueError(f"unknown padding mode {self.padding_mode!r}")


def conv_params(cin, cout, k, rng, padding_mode="zero", stride=1, gain=1.37):
    """He-style initialisation matched to the leaky-ReLU slope used here."""
    std = gain / np.sqrt(cin * k * k)
    weights = Tensor(rng.normal(0.0, std, size=(cout, cin, k, k)), requires_grad=True)
    bias = Tensor(np.zeros(cout), requires_grad=True)
    return ConvParams(weights=weights, bias=bias, padding_mode=padding_mode, stride=stride)


def _pad(x: np.ndarray, ph: int, pw: int, mode: str) -> np.ndarray:
    if ph == 0 and pw == 0:
        return x
    spec = ((0, 0), (0, 0), (ph, ph), (pw, pw))
    return np.pad(x, spec, mode="wrap" if mode == "circular" else "constant")


def _fold_padding(dxp: np.ndarray, ph: int, pw: int, H: int, W: int, mode: str):
    """Route gradients of padded positions back to source pixels."""
    if ph == 0 and pw == 0:
        return dxp
    if mode == "zero":
        return dxp[:, :, ph : ph + H, pw : pw + W]
    if ph < H and pw < W:
        rows = dxp[:, :, ph : ph + H, :].copy()
        rows[:, :, H - ph :, :] += dxp[:, :, :ph, :]
        rows[:, :, :ph, :] += dxp[:, :, ph + H :, :]
        out = rows[:, :, :, pw : pw + W].copy()
        out[:, :, :, W - pw :] += rows[:, :, :, :pw]
        out[:, :, :, :pw] += rows[:, :, :, pw + W :]
        return out
    # padding wider than the tensor itself: generic wrapped scatter
    rmap = (np.arange(dxp.shape[2]) - ph) % H
    cmap = (np.arange(dxp.shape[3]) - pw) % W
    out = np.zeros((dxp.shape[0], dxp.shape[1], H, W), dtype=dxp.dtype)
    np.add.at(out, (slice(None), slice(None), rmap[:, None], cmap[None, :]), dxp)
    return out


def _im2col(xp: np.ndarray, kh: int, kw: int, stride: int, Ho: int, Wo: int):
    N, C = xp.shape[:2]
    cols = np.empty((N, C, kh, kw, Ho, Wo), dtype=xp.dtype)
    for ki in range(kh):
        for kj in range(kw):
            cols[:, :, ki, kj] = xp[
                :, :, ki : ki + Ho * stride : stride, kj : kj + Wo * stride : stride
            ]
    return cols.reshape(N, C * kh * kw, Ho * Wo)


def _col2im(dcols, N, C, kh, kw, Ho, Wo, stride, Hp, Wp):
    dxp = np.zeros((N, C, Hp, Wp), dtype=np.float32)
    d6 = dcols.reshape(N, C, kh, kw, Ho, Wo)
    for ki in range(kh):
        for kj in range(kw):
            dxp[:, :, ki : ki + Ho * stride : stride, kj : kj + Wo * stride : stride] += d6[
                :, :, ki, kj
            ]
    return dxp


def conv2d(x: Tensor, p: ConvParams) -> Tensor:
    """Cross-correlation with same-size padding (stride 1) or strided output."""
    if x.data.ndim != 4:
        raise ValueError(f"conv2d expects NCHW input, got shape {x.data.shape}")
    N, Cin, H, W = x.data.shape
    Cout, Cw, kh, kw = p.weights.data.shape
    if Cw != Cin:
        raise ValueError(f"conv2d: input has {Cin} channels, weights expect {Cw}")
    ph, pw, s = kh // 2, kw // 2, p.stride
    Ho = (H + 2 * ph - kh) // s + 1
    Wo = (W + 2 * pw - kw) // s + 1
    xp = _pad(x.data, ph, pw, p.padding_mode)
    Hp, Wp = xp.shape[2:]
    cols = _im2col(xp, kh, kw, s, Ho, Wo)
    wmat = p.weights.data.reshape(Cout, -1)
    out = np.matmul(wmat, cols).reshape(N, Cout, Ho, Wo)
    out += p.bias.data[None, :, None, None]

    def back(g):
        gflat = g.reshape(N, Cout, Ho * Wo)
        db = g.sum(axis=(0, 2, 3))
        dw = np.matmul(gflat, cols.transpose(0, 2, 1)).sum(axis=0).reshape(p.weights.data.shape)
        dcols = np.matmul(wmat.T, gflat)
        dxp = _col2im(dcols, N, Cin, kh, kw, Ho, Wo, s, Hp, Wp)
        dx = _fold_padding(dxp, ph, pw, H, W, p.padding_mode)
        return dx, dw, db

    return _result(out, (x, p.weights, p.bias), back)


def blur3x3(x: Tensor, padding_mode: str = "zero") -> Tensor:
    """Depthwise normalized binomial blur; sums to one, so constants pass
    through unchanged under circular padding."""
    N, C, H, W = x.data.shape
    xp = _pad(x.data, 1, 1, padding_mode)
    out = np.zeros_like(x.data)
    for ki in range(3):
        for kj in range(3):
            out += _BLUR_KERNEL[ki, kj] * xp[:, :, ki : ki + H, kj : kj + W]

    def back(g):
        dxp = np.zeros((N, C, H + 2, W + 2), dtype=np.float32)
        for ki in range(3):
            for kj in range(3):
                dxp[:, :, ki : ki + H, kj : kj + W] += _BLUR_KERNEL[ki, kj] * g
        return (_fold_padding(dxp, 1, 1, H, W, padding_mode),)

    return _result(out, (x,), back)


def nearest_up2(x: Tensor) -> Tensor:
    N, C, H, W = x.data.shape
    out = x.data.repeat(2, axis=2).repeat(2, axis=3)

    def back(g):
        return (g.reshape(N, C, H, 2, W, 2).sum(axis=(3, 5)),)

    return _result(out, (x,), back)


def upsample2x_blur(x: Tensor, padding_mode: str = "zero") -> Tensor:
    """Nearest-neighbour doubling followed by the 3x3 binomial blur."""
    return blur3x3(nearest_up2(x), padding_mode)


def add_channel_bias(x: Tensor, b: Tensor) -> Tensor:
    """x (N,C,H,W) plus a per-channel bias of shape (C,) or per-sample (N,C)."""
    if b.data.ndim == 1:
        out = x.data + b.data[None, :, None, None]
        back = lambda g: (g, g.sum(axis=(0, 2, 3)))
    elif b.data.ndim == 2:
        out = x.data + b.data[:, :, None, None]
        back = lambda g: (g, g.sum(axis=(2, 3)))
    else:
        raise ValueError(f"bias must be (C,) or (N,C), got shape {b.data.shape}")
    if out.shape != x.data.shape:
        raise ValueError(f"bias shape {b.data.shape} incompatible with {x.data.shape}")
    return _result(out, (x, b), back)


def add_scaled_pe(h: Tensor, gamma: Tensor, pe) -> Tensor:
    """h + gamma * PE with a learnable scalar gamma, broadcast over batch."""
    code = np.asarray(getattr(pe, "data", pe), dtype=np.float32)
    if gamma.data.shape != ():
        raise ValueError(f"gamma must be a scalar tensor, got shape {gamma.data.shape}")
    if code.shape != h.data.shape[1:]:
        raise ValueError(
            f"embedding shape {code.shape} does not match features {h.data.shape[1:]}"
        )
    out = h.data + gamma.data * code[None]

    def back(g):
        return g, np.float32((g * code[None]).sum())

    return _result(out, (h, gamma), back)


def linear(x: Tensor, w: Tensor) -> Tensor:
    """Dense map: (K,) -> (C,) or batched (N,K) -> (N,C) with weight (C,K)."""
    if x.data.ndim == 1:
        out = w.data @ x.data
        back = lambda g: (w.data.T @ g, np.outer(g, x.data))
    elif x.data.ndim == 2:
        out = x.data @ w.data.T
        back = lambda g: (g @ w.data, g.T @ x.data)
    else:
        raise ValueError(f"linear expects 1-D or 2-D input, got {x.data.shape}")
    return _result(out, (x, w), back)


def broadcast_batch(x: Tensor, n: int) -> Tensor:
    """(C,H,W) -> (n,C,H,W); gradients sum over the batch axis."""
    if x.data.ndim != 3:
        raise ValueError(f"broadcast_batch expects (C,H,W), got {x.data.shape}")
    out = np.repeat(x.data[None], n, axis=0)
    return _result(out, (x,), lambda g: (g.sum(axis=0),))


def _resize_weights(n_out: int, n_in: int) -> np.ndarray:
    """Bilinear weight matrix mapping output index i2 to source i2*n_in/n_out."""
    w = np.zeros((n_out, n_in), dtype=np.float32)
    coords = np.arange(n_out) * (n_in / n_out)
    lo = np.minimum(np.floor(coords).astype(int), n_in - 1)
    hi = np.minimum(lo + 1, n_in - 1)
    frac = (coords - lo).astype(np.float32)
    w[np.arange(n_out), lo] += 1.0 - frac
    w[np.arange(n_out), hi] += frac
    return w


def resize_bilinear(x: Tensor, H2: int, W2: int) -> Tensor:
    """Separable bilinear resample of NCHW features (same index convention
    as the embedding resize: output i2 samples source i2 * H / H2)."""
    N, C, H, W = x.data.shape
    R = _resize_weights(H2, H)
    S = _resize_weights(W2, W)
    out = np.einsum("ph,nchw,qw->ncpq", R, x.data, S, optimize=True)

    def back(g):
        return (np.einsum("ph,ncpq,qw->nchw", R, g, S, optimize=True),)

    return _result(out, (x,), back)


def concat_channels(tensors) -> Tensor:
    """Concatenate NCHW tensors along the channel axis."""
    tensors = tuple(tensors)
    sizes = [t.data.shape[1] for t in tensors]
    out = np.concatenate([t.data for t in tensors], axis=1)

    def back(g):
        grads = []
        start = 0
        for c in sizes:
            grads.append(g[:, start : start + c])
            start += c
        return tuple(grads)

    return _result(out, tensors, back)
