"""Self-check battery behind the `verify` CLI verb.

Each check prints one PASS/FAIL line; failures are collected and returned.
These are down-scaled versions of the test-suite invariants so users can
validate an installation in seconds.
"""

from __future__ import annotations

import math
import tempfile
from pathlib import Path

import numpy as np

from . import checkpoint as ck
from . import diffusion as D
from . import metrics as M
from . import nn, optim, pe
from .rng import gaussian, make_rng
from .tensor import Tensor, backward, leaky_relu, mse_loss


def _direct_pe(i, j, C):
    d = C // 4
    vec = np.empty(C)
    for idx in range(2 * d):
        k = idx // 2
        angle = i / 10000.0 ** (k / (2.0 * d))
        vec[idx] = math.sin(angle) if idx % 2 == 0 else math.cos(angle)
    for idx in range(2 * d):
        k = idx // 2
        angle = j / 10000.0 ** (k / (2.0 * d))
        vec[2 * d + idx] = math.sin(angle) if idx % 2 == 0 else math.cos(angle)
    return vec


def check_pe_oracle(quick=True):
    sizes = [(4, 4, 64), (8, 8, 4)] if quick else [(4, 4, 64), (8, 8, 4), (64, 64, 4)]
    worst = 0.0
    for H, W, C in sizes:
        grid = pe.build_grid(H, W, C)
        for i in range(0, H, max(1, H // 8)):
            for j in range(0, W, max(1, W // 8)):
                worst = max(worst, np.abs(grid.data[:, i, j] - _direct_pe(i, j, C)).max())
    assert worst <= 1e-6, f"max deviation {worst}"


def check_shift_algebra(quick=True):
    rng = make_rng(1)
    grid = pe.build_grid(6, 5, 8)
    for _ in range(50 if quick else 500):
        a, b = rng.uniform(-10, 10, size=2)
        left = pe.shift_grid(pe.shift_grid(grid, a, 0.0), b, 0.0)
        right = pe.shift_grid(grid, a + b, 0.0)
        assert np.abs(left.data - right.data).max() <= 1e-6
    ident = pe.shift_grid(grid, 0.0, 0.0)
    assert np.abs(ident.data - grid.data).max() <= 1e-6
    wrap = pe.shift_grid(grid, 6.0, 5.0)
    assert np.abs(wrap.data - grid.data).max() <= 1e-6


def check_pyramid_shift_rule(quick=True):
    rng = make_rng(2)
    for _ in range(10 if quick else 100):
        L = int(rng.integers(2, 8))
        pyr = pe.build_pyramid(L, 2, 2, 4)
        k = float(rng.uniform(-32, 32))
        shifted = pe.shift_pyramid(pyr, k, 0.0)
        for idx, (dh, _) in enumerate(shifted.offsets):
            assert dh == k * 2.0 ** (idx + 1 - L)


def check_conv_equivariance(quick=True):
    rng = make_rng(3)
    x = gaussian(rng, (1, 3, 8, 8))
    p = nn.conv_params(3, 3, 3, rng, padding_mode="circular")
    rolled = nn.conv2d(Tensor(np.roll(x, 2, axis=2)), p).data
    assert np.abs(rolled - np.roll(nn.conv2d(Tensor(x), p).data, 2, axis=2)).max() <= 1e-6
    pz = nn.conv_params(3, 3, 3, rng, padding_mode="zero")
    shifted = nn.conv2d(Tensor(np.roll(x, 2, axis=2)), pz).data
    diff = np.abs(shifted - np.roll(nn.conv2d(Tensor(x), pz).data, 2, axis=2))
    assert diff[:, :, 3:-3, 3:-3].max() <= 1e-5 and diff.max() > 1e-3


def check_gradients(quick=True):
    rng = make_rng(4)
    x = Tensor(gaussian(rng, (1, 2, 5, 5)), requires_grad=True)
    p = nn.conv_params(2, 2, 3, rng)
    target = Tensor(gaussian(rng, (1, 2, 5, 5)))
    loss = mse_loss(leaky_relu(nn.conv2d(x, p)), target)
    backward(loss)
    eps = 1e-3
    flat = x.data.reshape(-1)
    idx = 7
    keep = flat[idx]
    flat[idx] = keep + eps
    hi = float(mse_loss(leaky_relu(nn.conv2d(x, p)), target).data)
    flat[idx] = keep - eps
    lo = float(mse_loss(leaky_relu(nn.conv2d(x, p)), target).data)
    flat[idx] = keep
    fd = (hi - lo) / (2 * eps)
    assert abs(x.grad.reshape(-1)[idx] - fd) < 1e-3 * max(1.0, abs(fd))


def check_similarity_metric(quick=True):
    rng = make_rng(5)
    for _ in range(100 if quick else 1000):
        a = rng.random((7, 7))
        b = rng.random((7, 7))
        num, den = 0.0, 0.0
        for x, y in zip(a.ravel(), b.ravel()):
            num += min(x, y)
            den += max(x, y)
        assert abs(M.patch_similarity(a, b) - num / den) <= 1e-7
    a = rng.random((9, 9))
    assert M.patch_similarity(a, 0.5 * a) == 0.5


def check_schedule_and_marginal(quick=True):
    sched = D.make_beta_schedule(8, 0.02, 0.1)
    assert np.all(np.diff(sched.betas) >= 0)
    np.testing.assert_allclose(
        sched.alpha_bars[1:], sched.alpha_bars[:-1] * sched.alphas[1:], rtol=1e-12
    )
    n = 5000 if quick else 20000
    rng = make_rng(6)
    x = np.full((n, 1, 1, 1), 0.5, dtype=np.float32)
    for t in range(1, 6):
        x = D.forward_step(x, t, sched, gaussian(rng, x.shape))
    ab = sched.alpha_bar(5)
    assert abs(x.mean() - np.sqrt(ab) * 0.5) < 3 * np.sqrt((1 - ab) / n)


def check_reverse_step_formula(quick=True):
    from .generator import build_denoiser

    sched = D.make_beta_schedule(12, 0.02, 0.07)
    dn = build_denoiser(size=8, width=8, T=12, use_pe=False, seed=0)
    for p in dn.parameters():
        p.data = np.zeros_like(p.data)
    dn.conv_out.bias.data = np.full_like(dn.conv_out.bias.data, 0.4)
    x = np.full((1, 1, 8, 8), 1.5, dtype=np.float32)
    out = D.p_sample(x, 9, dn, None, sched, np.full_like(x, -0.3))
    mu = (1.5 - sched.beta(9) / np.sqrt(1 - sched.alpha_bar(9)) * 0.4) / np.sqrt(sched.alpha(9))
    assert np.abs(out - (mu + sched.sigma(9) * -0.3)).max() <= 1e-6


def check_adam(quick=True):
    p = Tensor(np.asarray(0.0), requires_grad=True)
    state = optim.init_adam([p])
    optim.adam_step([p], [np.asarray(0.5)], state, lr=0.01)
    assert abs(float(p.data) + 0.01) < 1e-4


def check_checkpoint_round_trip(quick=True):
    rng = make_rng(7)
    arrays = {"w": gaussian(rng, (3, 2)), "s": np.float32(1.25).reshape(())}
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "x.mspe"
        ck.save_checkpoint(path, arrays, config={"seed": 7})
        loaded, _, config = ck.load_checkpoint(path)
    for name in arrays:
        assert loaded[name].tobytes() == np.asarray(arrays[name], "<f4").tobytes()
    assert config == {"seed": 7}


def check_fractional_const_shift(quick=True):
    c = gaussian(make_rng(8), (2, 4, 4))
    out = M.const_fractional_shift(c, 1.0, 0.0)
    assert np.abs(out - np.roll(c, 1, axis=1)).max() <= 1e-6
    half = M.const_fractional_shift(np.asarray([[[1.0, 1.0], [3.0, 3.0]]]), 0.5, 0.0)
    assert np.abs(half - 2.0).max() <= 1e-6


CHECKS = [
    ("pe-oracle-equivalence", check_pe_oracle),
    ("shift-algebra", check_shift_algebra),
    ("pyramid-shift-rule", check_pyramid_shift_rule),
    ("conv-equivariance", check_conv_equivariance),
    ("gradient-check", check_gradients),
    ("similarity-metric", check_similarity_metric),
    ("schedule-and-marginal", check_schedule_and_marginal),
    ("reverse-step-formula", check_reverse_step_formula),
    ("adam-step", check_adam),
    ("checkpoint-round-trip", check_checkpoint_round_trip),
    ("const-fractional-shift", check_fractional_const_shift),
]


def run_invariant_suite(quick=True):
    failures = []
    for name, fn in CHECKS:
        try:
            fn(quick=quick)
            print(f"PASS {name}")
        except AssertionError as exc:
            failures.append(name)
            print(f"FAIL {name}: {exc}")
    if failures:
        print(f"{len(failures)}/{len(CHECKS)} checks failed")
    else:
        print(f"all {len(CHECKS)} checks passed")
    return failures
