"""Toy denoising diffusion model: linear schedule, forward noising process,
learned reverse process, training loop, and stochastic reconstruction.

Array-in/array-out: these functions accept plain ndarrays or engine Tensors
and compute on float32 arrays; gradients only flow inside train_step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import pe
from .generator import DenoiserSpec, build_denoiser_pyramid, denoiser_forward
from .optim import AdamState, adam_step_from_grads, init_adam
from .rng import gaussian, make_rng
from .tensor import Tensor, backward, mse_loss, no_grad


@dataclass(frozen=True)
class BetaSchedule:
    """Linear variance schedule; arrays are indexed 0..T-1 for steps 1..T."""

    T: int
    betas: np.ndarray
    alphas: np.ndarray
    alpha_bars: np.ndarray
    sigmas: np.ndarray

    def beta(self, t):
        return self.betas[np.asarray(t) - 1]

    def alpha(self, t):
        return self.alphas[np.asarray(t) - 1]

    def alpha_bar(self, t):
        """Cumulative product; alpha_bar(0) is 1 by convention."""
        t = np.asarray(t)
        return np.where(t > 0, self.alpha_bars[np.maximum(t, 1) - 1], 1.0)

    def sigma(self, t):
        return self.sigmas[np.asarray(t) - 1]


def make_beta_schedule(T: int, beta1: float = 1e-4, betaT: float = 0.02) -> BetaSchedule:
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    if not (0.0 < beta1 <= betaT < 1.0):
        raise ValueError(f"need 0 < beta1 <= betaT < 1, got {beta1}, {betaT}")
    betas = np.linspace(beta1, betaT, T, dtype=np.float64)
    alphas = 1.0 - betas
    alpha_bars = np.cumprod(alphas)
    sigmas = np.sqrt(betas)
    return BetaSchedule(T=T, betas=betas, alphas=alphas, alpha_bars=alpha_bars, sigmas=sigmas)


def _arr(x) -> np.ndarray:
    if isinstance(x, Tensor):
        return x.data
    return np.asarray(x, dtype=np.float32)


def _check_t(t, T):
    ts = np.asarray(t)
    if np.any(ts < 1) or np.any(ts > T):
        raise ValueError(f"timestep {t} outside 1..{T}")


def forward_step(x_prev, t: int, sched: BetaSchedule, noise) -> np.ndarray:
    """One diffusion step: sqrt(1 - beta_t) x_{t-1} + sqrt(beta_t) noise."""
    _check_t(t, sched.T)
    b = sched.beta(t)
    return (np.sqrt(1.0 - b) * _arr(x_prev) + np.sqrt(b) * _arr(noise)).astype(np.float32)


def q_sample(x0, t, sched: BetaSchedule, noise) -> np.ndarray:
    """Closed-form marginal of the iterated forward process. t may be a
    per-sample vector for training batches; t = 0 returns x0 exactly
    (alpha_bar(0) = 1 convention)."""
    ts = np.asarray(t)
    if np.any(ts < 0) or np.any(ts > sched.T):
        raise ValueError(f"timestep {t} outside 0..{sched.T}")
    ab = sched.alpha_bar(ts)
    if ts.ndim > 0:
        ab = ab.reshape(-1, *([1] * (_arr(x0).ndim - 1)))
    return (np.sqrt(ab) * _arr(x0) + np.sqrt(1.0 - ab) * _arr(noise)).astype(np.float32)


def p_sample(x_t, t: int, denoiser: DenoiserSpec, pyramid, sched: BetaSchedule, noise) -> np.ndarray:
    """One learned reverse step.

    The mean follows the noise-prediction parameterization
    (x_t - beta_t / sqrt(1 - alpha_bar_t) * eps_hat) / sqrt(alpha_t);
    sigma_t * noise is added except at t = 1.
    """
    _check_t(t, sched.T)
    xt = _arr(x_t)
    with no_grad():
        eps_hat = denoiser_forward(denoiser, Tensor(xt), t, pyramid).data
    coef = sched.beta(t) / np.sqrt(1.0 - sched.alpha_bar(t))
    mean = (xt - coef * eps_hat) / np.sqrt(sched.alpha(t))
    if t > 1:
        mean = mean + sched.sigma(t) * _arr(noise)
    return mean.astype(np.float32)


def generate(
    denoiser: DenoiserSpec, pyramid, sched: BetaSchedule, n: int, seed: int = 0
) -> np.ndarray:
    """Full reverse chain from pure noise."""
    rng = make_rng(seed, stream=20)
    shape = (n, denoiser.in_channels, denoiser.size, denoiser.size)
    x = gaussian(rng, shape)
    for t in range(sched.T, 0, -1):
        noise = gaussian(rng, shape) if t > 1 else 0.0
        x = p_sample(x, t, denoiser, pyramid, sched, noise)
    return x


def stochastic_reconstruct(
    x0, t_enc: int, denoiser: DenoiserSpec, pyramid, sched: BetaSchedule, seed: int = 0
) -> np.ndarray:
    """Encode x0 to timestep t_enc with the forward marginal, then decode
    with the learned reverse chain. A shifted pyramid requests the
    reconstruction at translated coordinates."""
    _check_t(t_enc, sched.T)
    rng = make_rng(seed, stream=21)
    x0 = _arr(x0)
    x = q_sample(x0, t_enc, sched, gaussian(rng, x0.shape))
    for t in range(t_enc, 0, -1):
        noise = gaussian(rng, x0.shape) if t > 1 else 0.0
        x = p_sample(x, t, denoiser, pyramid, sched, noise)
    return x


def train_step(
    denoiser: DenoiserSpec,
    x0_batch,
    sched: BetaSchedule,
    opt_state: AdamState,
    lr: float,
    rng: np.random.Generator,
    pyramid=None,
) -> float:
    """One noise-prediction step: sample t per element, noise the batch with
    the forward marginal, regress the injected noise, Adam-update."""
    x0 = _arr(x0_batch)
    n = x0.shape[0]
    ts = rng.integers(1, sched.T + 1, size=n)
    noise = gaussian(rng, x0.shape)
    x_t = q_sample(x0, ts, sched, noise)
    pred = denoiser_forward(denoiser, Tensor(x_t), ts, pyramid)
    loss = mse_loss(pred, Tensor(noise))
    backward(loss)
    params = denoiser.parameters()
    adam_step_from_grads(params, opt_state, lr)
    for p in params:
        p.zero_grad()
    return float(loss.data)


def train_denoiser(
    denoiser: DenoiserSpec,
    images: np.ndarray,
    sched: BetaSchedule,
    steps: int,
    lr: float = 2e-3,
    batch: int = 8,
    seed: int = 0,
    pyramid=None,
) -> list[float]:
    """Seed-deterministic training loop over a dataset of [-1, 1] images."""
    if pyramid is None and denoiser.use_pe:
        pyramid = build_denoiser_pyramid(denoiser)
    rng = make_rng(seed, stream=22)
    state = init_adam(denoiser.parameters())
    losses = []
    n = images.shape[0]
    for _ in range(steps):
        idx = rng.integers(0, n, size=min(batch, n))
        losses.append(train_step(denoiser, images[idx], sched, state, lr, rng, pyramid))
    return losses
