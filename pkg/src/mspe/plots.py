"""Matplotlib figure rendering for report outputs.

Figures are written next to the delimited output with fixed metadata so
deterministic runs produce byte-identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SAVE_KW = {"dpi": 110, "metadata": {"Software": None}}

_MODE_STYLE = {
    "baseline": {"color": "tab:gray", "marker": "s"},
    "ss-pe": {"color": "tab:orange", "marker": "^"},
    "ms-pe": {"color": "tab:blue", "marker": "o"},
}


def save_shift_curves(path, curves):
    """Similarity-vs-shift curves, one line per mode."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for curve in curves:
        style = _MODE_STYLE.get(curve.mode, {})
        ax.plot(curve.shifts, curve.similarities, label=curve.mode,
                markersize=3, linewidth=1.2, **style)
    ax.set_xlabel("vertical shift (px)")
    ax.set_ylabel("patch similarity")
    ax.set_ylim(-0.02, 1.02)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_heatmap(path, arr, title="", colorbar=True):
    fig, ax = plt.subplots(figsize=(4.2, 4))
    im = ax.imshow(np.asarray(arr), cmap="magma")
    if title:
        ax.set_title(title)
    ax.set_xticks([])
    ax.set_yticks([])
    if colorbar:
        fig.colorbar(im, ax=ax, fraction=0.046)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_loss_curve(path, losses, window=50):
    losses = np.asarray(losses, dtype=np.float64)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(losses, alpha=0.35, linewidth=0.8, label="per step")
    if losses.size >= window:
        kernel = np.ones(window) / window
        smooth = np.convolve(losses, kernel, mode="valid")
        ax.plot(np.arange(smooth.size) + window - 1, smooth, linewidth=1.5,
                label=f"{window}-step mean")
    ax.set_xlabel("step")
    ax.set_ylabel("loss")
    ax.set_yscale("log")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_image_row(path, images, titles=None):
    """Contact sheet of CHW images in [-1, 1]."""
    n = len(images)
    fig, axes = plt.subplots(1, n, figsize=(2.2 * n, 2.4))
    if n == 1:
        axes = [axes]
    for i, (ax, img) in enumerate(zip(axes, images)):
        unit = np.clip((np.asarray(img) + 1.0) / 2.0, 0.0, 1.0)
        if unit.shape[0] == 1:
            ax.imshow(unit[0], cmap="gray", vmin=0, vmax=1)
        else:
            ax.imshow(np.moveaxis(unit, 0, -1))
        if titles:
            ax.set_title(titles[i], fontsize=9)
        ax.set_xticks([])
        ax.set_yticks([])
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
