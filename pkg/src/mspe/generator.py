"""Toy multi-scale synthesis stack and the diffusion denoiser network.

Three architecture modes share one forward path:

* baseline -- a learnable constant tensor seeds the coarsest scale; position
  is implicit (constant + padding).
* ss-pe    -- the constant is replaced by the coarsest explicit embedding.
* ms-pe    -- additionally, each scale adds its own embedding scaled by a
  learnable gamma, so every location is explicitly coded at every scale.

Each scale applies: upsample (above the coarsest), 3x3 convolution, latent-
derived channel bias, optional noise map, leaky ReLU, then the ms-pe
injection. A 1x1 convolution maps the finest features to image channels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import pe
from .nn import (
    ConvParams,
    add_channel_bias,
    add_scaled_pe,
    broadcast_batch,
    conv2d,
    conv_params,
    linear,
    upsample2x_blur,
)
from .nn import resize_bilinear
from .optim import adam_step_from_grads, init_adam
from .rng import gaussian, make_rng
from .tensor import Tensor, add, add_const, backward, leaky_relu, mse_loss, no_grad

BASELINE = "baseline"
SS_PE = "ss-pe"
MS_PE = "ms-pe"
MODES = (BASELINE, SS_PE, MS_PE)

LEAKY_SLOPE = 0.2


@dataclass
class GeneratorSpec:
    """Architecture mode plus every learnable parameter of the stack."""

    mode: str
    L: int
    base_h: int
    base_w: int
    channels: list[int]
    img_channels: int
    latent_dim: int
    padding_mode: str
    noise_injection: bool
    convs: list[ConvParams]
    to_img: ConvParams
    latent_proj: list[Tensor]
    gammas: list[Tensor] | None = None  # ms-pe only
    const: Tensor | None = None  # baseline only

    @property
    def out_h(self) -> int:
        return self.base_h * 2 ** (self.L - 1)

    @property
    def out_w(self) -> int:
        return self.base_w * 2 ** (self.L - 1)

    def parameters(self) -> list[Tensor]:
        params = []
        for p in self.convs + [self.to_img]:
            params += [p.weights, p.bias]
        params += self.latent_proj
        if self.gammas is not None:
            params += self.gammas
        if self.const is not None:
            params.append(self.const)
        return params

    def state_dict(self) -> dict[str, np.ndarray]:
        out = {}
        for l, p in enumerate(self.convs):
            out[f"conv{l}.weights"] = p.weights.data
            out[f"conv{l}.bias"] = p.bias.data
        out["to_img.weights"] = self.to_img.weights.data
        out["to_img.bias"] = self.to_img.bias.data
        for l, w in enumerate(self.latent_proj):
            out[f"latent_proj{l}"] = w.data
        if self.gammas is not None:
            for l, g in enumerate(self.gammas):
                out[f"gamma{l}"] = g.data
        if self.const is not None:
            out["const"] = self.const.data
        return out

    def load_state_dict(self, arrays: dict[str, np.ndarray]):
        for name, tensor in self._named_tensors():
            src = np.asarray(arrays[name], dtype=np.float32)
            if src.shape != tensor.data.shape:
                raise ValueError(
                    f"{name}: checkpoint shape {src.shape} != model {tensor.data.shape}"
                )
            tensor.data = src.copy()

    def _named_tensors(self):
        for l, p in enumerate(self.convs):
            yield f"conv{l}.weights", p.weights
            yield f"conv{l}.bias", p.bias
        yield "to_img.weights", self.to_img.weights
        yield "to_img.bias", self.to_img.bias
        for l, w in enumerate(self.latent_proj):
            yield f"latent_proj{l}", w
        if self.gammas is not None:
            for l, g in enumerate(self.gammas):
                yield f"gamma{l}", g
        if self.const is not None:
            yield "const", self.const

    def meta(self) -> dict:
        return {
            "mode": self.mode,
            "L": self.L,
            "base_h": self.base_h,
            "base_w": self.base_w,
            "channels": list(self.channels),
            "img_channels": self.img_channels,
            "latent_dim": self.latent_dim,
            "padding_mode": self.padding_mode,
            "noise_injection": self.noise_injection,
        }


def build_generator(
    mode: str,
    L: int = 5,
    base_h: int = 4,
    base_w: int = 4,
    channels=32,
    img_channels: int = 3,
    latent_dim: int = 8,
    padding_mode: str = "zero",
    noise_injection: bool = True,
    seed: int = 0,
) -> GeneratorSpec:
    """Fresh stack with seeded He-initialised weights; gamma starts at 1 so
    explicit positional information is active from the first step."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}, expected one of {MODES}")
    if isinstance(channels, int):
        channels = [channels] * L
    if len(channels) != L:
        raise ValueError(f"expected {L} channel counts, got {len(channels)}")
    for c in channels:
        if c % 4 != 0:
            raise ValueError(f"channel counts must be multiples of 4, got {c}")
    rng = make_rng(seed, stream=100)
    convs = []
    for l in range(L):
        cin = channels[0] if l == 0 else channels[l - 1]
        convs.append(conv_params(cin, channels[l], 3, rng, padding_mode))
    to_img = conv_params(channels[-1], img_channels, 1, rng, padding_mode, gain=1.0)
    latent_proj = [
        Tensor(rng.normal(0.0, 1.0 / np.sqrt(latent_dim), size=(channels[l], latent_dim)),
               requires_grad=True)
        for l in range(L)
    ]
    gammas = [Tensor(1.0, requires_grad=True) for _ in range(L)] if mode == MS_PE else None
    const = None
    if mode == BASELINE:
        const = Tensor(rng.normal(0.0, 1.0, size=(channels[0], base_h, base_w)),
                       requires_grad=True)
    return GeneratorSpec(
        mode=mode,
        L=L,
        base_h=base_h,
        base_w=base_w,
        channels=channels,
        img_channels=img_channels,
        latent_dim=latent_dim,
        padding_mode=padding_mode,
        noise_injection=noise_injection,
        convs=convs,
        to_img=to_img,
        latent_proj=latent_proj,
        gammas=gammas,
        const=const,
    )


def build_generator_pyramid(spec: GeneratorSpec) -> pe.PEPyramid:
    """Default embedding pyramid matched to the stack's per-scale shapes."""
    return pe.build_pyramid(spec.L, spec.base_h, spec.base_w, spec.channels)


@dataclass
class SynthInputs:
    """Per-scale latents, optional per-scale noise maps, and the embedding
    pyramid (none for the baseline)."""

    latents: list[np.ndarray]
    noises: list[np.ndarray] | None = None
    pyramid: pe.PEPyramid | None = None

    @property
    def batch(self) -> int:
        return self.latents[0].shape[0]


def make_inputs(
    spec: GeneratorSpec,
    n: int = 1,
    seed: int = 0,
    pyramid: pe.PEPyramid | None = None,
    latents: list[np.ndarray] | None = None,
    noise_seed: int | None = None,
) -> SynthInputs:
    """Draw seeded latents and noise maps shaped for the stack's native
    geometry. noise_seed separates the noise stream so probes can resample
    noise while holding latents fixed."""
    rng = make_rng(seed, stream=1)
    if latents is None:
        latents = [gaussian(rng, (n, spec.latent_dim)) for _ in range(spec.L)]
    noises = None
    if spec.noise_injection:
        nrng = make_rng(seed if noise_seed is None else noise_seed, stream=2)
        noises = [
            gaussian(nrng, (n, 1, spec.base_h * 2**l, spec.base_w * 2**l))
            for l in range(spec.L)
        ]
    if pyramid is None and spec.mode != BASELINE:
        pyramid = build_generator_pyramid(spec)
    return SynthInputs(latents=latents, noises=noises, pyramid=pyramid)


def _seed_features(spec: GeneratorSpec, inputs: SynthInputs) -> Tensor:
    n = inputs.batch
    if spec.mode == BASELINE:
        return broadcast_batch(spec.const, n)
    if inputs.pyramid is None:
        raise ValueError(f"{spec.mode} generation requires an embedding pyramid")
    seed_grid = inputs.pyramid.levels[0]
    if seed_grid.C != spec.channels[0]:
        raise ValueError(
            f"coarsest embedding has {seed_grid.C} channels, stack expects {spec.channels[0]}"
        )
    return Tensor(np.repeat(seed_grid.data[None], n, axis=0))


def synth_forward(spec: GeneratorSpec, inputs: SynthInputs) -> Tensor:
    """Run the stack; feature sizes follow the pyramid (or the native
    geometry for the baseline), so resized/tiled/extended pyramids produce
    correspondingly sized images."""
    if len(inputs.latents) != spec.L:
        raise ValueError(f"need {spec.L} per-scale latents, got {len(inputs.latents)}")
    if spec.mode == MS_PE and (inputs.pyramid is None or inputs.pyramid.L != spec.L):
        have = 0 if inputs.pyramid is None else inputs.pyramid.L
        raise ValueError(f"ms-pe needs a {spec.L}-level pyramid, got {have} levels")
    h = _seed_features(spec, inputs)
    for l in range(spec.L):
        x = h if l == 0 else upsample2x_blur(h, spec.padding_mode)
        y = conv2d(x, spec.convs[l])
        y = add_channel_bias(y, linear(Tensor(inputs.latents[l]), spec.latent_proj[l]))
        if spec.noise_injection and inputs.noises is not None:
            eps = inputs.noises[l]
            if eps.shape[2:] != y.data.shape[2:]:
                raise ValueError(
                    f"noise map {eps.shape} does not match features {y.data.shape} at scale {l + 1}"
                )
            y = add_const(y, eps)
        y = leaky_relu(y, LEAKY_SLOPE)
        if spec.mode == MS_PE:
            level = inputs.pyramid.levels[l]
            if level.data.shape[1:] != y.data.shape[2:]:
                raise ValueError(
                    f"pyramid level {l} is {level.data.shape[1:]}, features are {y.data.shape[2:]}"
                )
            y = add_scaled_pe(y, spec.gammas[l], level)
        h = y
    return conv2d(h, spec.to_img)


def shifted_generate(
    spec: GeneratorSpec, inputs: SynthInputs, dh: float, dw: float, mode: str = "circular"
) -> Tensor:
    """Generate at coordinates translated by (dh, dw) image pixels by
    shifting every pyramid level per the dyadic rule."""
    if spec.mode != MS_PE:
        raise ValueError(f"shifted_generate requires ms-pe, got {spec.mode}")
    shifted = pe.shift_pyramid(inputs.pyramid, dh, dw, mode)
    moved = SynthInputs(latents=inputs.latents, noises=inputs.noises, pyramid=shifted)
    return synth_forward(spec, moved)


def multiscale_generate(
    spec: GeneratorSpec, inputs: SynthInputs, H2: int, W2: int,
    noises: list[np.ndarray] | None = None, noise_seed: int | None = None,
) -> Tensor:
    """Generate at a different output resolution by resizing every pyramid
    level proportionally; the target must stay on the dyadic ladder."""
    if spec.mode not in (SS_PE, MS_PE):
        raise ValueError(f"multiscale generation requires explicit embeddings, got {spec.mode}")
    step = 2 ** (spec.L - 1)
    if H2 % step or W2 % step:
        raise ValueError(f"target {H2}x{W2} not divisible by the dyadic factor {step}")
    if (H2, W2) == (spec.out_h, spec.out_w):
        return synth_forward(spec, inputs)
    levels = tuple(
        pe.resize_grid(g, (H2 // step) * 2**l, (W2 // step) * 2**l)
        for l, g in enumerate(inputs.pyramid.levels)
    )
    pyramid = pe.PEPyramid(levels=levels, dyadic_factor=inputs.pyramid.dyadic_factor)
    if noises is None and spec.noise_injection:
        nrng = make_rng(0 if noise_seed is None else noise_seed, stream=3)
        noises = [
            gaussian(nrng, (inputs.batch, 1, g.H, g.W)) for g in levels
        ]
    resized = SynthInputs(latents=inputs.latents, noises=noises, pyramid=pyramid)
    return synth_forward(spec, resized)


@dataclass
class ExpandPlan:
    """Tile segments and/or extension margins, in image-scale coordinates."""

    h_segments: list[tuple[float, float]] | None = None
    w_segments: list[tuple[float, float]] | None = None
    margin_h: float = 0.0
    margin_w: float = 0.0

    @property
    def is_identity(self) -> bool:
        return (
            self.h_segments is None
            and self.w_segments is None
            and self.margin_h == 0.0
            and self.margin_w == 0.0
        )


def expand_pyramid(pyramid: pe.PEPyramid, plan: ExpandPlan) -> pe.PEPyramid:
    """Apply a tile/extend plan to every level, scaled by 2^(l-L); level
    sizes must keep doubling or the plan is rejected as inconsistent."""
    if plan.is_identity:
        return pyramid
    tiling = plan.h_segments is not None or plan.w_segments is not None
    extending = plan.margin_h > 0 or plan.margin_w > 0
    if tiling and extending:
        raise ValueError("plan mixes tiling and extension; apply one at a time")
    L = pyramid.L
    levels = []
    for idx, grid in enumerate(pyramid.levels):
        factor = 2.0 ** (idx + 1 - L)
        if tiling:
            hseg = _scaled_segments(plan.h_segments, factor)
            wseg = _scaled_segments(plan.w_segments, factor)
            levels.append(pe.tile_grid(grid, hseg, wseg))
        else:
            levels.append(pe.extend_grid(grid, plan.margin_h * factor, plan.margin_w * factor))
    for prev, cur in zip(levels, levels[1:]):
        if cur.H != 2 * prev.H or cur.W != 2 * prev.W:
            raise ValueError(
                "plan does not scale consistently across levels: "
                f"{prev.H}x{prev.W} then {cur.H}x{cur.W}"
            )
    return pe.PEPyramid(levels=tuple(levels), dyadic_factor=pyramid.dyadic_factor)


def _scaled_segments(segments, factor):
    if segments is None:
        return None
    return [(a * factor, b * factor) for a, b in segments]


def expanded_generate(
    spec: GeneratorSpec,
    inputs: SynthInputs,
    plan: ExpandPlan,
    noises: list[np.ndarray] | None = None,
    noise_seed: int | None = None,
) -> Tensor:
    """Generate over a tiled or extended coordinate grid."""
    if spec.mode != MS_PE:
        raise ValueError(f"expanded generation requires ms-pe, got {spec.mode}")
    if plan.is_identity:
        return synth_forward(spec, inputs)
    pyramid = expand_pyramid(inputs.pyramid, plan)
    if noises is None and spec.noise_injection:
        nrng = make_rng(0 if noise_seed is None else noise_seed, stream=4)
        noises = [gaussian(nrng, (inputs.batch, 1, g.H, g.W)) for g in pyramid.levels]
    grown = SynthInputs(latents=inputs.latents, noises=noises, pyramid=pyramid)
    return synth_forward(spec, grown)


def noise_std_probe(
    spec: GeneratorSpec,
    inputs: SynthInputs,
    n_instances: int,
    seed: int = 0,
    seeds=None,
) -> np.ndarray:
    """Per-pixel standard deviation of the output over resampled noise maps,
    holding latents and embeddings fixed; channels are averaged so the map
    is (H, W). Fixed generators give a zero map when noise is off."""
    if n_instances < 2:
        raise ValueError(f"need at least 2 instances, got {n_instances}")
    if seeds is None:
        seeds = [seed + i for i in range(n_instances)]
    if len(seeds) != n_instances:
        raise ValueError(f"expected {n_instances} seeds, got {len(seeds)}")
    stack = []
    for s in seeds:
        if spec.noise_injection:
            nrng = make_rng(s, stream=5)
            sizes = (
                [(g.H, g.W) for g in inputs.pyramid.levels]
                if inputs.pyramid is not None
                else [(spec.base_h * 2**l, spec.base_w * 2**l) for l in range(spec.L)]
            )
            noises = [gaussian(nrng, (inputs.batch, 1, h, w)) for h, w in sizes]
        else:
            noises = inputs.noises
        trial = SynthInputs(latents=inputs.latents, noises=noises, pyramid=inputs.pyramid)
        with no_grad():
            stack.append(synth_forward(spec, trial).data)
    arr = np.stack(stack).astype(np.float64)  # (n, N, C, H, W)
    return arr.std(axis=0).mean(axis=(0, 1))


# --------------------------------------------------------------------------
# Denoiser: small two-stage encoder/decoder with additive skips, sinusoidal
# timestep embedding per block, and optional per-site gamma-scaled spatial
# embeddings (after each downscaling block and each upsampling block).
# --------------------------------------------------------------------------

_INJECTION_SITES = 4  # down x2, up x2


@dataclass
class DenoiserSpec:
    size: int
    in_channels: int
    width: int
    time_dim: int
    T: int
    padding_mode: str
    use_pe: bool
    conv_in: ConvParams
    conv_d1: ConvParams
    conv_d2: ConvParams
    conv_mid: ConvParams
    conv_u1: ConvParams
    conv_u2: ConvParams
    conv_out: ConvParams
    time_proj: list[Tensor] = field(default_factory=list)
    gammas: list[Tensor] = field(default_factory=list)

    def parameters(self) -> list[Tensor]:
        params = []
        for p in self._convs():
            params += [p.weights, p.bias]
        params += self.time_proj
        params += self.gammas
        return params

    def _convs(self):
        return [
            self.conv_in, self.conv_d1, self.conv_d2, self.conv_mid,
            self.conv_u1, self.conv_u2, self.conv_out,
        ]

    def state_dict(self) -> dict[str, np.ndarray]:
        names = ["in", "d1", "d2", "mid", "u1", "u2", "out"]
        out = {}
        for name, p in zip(names, self._convs()):
            out[f"conv_{name}.weights"] = p.weights.data
            out[f"conv_{name}.bias"] = p.bias.data
        for i, w in enumerate(self.time_proj):
            out[f"time_proj{i}"] = w.data
        for i, g in enumerate(self.gammas):
            out[f"gamma{i}"] = g.data
        return out

    def load_state_dict(self, arrays: dict[str, np.ndarray]):
        names = ["in", "d1", "d2", "mid", "u1", "u2", "out"]
        tensors = {}
        for name, p in zip(names, self._convs()):
            tensors[f"conv_{name}.weights"] = p.weights
            tensors[f"conv_{name}.bias"] = p.bias
        for i, w in enumerate(self.time_proj):
            tensors[f"time_proj{i}"] = w
        for i, g in enumerate(self.gammas):
            tensors[f"gamma{i}"] = g
        for name, tensor in tensors.items():
            src = np.asarray(arrays[name], dtype=np.float32)
            if src.shape != tensor.data.shape:
                raise ValueError(
                    f"{name}: checkpoint shape {src.shape} != model {tensor.data.shape}"
                )
            tensor.data = src.copy()

    def meta(self) -> dict:
        return {
            "size": self.size,
            "in_channels": self.in_channels,
            "width": self.width,
            "time_dim": self.time_dim,
            "T": self.T,
            "padding_mode": self.padding_mode,
            "use_pe": self.use_pe,
        }


def build_denoiser(
    size: int = 32,
    in_channels: int = 1,
    width: int = 32,
    time_dim: int = 16,
    T: int = 200,
    padding_mode: str = "zero",
    use_pe: bool = True,
    seed: int = 0,
) -> DenoiserSpec:
    if size % 4 != 0:
        raise ValueError(f"size must be divisible by 4, got {size}")
    if width % 4 != 0:
        raise ValueError(f"width must be a multiple of 4, got {width}")
    rng = make_rng(seed, stream=200)
    mk = lambda cin, cout, stride=1: conv_params(cin, cout, 3, rng, padding_mode, stride)
    spec = DenoiserSpec(
        size=size,
        in_channels=in_channels,
        width=width,
        time_dim=time_dim,
        T=T,
        padding_mode=padding_mode,
        use_pe=use_pe,
        conv_in=mk(in_channels, width),
        conv_d1=mk(width, width, stride=2),
        conv_d2=mk(width, width, stride=2),
        conv_mid=mk(width, width),
        conv_u1=mk(width, width),
        conv_u2=mk(width, width),
        conv_out=mk(width, in_channels),
        time_proj=[
            Tensor(rng.normal(0.0, 1.0 / np.sqrt(time_dim), size=(width, time_dim)),
                   requires_grad=True)
            for _ in range(6)
        ],
        gammas=[Tensor(1.0, requires_grad=True) for _ in range(_INJECTION_SITES)]
        if use_pe
        else [],
    )
    return spec


def build_denoiser_pyramid(dn: DenoiserSpec) -> pe.PEPyramid:
    """Three-level pyramid covering the denoiser's resolutions."""
    return pe.build_pyramid(3, dn.size // 4, dn.size // 4, dn.width)


def _timestep_embedding(t, time_dim: int, n: int) -> np.ndarray:
    ts = np.broadcast_to(np.asarray(t, dtype=np.float64).reshape(-1), (n,))
    return pe._encode_coords(ts, time_dim // 2).astype(np.float32)


def denoiser_forward(dn: DenoiserSpec, x_t: Tensor, t, pyramid: pe.PEPyramid | None) -> Tensor:
    """Predict the noise content of x_t at timestep t (scalar or per-sample).

    The pe variant adds gamma-scaled spatial embeddings after both
    downscaling blocks and both upsampling blocks; pass a shifted pyramid to
    request denoising in translated coordinates.
    """
    n, c, H, W = x_t.data.shape
    ts = np.asarray(t).reshape(-1)
    if np.any(ts < 1) or np.any(ts > dn.T):
        raise ValueError(f"timestep outside 1..{dn.T}")
    if c != dn.in_channels:
        raise ValueError(f"expected {dn.in_channels} input channels, got {c}")
    if dn.use_pe:
        if pyramid is None or pyramid.L != 3:
            raise ValueError("pe denoiser needs a 3-level pyramid")
        if pyramid.levels[2].data.shape[1:] != (H, W):
            raise ValueError(
                f"pyramid finest level {pyramid.levels[2].data.shape[1:]} != input {H}x{W}"
            )
    temb = Tensor(_timestep_embedding(t, dn.time_dim, n))
    tb = lambda i: linear(temb, dn.time_proj[i])
    inject = (
        (lambda h, site, lvl: add_scaled_pe(h, dn.gammas[site], pyramid.levels[lvl]))
        if dn.use_pe
        else (lambda h, site, lvl: h)
    )

    h0 = leaky_relu(add_channel_bias(conv2d(x_t, dn.conv_in), tb(0)), LEAKY_SLOPE)
    d1 = leaky_relu(add_channel_bias(conv2d(h0, dn.conv_d1), tb(1)), LEAKY_SLOPE)
    d1 = inject(d1, 0, 1)
    d2 = leaky_relu(add_channel_bias(conv2d(d1, dn.conv_d2), tb(2)), LEAKY_SLOPE)
    d2 = inject(d2, 1, 0)
    m = leaky_relu(add_channel_bias(conv2d(d2, dn.conv_mid), tb(3)), LEAKY_SLOPE)
    u1 = leaky_relu(
        add_channel_bias(conv2d(upsample2x_blur(m, dn.padding_mode), dn.conv_u1), tb(4)),
        LEAKY_SLOPE,
    )
    u1 = add(u1, d1)
    u1 = inject(u1, 2, 1)
    u2 = leaky_relu(
        add_channel_bias(conv2d(upsample2x_blur(u1, dn.padding_mode), dn.conv_u2), tb(5)),
        LEAKY_SLOPE,
    )
    u2 = add(u2, h0)
    u2 = inject(u2, 3, 2)
    return conv2d(u2, dn.conv_out)


# --------------------------------------------------------------------------
# Decoder-style trainer. Each target image gets its class latent plus its
# own fixed per-scale noise maps, so the noise input is the only signal that
# distinguishes same-class targets: the stack must learn to decode stochastic
# detail from epsilon exactly where its positional information is too weak to
# carry it. This keeps the toy stack non-adversarial while preserving the
# roles of the three input types.
# --------------------------------------------------------------------------


def class_latents(n_classes: int, latent_dim: int, seed: int = 0) -> np.ndarray:
    """Fixed per-class latent table (not learned)."""
    return gaussian(make_rng(seed, stream=6), (n_classes, latent_dim))


def sample_noise_table(spec: GeneratorSpec, n: int, seed: int = 0) -> list[np.ndarray]:
    """Per-sample fixed noise maps, one (n, 1, H_l, W_l) array per scale."""
    rng = make_rng(seed, stream=8)
    return [
        gaussian(rng, (n, 1, spec.base_h * 2**l, spec.base_w * 2**l))
        for l in range(spec.L)
    ]


def train_decoder(
    spec: GeneratorSpec,
    targets: np.ndarray,
    steps: int,
    lr: float = 5e-3,
    seed: int = 0,
    batch: int | None = None,
    labels: np.ndarray | None = None,
    resize_sizes=None,
) -> list[float]:
    """Fit the stack to reproduce `targets` (N, C, H, W); returns the
    per-step loss trace.

    Latents are shared within a label class; the per-sample noise maps are
    fixed for the whole run. With resize_sizes, each step samples an output
    resolution uniformly from the list, generates there via proportionally
    resized embeddings (fresh noise at the resized shapes), and resizes the
    output back to the native size for the loss; the baseline has no
    embeddings to resize.
    """
    targets = np.asarray(targets, dtype=np.float32)
    n = targets.shape[0]
    if targets.shape[2:] != (spec.out_h, spec.out_w):
        raise ValueError(
            f"targets are {targets.shape[2:]}, stack renders {spec.out_h}x{spec.out_w}"
        )
    if resize_sizes is not None and spec.mode == BASELINE:
        raise ValueError("random resizing needs explicit embeddings")
    labels = np.arange(n) if labels is None else np.asarray(labels)
    if labels.shape != (n,):
        raise ValueError(f"labels shape {labels.shape} does not match {n} targets")
    latent_table = class_latents(int(labels.max()) + 1, spec.latent_dim, seed)
    noise_table = sample_noise_table(spec, n, seed) if spec.noise_injection else None
    pyramid = None if spec.mode == BASELINE else build_generator_pyramid(spec)
    rng = make_rng(seed, stream=7)
    params = spec.parameters()
    state = init_adam(params)
    losses = []
    batch = n if batch is None else min(batch, n)
    for _ in range(steps):
        idx = np.arange(n) if batch == n else rng.integers(0, n, size=batch)
        latents = [latent_table[labels[idx]]] * spec.L
        size = None
        if resize_sizes is not None:
            size = resize_sizes[rng.integers(0, len(resize_sizes))]
        if size is None or size == (spec.out_h, spec.out_w):
            noises = None
            if noise_table is not None:
                noises = [maps[idx] for maps in noise_table]
            inputs = SynthInputs(latents=latents, noises=noises, pyramid=pyramid)
            img = synth_forward(spec, inputs)
        else:
            h2, w2 = size
            step_factor = 2 ** (spec.L - 1)
            level_sizes = [
                (h2 // step_factor * 2**l, w2 // step_factor * 2**l) for l in range(spec.L)
            ]
            noises = None
            if spec.noise_injection:
                noises = [gaussian(rng, (len(idx), 1, h, w)) for h, w in level_sizes]
            inputs = SynthInputs(latents=latents, noises=None, pyramid=pyramid)
            img = multiscale_generate(spec, inputs, h2, w2, noises=noises)
            img = resize_bilinear(img, spec.out_h, spec.out_w)
        loss = mse_loss(img, Tensor(targets[idx]))
        backward(loss)
        adam_step_from_grads(params, state, lr)
        for p in params:
            p.zero_grad()
        losses.append(float(loss.data))
    return losses
