"""Command-line front end.

Verbs: build-pe, build-dataset, train, generate, reconstruct, report,
verify. Exit codes: 0 success, 2 usage error, 3 data/format error,
4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

import numpy as np

from . import checkpoint as ck
from . import config as cfgmod
from . import dataset as ds
from . import diffusion as D
from . import generator as G
from . import imageio as io
from . import metrics as M
from . import pe
from .errors import DataFormatError, NumericError
from .rng import make_rng


def _limit_threads():
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(1)
    except ImportError:
        os.environ.setdefault("OMP_NUM_THREADS", "1")


def _parse_pair(text, kind=float):
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != 2:
        raise ValueError(f"expected 'a,b', got {text!r}")
    return kind(parts[0]), kind(parts[1])


def _parse_segments(text):
    segments = []
    for part in text.split(","):
        if not part.strip():
            continue
        lo, hi = part.split(":")
        segments.append((float(lo), float(hi)))
    if not segments:
        raise ValueError(f"no segments in {text!r}")
    return segments


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{v:.9g}" if isinstance(v, float) else v for v in row])


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _resolve(args, **overrides) -> cfgmod.RunConfig:
    flag_overrides = {
        key: getattr(args, key)
        for key in cfgmod.RunConfig.__dataclass_fields__
        if hasattr(args, key)
    }
    flag_overrides.update(overrides)
    return cfgmod.resolve_config(getattr(args, "config", None), flag_overrides)


# ----------------------------------------------------------------- build-pe


def cmd_build_pe(args) -> int:
    out = _outdir(args)
    if args.channels % 4 != 0:
        raise ValueError(
            f"--channels must be divisible by 4 (got {args.channels}): the embedding "
            "concatenates sin/cos pairs for two axes"
        )
    arrays, kinds = {}, {}
    if args.levels > 1:
        pyramid = pe.build_pyramid(args.levels, args.height, args.width, args.channels)
        if args.shift:
            dh, dw = _parse_pair(args.shift)
            pyramid = pe.shift_pyramid(pyramid, dh, dw)
        for l, grid in enumerate(pyramid.levels):
            arrays[f"level{l}.data"] = grid.data
            arrays[f"level{l}.row_coords"] = grid.row_coords
            arrays[f"level{l}.col_coords"] = grid.col_coords
            kinds[f"level{l}.data"] = "pe-grid"
        finest = pyramid.levels[-1]
    else:
        grid = pe.build_grid(args.height, args.width, args.channels)
        if args.shift:
            dh, dw = _parse_pair(args.shift)
            grid = pe.shift_grid(grid, dh, dw)
        if args.resize:
            h2, w2 = _parse_pair(args.resize, int)
            grid = pe.resize_grid(grid, h2, w2)
        if args.tile_w:
            grid = pe.tile_grid(grid, w_segments=_parse_segments(args.tile_w))
        if args.extend:
            mh, mw = _parse_pair(args.extend)
            grid = pe.extend_grid(grid, mh, mw)
        arrays["grid.data"] = grid.data
        arrays["grid.row_coords"] = grid.row_coords
        arrays["grid.col_coords"] = grid.col_coords
        kinds["grid.data"] = "pe-grid"
        finest = grid
    flags = {
        k: v for k, v in vars(args).items()
        if k not in ("handler", "command") and not callable(v)
    }
    ck.save_checkpoint(out / "pe.mspe", arrays, kinds=kinds,
                       config={"command": "build-pe", **flags})
    io.write_grid_heatmaps(str(out / "pe"), finest, channels=range(min(args.heatmaps, finest.C)))
    print(f"wrote {out / 'pe.mspe'} ({len(arrays)} arrays) and {min(args.heatmaps, finest.C)} heatmaps")
    return 0


# ------------------------------------------------------------ build-dataset


def _load_idx_dataset(cfg: cfgmod.RunConfig) -> ds.BiasedCanvasSet:
    base = os.environ.get("MSPE_DATA_DIR", "")
    img_path = Path(cfg.idx_images)
    lbl_path = Path(cfg.idx_labels)
    if base and not img_path.is_absolute():
        img_path = Path(base) / img_path
    if base and not lbl_path.is_absolute():
        lbl_path = Path(base) / lbl_path
    digits = ds.parse_idx(img_path.read_bytes())
    labels = ds.parse_idx(lbl_path.read_bytes())
    if digits.ndim != 3:
        raise DataFormatError(f"{img_path} holds labels, expected images")
    n = min(cfg.n_samples, digits.shape[0])
    channels = 3 if cfg.color else 1
    images = np.empty((n, channels, cfg.canvas, cfg.canvas), dtype=np.float32)
    offset = (cfg.offset_h, cfg.offset_w)
    for i in range(n):
        intensity = ds.make_biased_canvas(
            digits[i].astype(np.float32) / 255.0, cfg.canvas, cfg.patch, offset
        )
        images[i] = (
            ds.colorize(intensity, int(labels[i])) if cfg.color else ds.to_signed(intensity)
        )
    placement = np.tile(np.asarray(offset, dtype=np.int64), (n, 1))
    return ds.BiasedCanvasSet(
        images=images, labels=labels[:n].astype(np.int64), placement=placement, patch=cfg.patch
    )


def build_dataset_from_config(cfg: cfgmod.RunConfig) -> ds.BiasedCanvasSet:
    if cfg.source == "idx":
        return _load_idx_dataset(cfg)
    return ds.synth_glyphs(
        cfg.n_samples,
        seed=cfg.seed,
        canvas=cfg.canvas,
        patch=cfg.patch,
        offset=(cfg.offset_h, cfg.offset_w),
        color=cfg.color,
    )


def cmd_build_dataset(args) -> int:
    cfg = _resolve(args)
    out = _outdir(args)
    batch = build_dataset_from_config(cfg).validate()
    arrays = {
        "images": batch.images,
        "labels": batch.labels.astype(np.float32),
        "placement": batch.placement.astype(np.float32),
    }
    kinds = {"images": "dataset", "labels": "dataset", "placement": "dataset"}
    ck.save_checkpoint(out / "dataset.mspe", arrays, kinds=kinds, config=cfg.to_dict())
    cfgmod.write_config_echo(out / "config.txt", cfg)
    for i in range(min(8, batch.images.shape[0])):
        io.write_image(out / f"sample_{i:03d}.{'ppm' if cfg.color else 'pgm'}", batch.images[i])
    print(f"wrote {out / 'dataset.mspe'}: {batch.images.shape[0]} images "
          f"({'color' if cfg.color else 'gray'}, canvas {cfg.canvas}, patch {cfg.patch})")
    return 0


def load_dataset_container(path) -> ds.BiasedCanvasSet:
    arrays, kinds, config = ck.load_checkpoint(path)
    if "images" not in arrays or "labels" not in arrays:
        raise DataFormatError(f"{path} is not a dataset container")
    return ds.BiasedCanvasSet(
        images=arrays["images"],
        labels=arrays["labels"].astype(np.int64),
        placement=arrays["placement"].astype(np.int64),
        patch=int(config.get("patch", arrays["images"].shape[-1] // 2)),
    )


# ----------------------------------------------------------------- train


def _diffusion_dataset(cfg: cfgmod.RunConfig) -> np.ndarray:
    """Diffusion trains on canvases matching the denoiser input size."""
    offset = (cfg.offset_h, cfg.offset_w)
    batch = ds.synth_glyphs(
        cfg.n_samples, seed=cfg.seed, canvas=cfg.size, patch=cfg.size // 2,
        offset=offset, color=cfg.color,
    )
    return batch.images


def train_from_config(cfg: cfgmod.RunConfig):
    """Train per config; returns (state arrays, kinds, losses)."""
    if cfg.model == "diffusion":
        dn = G.build_denoiser(
            size=cfg.size,
            in_channels=3 if cfg.color else 1,
            width=cfg.width,
            time_dim=cfg.time_dim,
            T=cfg.timesteps,
            padding_mode=cfg.padding_mode,
            use_pe=cfg.mode == "ms-pe",
            seed=cfg.seed,
        )
        sched = D.make_beta_schedule(cfg.timesteps, cfg.beta_start, cfg.beta_end)
        images = _diffusion_dataset(cfg)
        losses = D.train_denoiser(
            dn, images, sched, steps=cfg.steps, lr=cfg.lr, batch=cfg.batch, seed=cfg.seed
        )
        return dn.state_dict(), {name: "denoiser" for name in dn.state_dict()}, losses
    spec = G.build_generator(
        cfg.mode,
        L=cfg.levels,
        base_h=cfg.base_h,
        base_w=cfg.base_w,
        channels=cfg.channels,
        img_channels=3 if cfg.color else 1,
        latent_dim=cfg.latent_dim,
        padding_mode=cfg.padding_mode,
        noise_injection=cfg.noise_injection,
        seed=cfg.seed,
    )
    if spec.out_h != cfg.canvas:
        raise ValueError(
            f"stack renders {spec.out_h}px but canvas is {cfg.canvas}px; "
            "set levels/base to match"
        )
    corpus = ds.synth_glyphs(
        cfg.n_samples, seed=cfg.seed, canvas=cfg.canvas, patch=cfg.patch,
        offset=(cfg.offset_h, cfg.offset_w), color=cfg.color,
    )
    sizes = None
    if cfg.resize_sizes:
        sizes = [(s, s) for s in cfg.resize_sizes]
    losses = G.train_decoder(
        spec, corpus.images, steps=cfg.steps, lr=cfg.lr, seed=cfg.seed,
        batch=cfg.batch, labels=corpus.labels, resize_sizes=sizes,
    )
    return spec.state_dict(), {name: "generator" for name in spec.state_dict()}, losses


def cmd_train(args) -> int:
    if args.deterministic:
        _limit_threads()
    cfg = _resolve(args)
    out = _outdir(args)
    arrays, kinds, losses = train_from_config(cfg)
    if losses and not np.all(np.isfinite(losses)):
        raise NumericError("training produced a non-finite loss")
    ck.save_checkpoint(out / "model.mspe", arrays, kinds=kinds, config=cfg.to_dict())
    _write_csv(out / "loss.csv", ["step", "loss"],
               [(i, float(v)) for i, v in enumerate(losses)])
    if losses:
        from . import plots

        plots.save_loss_curve(out / "loss.png", losses)
    cfgmod.write_config_echo(out / "config.txt", cfg)
    last = float(np.mean(losses[-50:])) if losses else float("nan")
    print(f"trained {cfg.model}/{cfg.mode} for {cfg.steps} steps; "
          f"final loss {last:.5f}; wrote {out / 'model.mspe'}")
    return 0


# ------------------------------------------------------------- model reload


def load_model(path):
    """Rebuild a generator or denoiser from its checkpoint; returns
    (kind, model, cfg)."""
    arrays, kinds, config = ck.load_checkpoint(path)
    cfg = cfgmod.RunConfig(**config)
    kind = next(iter(kinds.values()), "")
    if kind == "denoiser":
        dn = G.build_denoiser(
            size=cfg.size,
            in_channels=3 if cfg.color else 1,
            width=cfg.width,
            time_dim=cfg.time_dim,
            T=cfg.timesteps,
            padding_mode=cfg.padding_mode,
            use_pe=cfg.mode == "ms-pe",
            seed=cfg.seed,
        )
        dn.load_state_dict(arrays)
        return "diffusion", dn, cfg
    if kind == "generator":
        spec = G.build_generator(
            cfg.mode,
            L=cfg.levels,
            base_h=cfg.base_h,
            base_w=cfg.base_w,
            channels=cfg.channels,
            img_channels=3 if cfg.color else 1,
            latent_dim=cfg.latent_dim,
            padding_mode=cfg.padding_mode,
            noise_injection=cfg.noise_injection,
            seed=cfg.seed,
        )
        spec.load_state_dict(arrays)
        return "synthesis", spec, cfg
    raise DataFormatError(f"{path} is not a model checkpoint (kinds: {kind!r})")


def _write_images(out: Path, images: np.ndarray, stem: str):
    paths = []
    for i in range(images.shape[0]):
        ext = "ppm" if images.shape[1] == 3 else "pgm"
        path = out / f"{stem}_{i:03d}.{ext}"
        io.write_image(path, images[i])
        paths.append(path)
    return paths


# ---------------------------------------------------------------- generate


def cmd_generate(args) -> int:
    if args.deterministic:
        _limit_threads()
    if args.reconstruct is not None:
        return cmd_reconstruct(args)
    out = _outdir(args)
    kind, model, cfg = load_model(args.checkpoint)
    from . import plots
    from .tensor import Tensor, no_grad, validate_finite

    if kind == "diffusion":
        sched = D.make_beta_schedule(cfg.timesteps, cfg.beta_start, cfg.beta_end)
        pyramid = G.build_denoiser_pyramid(model) if model.use_pe else None
        if args.shift and pyramid is not None:
            dh, dw = _parse_pair(args.shift)
            pyramid = pe.shift_pyramid(pyramid, dh, dw)
        images = D.generate(model, pyramid, sched, n=args.n, seed=args.seed)
    else:
        spec = model
        inputs = G.make_inputs(spec, n=args.n, seed=args.seed)
        with no_grad():
            if args.size:
                h2, w2 = _parse_pair(args.size, int)
                images = G.multiscale_generate(spec, inputs, h2, w2,
                                               noise_seed=args.seed).data
            elif args.tile_w or args.extend:
                plan = G.ExpandPlan(
                    w_segments=_parse_segments(args.tile_w) if args.tile_w else None,
                    margin_h=_parse_pair(args.extend)[0] if args.extend else 0.0,
                    margin_w=_parse_pair(args.extend)[1] if args.extend else 0.0,
                )
                images = G.expanded_generate(spec, inputs, plan, noise_seed=args.seed).data
            elif args.shift:
                dh, dw = _parse_pair(args.shift)
                images = M.shifted_output(spec, inputs, dh, dw)
            else:
                images = G.synth_forward(spec, inputs).data
    validate_finite(Tensor(images), "generated images")
    paths = _write_images(out, images, "gen")
    plots.save_image_row(out / "gen.png", list(images[: min(8, len(images))]))
    print(f"wrote {len(paths)} images to {out}")
    return 0


# ------------------------------------------------------------- reconstruct


def cmd_reconstruct(args) -> int:
    if args.deterministic:
        _limit_threads()
    out = _outdir(args)
    kind, model, cfg = load_model(args.checkpoint)
    if kind != "diffusion":
        raise ValueError("reconstruct requires a diffusion checkpoint")
    t_enc = args.reconstruct if getattr(args, "reconstruct", None) else args.t_enc
    sched = D.make_beta_schedule(cfg.timesteps, cfg.beta_start, cfg.beta_end)
    offset = _parse_pair(args.input_offset, int) if args.input_offset else (
        cfg.offset_h, cfg.offset_w)
    batch = ds.synth_glyphs(
        args.n, seed=args.seed, canvas=cfg.size, patch=cfg.size // 2,
        offset=offset, color=cfg.color,
    )
    pyramid = G.build_denoiser_pyramid(model) if model.use_pe else None
    if args.shift and pyramid is not None:
        dh, dw = _parse_pair(args.shift)
        pyramid = pe.shift_pyramid(pyramid, dh, dw)
    recon = D.stochastic_reconstruct(batch.images, t_enc, model, pyramid, sched,
                                     seed=args.seed)
    from . import plots
    from .tensor import Tensor, validate_finite

    validate_finite(Tensor(recon), "reconstructions")
    _write_images(out, recon, "recon")
    _write_images(out, batch.images[: min(4, args.n)], "input")
    rows = []
    for i in range(recon.shape[0]):
        q = M.quadrant_mass(M.to_intensity(recon[i]))
        rows.append((i, *map(float, q)))
    mean_q = np.mean([r[1:] for r in rows], axis=0)
    _write_csv(out / "quadrant_mass.csv",
               ["index", "upper_left", "upper_right", "lower_left", "lower_right"], rows)
    plots.save_image_row(out / "recon.png", list(recon[: min(8, len(recon))]))
    print(
        f"reconstructed {recon.shape[0]} images from t={t_enc}; mean quadrant mass "
        f"UL {mean_q[0]:.3f} UR {mean_q[1]:.3f} LL {mean_q[2]:.3f} LR {mean_q[3]:.3f}"
    )
    return 0


# ------------------------------------------------------------------ report


def cmd_report(args) -> int:
    if args.deterministic:
        _limit_threads()
    out = _outdir(args)
    from . import plots

    summary = []
    if args.probe == "shift-curve":
        shifts = list(range(0, args.max_shift + 1, args.shift_step))
        curves = []
        rows = []
        for path in args.checkpoint:
            kind, spec, cfg = load_model(path)
            if kind != "synthesis":
                raise ValueError(f"{path}: shift-curve probes synthesis checkpoints")
            inputs = G.make_inputs(spec, n=1, seed=args.seed)
            curve = M.shift_consistency_curve(
                spec, inputs, shifts, crop=(0, 0, cfg.patch)
            )
            curves.append(curve)
            rows += [(float(s), float(v), curve.mode)
                     for s, v in zip(curve.shifts, curve.similarities)]
            nonzero = [v for s, v in zip(curve.shifts, curve.similarities) if s > 0]
            summary.append(
                f"{curve.mode}: mean similarity over shifts 1..{args.max_shift} = "
                f"{np.mean(nonzero):.4f}" if nonzero else f"{curve.mode}: zero-shift only"
            )
        _write_csv(out / "shift_curve.csv", ["shift", "similarity", "mode"], rows)
        plots.save_shift_curves(out / "shift_curve.png", curves)
    elif args.probe == "noise-std":
        rows = []
        for path in args.checkpoint:
            kind, spec, cfg = load_model(path)
            if kind != "synthesis":
                raise ValueError(f"{path}: noise-std probes synthesis checkpoints")
            inputs = G.make_inputs(spec, n=1, seed=args.seed)
            std_map = G.noise_std_probe(spec, inputs, n_instances=args.instances,
                                        seed=args.seed)
            rows.append((spec.mode, float(std_map.mean()), float(std_map.max())))
            io.write_pgm(out / f"noise_std_{spec.mode}.pgm",
                         std_map / max(std_map.max(), 1e-8))
            plots.save_heatmap(out / f"noise_std_{spec.mode}.png", std_map,
                               title=f"{spec.mode} per-pixel std")
            summary.append(f"{spec.mode}: mean per-pixel std = {std_map.mean():.5f}")
        _write_csv(out / "noise_std.csv", ["mode", "mean_std", "max_std"], rows)
    elif args.probe == "quadrant-mass":
        batch = load_dataset_container(args.dataset)
        rows = []
        for i in range(batch.images.shape[0]):
            q = M.quadrant_mass(M.to_intensity(batch.images[i]))
            rows.append((i, *map(float, q)))
        mean_q = np.mean([r[1:] for r in rows], axis=0)
        _write_csv(out / "quadrant_mass.csv",
                   ["index", "upper_left", "upper_right", "lower_left", "lower_right"],
                   rows)
        plots.save_heatmap(
            out / "quadrant_mass.png",
            M.to_intensity(batch.images.mean(axis=0)),
            title="dataset mean intensity",
        )
        summary.append(
            "dataset mean quadrant mass: "
            + " ".join(f"{n}={v:.3f}" for n, v in zip(["UL", "UR", "LL", "LR"], mean_q))
        )
    else:
        raise ValueError(f"unknown probe {args.probe!r}")
    (out / "summary.txt").write_text("\n".join(summary) + "\n")
    for line in summary:
        print(line)
    return 0


# ------------------------------------------------------------------ verify


def cmd_verify(args) -> int:
    from .verify import run_invariant_suite

    failures = run_invariant_suite(quick=not args.full)
    return 1 if failures else 0


# -------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mspe",
        description="Multi-scale positional encoding toolkit: embedding algebra, "
        "toy spatially unbiased generators, and bias probes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--deterministic", action="store_true",
                       help="force single-threaded numeric paths")

    p = sub.add_parser("build-pe", help="write embedding grids/pyramids + heatmaps")
    common(p)
    p.add_argument("--height", type=int, default=4)
    p.add_argument("--width", type=int, default=4)
    p.add_argument("--channels", type=int, default=64)
    p.add_argument("--levels", type=int, default=1)
    p.add_argument("--shift", help="dh,dw image-scale shift")
    p.add_argument("--resize", help="H,W analytic resample target")
    p.add_argument("--tile-w", dest="tile_w", help="segments lo:hi,lo:hi along width")
    p.add_argument("--extend", help="margin_h,margin_w beyond the frame")
    p.add_argument("--heatmaps", type=int, default=4, help="channels rendered as PGM")
    p.set_defaults(handler=cmd_build_pe)

    p = sub.add_parser("build-dataset", help="build the spatially biased corpus")
    common(p)
    p.add_argument("--config", help="key = value config file")
    for name in ("source", "idx_images", "idx_labels"):
        p.add_argument(f"--{name.replace('_', '-')}", dest=name)
    for name in ("n_samples", "canvas", "patch", "offset_h", "offset_w"):
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=int)
    p.add_argument("--gray", dest="color", action="store_false", default=None)
    p.set_defaults(handler=cmd_build_dataset)

    p = sub.add_parser("train", help="train the toy diffusion or synthesis model")
    common(p)
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--mode", choices=cfgmod.MODES)
    p.add_argument("--model", choices=cfgmod.MODELS)
    for name in ("steps", "batch", "timesteps", "levels", "channels", "width",
                 "canvas", "patch", "offset_h", "offset_w", "n_samples", "size"):
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--gray", dest="color", action="store_false", default=None)
    p.add_argument("--padding-mode", dest="padding_mode", choices=("zero", "circular"))
    p.add_argument("--resize-sizes", dest="resize_sizes",
                   type=lambda s: [int(v) for v in s.split(",")],
                   help="random-resizing schedule, e.g. 64,96,128")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("generate", help="sample a trained model, optionally at "
                       "shifted/resized/expanded coordinates")
    common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--shift", help="dh,dw image-scale shift")
    p.add_argument("--size", help="H,W multiscale target")
    p.add_argument("--tile-w", dest="tile_w", help="width tile segments lo:hi,...")
    p.add_argument("--extend", help="margin_h,margin_w")
    p.add_argument("--reconstruct", type=int,
                   help="encode inputs to this timestep and decode")
    p.add_argument("--t-enc", dest="t_enc", type=int, default=100)
    p.add_argument("--input-offset", dest="input_offset",
                   help="r,c patch offset for reconstruction inputs")
    p.set_defaults(handler=cmd_generate)

    p = sub.add_parser("reconstruct", help="stochastic reconstruction probe")
    common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--t-enc", dest="t_enc", type=int, required=True)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--shift", help="dh,dw pyramid shift for translated decoding")
    p.add_argument("--input-offset", dest="input_offset",
                   help="r,c patch offset for the input glyphs")
    p.set_defaults(handler=cmd_reconstruct, reconstruct=None)

    p = sub.add_parser("report", help="bias probes: CSV + figures")
    common(p)
    p.add_argument("--probe", required=True,
                   choices=("shift-curve", "noise-std", "quadrant-mass"))
    p.add_argument("--checkpoint", action="append", default=[],
                   help="model checkpoint (repeatable)")
    p.add_argument("--dataset", help="dataset container for quadrant-mass")
    p.add_argument("--max-shift", dest="max_shift", type=int, default=64)
    p.add_argument("--shift-step", dest="shift_step", type=int, default=1)
    p.add_argument("--instances", type=int, default=100)
    p.set_defaults(handler=cmd_report)

    p = sub.add_parser("verify", help="run the library invariant suite")
    p.add_argument("--full", action="store_true", help="larger randomized batteries")
    p.set_defaults(handler=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except DataFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
