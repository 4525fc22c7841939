"""Run configuration: defaults, key = value config files, flag merging.

The resolved config is echoed into every output directory and serialized
verbatim into checkpoints so runs can be reproduced from their artifacts.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from pathlib import Path

MODES = ("baseline", "ss-pe", "ms-pe")
MODELS = ("diffusion", "synthesis")
SOURCES = ("synthetic", "idx")


@dataclass
class RunConfig:
    mode: str = "ms-pe"
    model: str = "diffusion"
    # synthesis geometry
    levels: int = 5
    base_h: int = 4
    base_w: int = 4
    channels: int = 32
    img_channels: int = 3
    latent_dim: int = 8
    padding_mode: str = "zero"
    noise_injection: bool = True
    # denoiser geometry
    size: int = 32
    width: int = 32
    time_dim: int = 16
    # diffusion schedule
    timesteps: int = 200
    beta_start: float = 1e-3
    beta_end: float = 5e-2
    # trainer
    lr: float = 2e-3
    batch: int = 8
    steps: int = 2000
    seed: int = 0
    resize_sizes: list | None = None
    # dataset
    source: str = "synthetic"
    idx_images: str = ""
    idx_labels: str = ""
    canvas: int = 64
    patch: int = 32
    offset_h: int = 0
    offset_w: int = 0
    color: bool = True
    n_samples: int = 256
    out_dir: str = "out"

    def validate(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.source not in SOURCES:
            raise ValueError(f"source must be one of {SOURCES}, got {self.source!r}")
        if self.padding_mode not in ("zero", "circular"):
            raise ValueError(f"padding_mode must be zero or circular, got {self.padding_mode!r}")
        if self.steps < 0 or self.batch < 1 or self.levels < 1 or self.timesteps < 1:
            raise ValueError("steps/batch/levels/timesteps out of range")
        if not (0.0 < self.beta_start <= self.beta_end < 1.0):
            raise ValueError(
                f"need 0 < beta_start <= beta_end < 1, got {self.beta_start}, {self.beta_end}"
            )
        return self

    def to_dict(self) -> dict:
        return asdict(self)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(name: str, raw: str):
    if name not in _FIELD_TYPES:
        raise ValueError(f"unknown config key {name!r}")
    raw = raw.strip()
    kind = _FIELD_TYPES[name]
    if name == "resize_sizes":
        if raw.lower() in ("", "none"):
            return None
        return [int(v) for v in raw.split(",") if v.strip()]
    if kind == "bool":
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"cannot read {raw!r} as a boolean for {name}")
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw


def parse_config_file(path) -> dict:
    """key = value lines; # starts a comment; keys must be RunConfig fields."""
    overrides = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {body!r}")
        key, value = body.split("=", 1)
        overrides[key.strip()] = _coerce(key.strip(), value)
    return overrides


def resolve_config(config_path=None, flag_overrides: dict | None = None) -> RunConfig:
    """File values first, then flags; flags win."""
    merged = {}
    if config_path:
        merged.update(parse_config_file(config_path))
    for key, value in (flag_overrides or {}).items():
        if value is not None:
            merged.update({key: value})
    cfg = RunConfig(**merged)
    return cfg.validate()


def write_config_echo(path, cfg: RunConfig):
    lines = []
    for key, value in cfg.to_dict().items():
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        elif value is None:
            value = "none"
        lines.append(f"{key} = {value}")
    Path(path).write_text("\n".join(lines) + "\n")
