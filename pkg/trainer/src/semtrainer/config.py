"""Training configuration."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

ARCHITECTURES = ("small_cnn", "mobilenet_v2", "resnet_50")

SCHEDULES = ("none", "top_n_uniform", "top_n_cycle")

# top_n_cycle keeps the top K planes, with K following this per-epoch cycle.
# The interleaving keeps over half the epochs clean so the model retains
# full-quality competence while being forced to read heavy distortion in
# the rest.
TOP_N_CYCLE = (64, 1, 64, 2, 64, 4, 64, 8, 64, 64)


def parse_schedule(name: str, epoch: int = 0) -> dict:
    """Map a drop-schedule name to `semcodec augment` arguments.

    "none" trains on clean reconstructions; "top_n_uniform" keeps the top-n
    planes with n drawn uniformly per image; "top_n_cycle" keeps a fixed
    top-K per epoch, cycling K through TOP_N_CYCLE; "constant:P" drops every
    coefficient independently with probability P.
    """
    if name == "none":
        return {"drop_prob": (0.0,)}
    if name == "top_n_uniform":
        return {"schedule": "top_n_uniform"}
    if name == "top_n_cycle":
        keep = TOP_N_CYCLE[epoch % len(TOP_N_CYCLE)]
        return {"drop_prob": tuple(0.0 if k < keep else 1.0 for k in range(64))}
    if name.startswith("constant:"):
        p = float(name.split(":", 1)[1])
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"drop probability out of [0, 1]: {p}")
        return {"drop_prob": (p,)}
    raise ValueError(f"unknown drop schedule: {name}")


@dataclass
class TrainConfig:
    dataset: Path
    out_dir: Path
    architecture: str = "small_cnn"
    epochs: int = 12
    schedule: str = "top_n_uniform"
    rotation: bool = True
    scaling: bool = True
    seed: int = 0
    quality: int = 90
    image_size: int = 64
    batch_size: int = 16
    learning_rate: float = 2e-3
    val_fraction: float = 0.2
    pretrained: bool = False
    augment_workers: int = 1

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise ValueError(f"unknown architecture: {self.architecture}")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not 0.0 < self.val_fraction <= 0.5:
            raise ValueError("val_fraction must lie in (0, 0.5]")
        parse_schedule(self.schedule)
