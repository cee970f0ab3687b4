"""Codec-CLI integration and manifest-backed datasets.

The trainer never links against the codec library: all distorted images are
produced by the `semcodec` command-line tool and consumed through its
manifest CSV and PNG outputs.
"""

from __future__ import annotations

import csv
import shutil
import subprocess
import sys
from pathlib import Path

import torch
from PIL import Image
from torch.utils.data import Dataset

from .config import parse_schedule


def codec_command() -> list[str]:
    """The semcodec CLI invocation, preferring the installed entry point."""
    exe = shutil.which("semcodec")
    if exe:
        return [exe]
    return [sys.executable, "-m", "semcodec"]


def _run_cli(args: list[str], what: str) -> None:
    proc = subprocess.run(codec_command() + args, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(
            f"{what} failed (exit {proc.returncode}):\n{proc.stderr.strip()}")


def run_augment(corpus, out_dir, seed: int, quality: int = 90,
                schedule: str = "top_n_uniform", epoch: int = 0,
                workers: int = 1) -> Path:
    """Invoke `semcodec augment` and return the manifest path."""
    out_dir = Path(out_dir)
    args = ["augment", "--corpus", str(corpus), "--out", str(out_dir),
            "--seed", str(seed), "--quality", str(quality),
            "--workers", str(workers)]
    opts = parse_schedule(schedule, epoch)
    if "schedule" in opts:
        args += ["--schedule", opts["schedule"]]
    else:
        args += ["--drop-prob", ",".join(f"{p:g}" for p in opts["drop_prob"])]
    _run_cli(args, "augmentation subprocess")
    return out_dir / "manifest.csv"


def run_sweep(experiment: str, corpus, out_dir, seed: int = 0,
              workers: int = 1, extra: list[str] | None = None) -> Path:
    """Invoke `semcodec sweep` and return the manifest path."""
    out_dir = Path(out_dir)
    args = ["sweep", "--experiment", experiment, "--corpus", str(corpus),
            "--out", str(out_dir), "--seed", str(seed),
            "--workers", str(workers)]
    if extra:
        args += list(extra)
    _run_cli(args, f"{experiment} sweep subprocess")
    return out_dir / "manifest.csv"


def read_manifest(path) -> list[dict]:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def corpus_classes(corpus) -> list[str]:
    """Sorted class names from a directory-per-class corpus."""
    corpus = Path(corpus)
    classes = sorted(
        d.name for d in corpus.iterdir()
        if d.is_dir() and (any(d.glob("*.png")) or any(d.glob("*.bmp"))))
    if len(classes) < 2:
        raise ValueError(f"dataset needs at least 2 classes, found {classes}")
    return classes


def split_rows(rows: list[dict], val_fraction: float) -> tuple[list[dict], list[dict]]:
    """Deterministic train/val split keyed on distinct source paths."""
    sources = sorted({row["source"] for row in rows})
    stride = max(2, round(1.0 / val_fraction))
    val_sources = {s for i, s in enumerate(sources) if i % stride == 0}
    train = [r for r in rows if r["source"] not in val_sources]
    val = [r for r in rows if r["source"] in val_sources]
    return train, val


class ManifestDataset(Dataset):
    """Images listed in a manifest CSV, labeled by class index.

    Only rows with status 'ok' are served; failure rows carry no image.
    """

    def __init__(self, rows: list[dict], root, classes: list[str], transform):
        self.rows = [r for r in rows if r["status"] == "ok"]
        self.root = Path(root)
        self.class_index = {name: i for i, name in enumerate(classes)}
        self.transform = transform

    def __len__(self) -> int:
        return len(self.rows)

    def __getitem__(self, idx: int):
        row = self.rows[idx]
        with Image.open(self.root / row["output"]) as im:
            tensor = self.transform(im.convert("RGB"))
        return tensor, self.class_index[row["label"]]


def manifest_loader(rows, root, classes, transform, batch_size: int,
                    shuffle: bool, seed: int = 0):
    dataset = ManifestDataset(rows, root, classes, transform)
    generator = torch.Generator()
    generator.manual_seed(seed)
    return torch.utils.data.DataLoader(dataset, batch_size=batch_size,
                                       shuffle=shuffle, generator=generator,
                                       num_workers=0)
