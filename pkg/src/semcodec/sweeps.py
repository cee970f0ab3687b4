"""Experiment sweeps over an image corpus.

Each sweep runs a Cartesian product of parameters over a directory-per-class
corpus, reconstructs the distorted images, and records one manifest row per
output. Rows are independent tasks with per-row seeds derived as the sweep
seed XOR the task index, so results are identical no matter how many worker
processes execute them.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from . import bitstream, channel, dct
from .manifest import MANIFEST_NAME, write_manifest

EXPERIMENTS = (
    "top_n",
    "remove_k",
    "quality",
    "packet_loss",
    "bit_error",
    "latency_rate",
    "conventional_vs_proposed",
)

AUGMENT_SCHEDULES = ("constant", "top_n_uniform")

IMAGE_SUFFIXES = (".png", ".bmp")

_SEED_MASK = (1 << 63) - 1


@dataclass
class SweepSpec:
    experiment: str
    corpus: Path
    out_dir: Path
    seed: int = 0
    quality: int = 90
    color_mode: str = "ycbcr"
    workers: int = 1
    repeats: int = 1
    n_values: tuple = tuple(range(1, 65))
    k_values: tuple = tuple(range(64))
    q_values: tuple = (10, 20, 30, 40, 50, 60, 70, 80, 90, 100)
    drop_counts: tuple = (0, 1, 2, 3, 4, 5)
    error_probs: tuple = (0.001, 0.005, 0.01, 0.05, 0.1)
    protections: tuple = ("none",)
    rates_mbps: tuple = (1.0, 2.0, 5.0, 10.0, 20.0, 50.0)
    deadlines_ms: tuple = (1.0, 2.0, 5.0, 10.0, 20.0, 50.0)
    bit_error_prob: float = 0.0
    protection: str = "none"
    fec_overhead_factor: float = 1.0
    compute_time_ms: float = 0.0

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment: {self.experiment}")
        if not 1 <= self.quality <= 100:
            raise ValueError(f"quality out of range: {self.quality}")
        if any(not 1 <= n <= 64 for n in self.n_values):
            raise ValueError("top-n values must lie in [1, 64]")
        if any(not 0 <= k <= 63 for k in self.k_values):
            raise ValueError("plane indices must lie in [0, 63]")
        if any(not 1 <= q <= 100 for q in self.q_values):
            raise ValueError("quality values must lie in [1, 100]")
        if any(not 0 <= d <= 5 for d in self.drop_counts):
            raise ValueError("drop counts must lie in [0, 5]")
        if any(not 0.0 <= p <= 1.0 for p in self.error_probs):
            raise ValueError("bit error probabilities must lie in [0, 1]")
        if any(prot not in channel.PROTECTION_MODES for prot in self.protections):
            raise ValueError(f"unknown protection in {self.protections}")
        if any(r <= 0 for r in self.rates_mbps) or any(d <= 0 for d in self.deadlines_ms):
            raise ValueError("rates and deadlines must be positive")
        if self.repeats < 1 or self.workers < 1:
            raise ValueError("repeats and workers must be >= 1")


@dataclass
class AugmentSpec:
    corpus: Path
    out_dir: Path
    seed: int = 0
    quality: int = 90
    color_mode: str = "ycbcr"
    workers: int = 1
    schedule: str = "constant"
    drop_prob: tuple = (0.0,)
    per_plane: bool = False

    def __post_init__(self):
        if self.schedule not in AUGMENT_SCHEDULES:
            raise ValueError(f"unknown augment schedule: {self.schedule}")
        probs = np.asarray(self.drop_prob, dtype=float)
        if probs.size not in (1, 64):
            raise ValueError("drop_prob must be a scalar or 64 values")
        if np.any(probs < 0) or np.any(probs > 1):
            raise ValueError("drop probabilities must lie in [0, 1]")


def scan_corpus(root) -> list[tuple[Path, str]]:
    """(path, label) pairs, label = containing directory name, sorted."""
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"corpus directory not found: {root}")
    found = []
    for path in sorted(root.rglob("*")):
        if path.is_file() and path.suffix.lower() in IMAGE_SUFFIXES:
            label = path.parent.name if path.parent != root else root.name
            found.append((path, label))
    if not found:
        raise FileNotFoundError(f"no PNG/BMP images under {root}")
    return found


def load_image(path, color_mode: str) -> np.ndarray:
    with Image.open(path) as im:
        if color_mode == "luma":
            return np.asarray(im.convert("L"))
        return np.asarray(im.convert("RGB"))


def save_image(path, arr: np.ndarray) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(arr).save(path)


def _row_seed(base_seed: int, index: int) -> int:
    return (base_seed ^ index) & _SEED_MASK


def _param_combos(spec: SweepSpec) -> list[dict]:
    if spec.experiment == "top_n":
        return [{"n": n} for n in spec.n_values]
    if spec.experiment == "remove_k":
        return [{"k": k} for k in spec.k_values]
    if spec.experiment == "quality":
        return [{"q": q} for q in spec.q_values]
    if spec.experiment == "packet_loss":
        return [{"drop_count": d} for d in spec.drop_counts]
    if spec.experiment == "bit_error":
        return [{"bit_error_prob": p, "protection": prot}
                for p in spec.error_probs for prot in spec.protections]
    # latency_rate and conventional_vs_proposed share the grid
    return [{"rate_mbps": r, "deadline_ms": d}
            for r in spec.rates_mbps for d in spec.deadlines_ms]


def _param_tag(experiment: str, params: dict) -> str:
    if experiment == "augment":
        return "aug"
    if experiment == "top_n":
        return f"n{params['n']:02d}"
    if experiment == "remove_k":
        return f"k{params['k']:02d}"
    if experiment == "quality":
        return f"q{params['q']:03d}"
    if experiment == "packet_loss":
        return f"d{params['drop_count']}"
    if experiment == "bit_error":
        return f"p{params['bit_error_prob']:g}_{params['protection']}"
    return f"r{params['rate_mbps']:g}_t{params['deadline_ms']:g}"


def build_tasks(spec: SweepSpec) -> list[dict]:
    combos = _param_combos(spec)
    tasks = []
    index = 0
    for source, label in scan_corpus(spec.corpus):
        for params in combos:
            for _ in range(spec.repeats):
                tasks.append({
                    "index": index,
                    "source": str(source),
                    "label": label,
                    "params": params,
                    "seed": _row_seed(spec.seed, index),
                })
                index += 1
    return tasks


def _base_row(ctx: dict, task: dict) -> dict:
    params = task["params"]
    return {
        "source": task["source"],
        "label": task["label"],
        "experiment": ctx["experiment"],
        "seed": task["seed"],
        "n": params.get("n"),
        "q": params.get("q", ctx["quality"]),
        "k": params.get("k"),
        "drop_count": params.get("drop_count"),
        "bit_error_prob": params.get("bit_error_prob", ctx.get("bit_error_prob")),
        "protection": params.get("protection", ctx.get("protection")),
        "rate_mbps": params.get("rate_mbps"),
        "deadline_ms": params.get("deadline_ms"),
        "status": "failed",
    }


def _fill_report(row: dict, report: channel.TransmissionReport) -> None:
    row["packets_sent"] = report.packets_sent
    row["packets_delivered"] = report.packets_delivered
    row["bits_flipped"] = report.bits_flipped
    row["bytes_budget"] = report.bytes_budget
    row["protected_bytes"] = report.protected_bytes
    row["effective_payload_bytes"] = report.effective_payload_bytes


def _output_path(ctx: dict, task: dict, suffix: str = "") -> tuple[Path, str]:
    tag = _param_tag(ctx["experiment"], task["params"])
    stem = Path(task["source"]).stem
    rel = (Path("images") / ctx["experiment"] / task["label"]
           / f"{stem}__{tag}__i{task['index']:05d}{suffix}.png")
    return Path(ctx["out_dir"]) / rel, str(rel)


def _finish_row(ctx, task, row, img, enc, mask, suffix=""):
    rec = dct.reconstruct(enc, mask)
    full_path, rel = _output_path(ctx, task, suffix)
    save_image(full_path, rec)
    prefix = "conv_" if suffix else ""
    row[f"{prefix}output"] = rel
    row[f"{prefix}psnr_db"] = dct.psnr(img, rec)
    if not suffix:
        row["mask_kept"] = int(mask.sum())
        row["mask_total"] = int(mask.size)
        row["status"] = "ok"


def _run_channel_row(ctx, task, row, img, stream, cfg):
    delivered, report = channel.transmit(stream, cfg)
    _fill_report(row, report)
    if not delivered:
        return
    try:
        dec, mask = bitstream.depacketize(delivered)
    except bitstream.HeaderLostError:
        return
    _finish_row(ctx, task, row, img, dec, mask)


def run_sweep_task(ctx: dict, task: dict) -> dict:
    """Execute one manifest row; exceptions surface as failure rows."""
    row = _base_row(ctx, task)
    params = task["params"]
    experiment = ctx["experiment"]
    try:
        img = load_image(task["source"], ctx["color_mode"])
        if experiment in ("top_n", "remove_k"):
            enc = dct.encode_image(img, ctx["quality"], ctx["color_mode"])
            if experiment == "top_n":
                mask = dct.mask_keep_top_n(enc, params["n"])
            else:
                mask = dct.mask_remove_plane(enc, params["k"])
            _finish_row(ctx, task, row, img, enc, mask)

        elif experiment == "quality":
            enc = dct.encode_image(img, params["q"], ctx["color_mode"])
            _finish_row(ctx, task, row, img, enc, dct.full_mask(enc))

        elif experiment == "packet_loss":
            enc = dct.encode_image(img, ctx["quality"], ctx["color_mode"])
            cfg = channel.ChannelConfig(drop_count=params["drop_count"],
                                        seed=task["seed"])
            _run_channel_row(ctx, task, row, img, bitstream.serialize(enc), cfg)

        elif experiment == "bit_error":
            enc = dct.encode_image(img, ctx["quality"], ctx["color_mode"])
            cfg = channel.ChannelConfig(bit_error_prob=params["bit_error_prob"],
                                        protection=params["protection"],
                                        fec_overhead_factor=ctx["fec_overhead_factor"],
                                        seed=task["seed"])
            _run_channel_row(ctx, task, row, img, bitstream.serialize(enc), cfg)

        else:  # latency_rate, conventional_vs_proposed
            cfg = channel.ChannelConfig(
                bit_error_prob=ctx["bit_error_prob"],
                rate_bps=params["rate_mbps"] * 1e6,
                deadline_s=params["deadline_ms"] * 1e-3,
                compute_time_s=ctx["compute_time_ms"] * 1e-3,
                protection=ctx["protection"],
                fec_overhead_factor=ctx["fec_overhead_factor"],
                seed=task["seed"])
            enc = dct.encode_image(img, ctx["quality"], ctx["color_mode"])
            _run_channel_row(ctx, task, row, img, bitstream.serialize(enc), cfg)
            row["conv_status"] = "failed"
            conventional = channel.conventional_baseline(img, cfg, ctx["color_mode"])
            if conventional is not None:
                conv_q, conv_stream = conventional
                packets = bitstream.packetize(conv_stream)
                packets, _ = channel.inject_bit_errors(packets, cfg)
                dec, mask = bitstream.depacketize(packets)
                _finish_row(ctx, task, row, img, dec, mask, suffix="__conv")
                row["conv_status"] = "ok"
                row["conv_q"] = conv_q
    except (ValueError, OSError, bitstream.StreamFormatError):
        row["status"] = "failed"
    return row


def run_augment_task(ctx: dict, task: dict) -> dict:
    row = _base_row(ctx, task)
    try:
        img = load_image(task["source"], ctx["color_mode"])
        enc = dct.encode_image(img, ctx["quality"], ctx["color_mode"])
        if ctx["schedule"] == "top_n_uniform":
            rng = np.random.default_rng(task["seed"])
            n = int(rng.integers(1, 65))
            row["n"] = n
            mask = dct.mask_keep_top_n(enc, n)
        else:
            mask = dct.augment_drop(enc, np.asarray(ctx["drop_prob"]),
                                    seed=task["seed"], per_plane=ctx["per_plane"])
        _finish_row(ctx, task, row, img, enc, mask)
    except (ValueError, OSError):
        row["status"] = "failed"
    return row


def _task_entry(payload):
    runner, ctx, task = payload
    return runner(ctx, task)


def _execute(runner, ctx: dict, tasks: list[dict], workers: int) -> list[dict]:
    payloads = [(runner, ctx, task) for task in tasks]
    if workers <= 1:
        rows = [_task_entry(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_task_entry, payloads, chunksize=8))
    return rows


def run_sweep(spec: SweepSpec) -> Path:
    """Run the sweep and write out_dir/manifest.csv; returns the CSV path."""
    ctx = {
        "experiment": spec.experiment,
        "quality": spec.quality,
        "color_mode": spec.color_mode,
        "out_dir": str(spec.out_dir),
        "bit_error_prob": spec.bit_error_prob,
        "protection": spec.protection,
        "fec_overhead_factor": spec.fec_overhead_factor,
        "compute_time_ms": spec.compute_time_ms,
    }
    tasks = build_tasks(spec)
    rows = _execute(run_sweep_task, ctx, tasks, spec.workers)
    return write_manifest(Path(spec.out_dir) / MANIFEST_NAME, rows)


def run_augment(spec: AugmentSpec) -> Path:
    """Reconstruct every corpus image through a sampled drop mask."""
    ctx = {
        "experiment": "augment",
        "quality": spec.quality,
        "color_mode": spec.color_mode,
        "out_dir": str(spec.out_dir),
        "schedule": spec.schedule,
        "drop_prob": tuple(np.atleast_1d(np.asarray(spec.drop_prob, dtype=float))),
        "per_plane": spec.per_plane,
    }
    tasks = []
    for index, (source, label) in enumerate(scan_corpus(spec.corpus)):
        tasks.append({"index": index, "source": str(source), "label": label,
                      "params": {}, "seed": _row_seed(spec.seed, index)})
    rows = _execute(run_augment_task, ctx, tasks, spec.workers)
    return write_manifest(Path(spec.out_dir) / MANIFEST_NAME, rows)
