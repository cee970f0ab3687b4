"""Synthetic five-class corpus for desk-scale experiments.

Every image carries its label twice, in two very different places. A fine
stripe texture (period ~4 px, orientation encodes the class) lives in zigzag
planes 10 and up: it survives the encoder at high quality, is legible at
training resolution, but vanishes under top-n truncation and drowns in the
garbage that uniform bit errors make of wide high-frequency fields. A color
tint (hue encodes the class) rides the positive phase of a class-independent
coarse wave: it is carried almost entirely by DC terms, so it survives any
truncation yet is scrambled block-by-block when DC magnitudes are corrupted.
Clean-trained models lean on the stripes and keep only partial tint
competence, which is exactly what makes them degrade under truncation while
still responding to DC protection under bit errors. The shared-sign speckle
keeps every stream broadband, so no quality setting collapses an image to a
handful of packets.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

CLASS_NAMES = ("red0", "green36", "blue72", "amber108", "magenta144")

_TINTS = np.array([
    (1.0, -0.5, -0.5),
    (-0.5, 1.0, -0.5),
    (-0.4, -0.2, 1.0),
    (0.9, 0.6, -0.8),
    (0.8, -0.7, 0.8),
], dtype=np.float64)


def pattern_image(class_id: int, seed: int, size: int = 256,
                  speckle: float = 68.0, stripe_amp: float = 34.0,
                  tint_amp: float = 34.0) -> np.ndarray:
    if not 0 <= class_id < len(CLASS_NAMES):
        raise ValueError(f"class id out of range: {class_id}")
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    base = np.array((150.0, 150.0, 150.0)) + rng.normal(0, 8, 3)

    # Class-coded tint on the positive phase of a random coarse wave.
    period = rng.uniform(30, 44)
    theta = rng.uniform(0, np.pi)
    axis = xx * np.cos(theta) + yy * np.sin(theta)
    wave = np.sin(2 * np.pi * axis / period + rng.uniform(0, 2 * np.pi))
    img = base[None, None, :] + (wave > 0)[..., None] * _TINTS[class_id] * tint_amp

    # Class-coded stripes at period ~4 px (zigzag planes >= 10).
    angle = np.deg2rad(class_id * 36.0 + rng.uniform(-8, 8))
    stripe_axis = xx * np.cos(angle) + yy * np.sin(angle)
    stripes = np.sin(2 * np.pi * stripe_axis / rng.uniform(3.8, 4.6)
                     + rng.uniform(0, 2 * np.pi))

    luma = stripe_amp * stripes + speckle * rng.choice([-1.0, 1.0], size=(size, size))
    img = img + luma[..., None]
    img += rng.normal(0, 3.0, img.shape)
    return np.clip(img, 0, 255).astype(np.uint8)


def make_corpus(out_dir, per_class: int, seed: int = 0, size: int = 256) -> Path:
    """Write a directory-per-class PNG corpus; deterministic given seed."""
    out_dir = Path(out_dir)
    for class_id, name in enumerate(CLASS_NAMES):
        class_dir = out_dir / name
        class_dir.mkdir(parents=True, exist_ok=True)
        for i in range(per_class):
            img = pattern_image(class_id, seed * 1_000_003 + class_id * 10_007 + i,
                                size=size)
            Image.fromarray(img).save(class_dir / f"{name}_{i:03d}.png")
    return out_dir
