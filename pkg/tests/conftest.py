"""Shared fixtures: deterministic synthetic test images.

The fixture corpus imitates photographic content (smooth shading, hard
edges, mild sensor noise) so that stream sizes and plane statistics land in
a realistic regime without shipping binary assets.
"""

import numpy as np
import pytest

from semcodec import encode_image


def synth_image(seed: int, height: int = 96, width: int = 96) -> np.ndarray:
    """Deterministic natural-looking RGB test image."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    img = np.zeros((height, width, 3))

    # Smooth shading: a few random low-frequency waves per channel.
    for ch in range(3):
        base = rng.uniform(60, 190)
        img[:, :, ch] = base
        for _ in range(3):
            fx = rng.uniform(0.5, 2.0) / width
            fy = rng.uniform(0.5, 2.0) / height
            phase = rng.uniform(0, 2 * np.pi)
            amp = rng.uniform(15, 45)
            img[:, :, ch] += amp * np.sin(2 * np.pi * (fx * xx + fy * yy) + phase)

    # Hard-edged shapes: rectangles and ellipses with random fill.
    for _ in range(6):
        color = rng.uniform(10, 245, size=3)
        if rng.random() < 0.5:
            y0, x0 = rng.integers(0, height - 8), rng.integers(0, width - 8)
            h = int(rng.integers(8, max(9, height // 3)))
            w = int(rng.integers(8, max(9, width // 3)))
            img[y0:y0 + h, x0:x0 + w] = 0.35 * img[y0:y0 + h, x0:x0 + w] + 0.65 * color
        else:
            cy, cx = rng.uniform(0, height), rng.uniform(0, width)
            ry, rx = rng.uniform(6, height / 4), rng.uniform(6, width / 4)
            inside = ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0
            img[inside] = 0.35 * img[inside] + 0.65 * color

    img += rng.normal(0.0, 5.0, size=img.shape)
    return np.clip(img, 0, 255).astype(np.uint8)


def photo_image(seed: int = 77, height: int = 120, width: int = 160) -> np.ndarray:
    """Smooth, softly-lit image: compresses like a photograph at high Q."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    img = np.zeros((height, width, 3))
    for ch in range(3):
        img[:, :, ch] = rng.uniform(80, 170)
        for _ in range(4):
            fx = rng.uniform(0.3, 1.5) / width
            fy = rng.uniform(0.3, 1.5) / height
            img[:, :, ch] += rng.uniform(10, 35) * np.sin(
                2 * np.pi * (fx * xx + fy * yy) + rng.uniform(0, 2 * np.pi))
    for _ in range(5):
        color = rng.uniform(40, 215, size=3)
        cy, cx = rng.uniform(0, height), rng.uniform(0, width)
        ry, rx = rng.uniform(10, height / 3), rng.uniform(10, width / 3)
        d2 = ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2
        w = np.clip(1.0 - d2, 0.0, 1.0)[..., None] ** 2
        img = img * (1 - 0.7 * w) + color * 0.7 * w
    img += rng.normal(0, 0.8, size=img.shape)
    return np.clip(img, 0, 255).astype(np.uint8)


@pytest.fixture(scope="session")
def fixture_corpus():
    """20 deterministic RGB images, the acceptance-test corpus."""
    return [synth_image(seed) for seed in range(20)]


@pytest.fixture(scope="session")
def photo_fixture():
    return photo_image()


@pytest.fixture(scope="session")
def flower_like_image():
    """One larger image sized so its Q=90 stream packetizes near 36 packets."""
    return synth_image(seed=99, height=192, width=256)


@pytest.fixture(scope="session")
def small_encoded():
    """A small encoded image reused where content does not matter."""
    return encode_image(synth_image(seed=7, height=48, width=64), quality=90)


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory, fixture_corpus):
    """Directory-per-class corpus layout with the fixture images as PNGs."""
    from PIL import Image

    root = tmp_path_factory.mktemp("corpus")
    for i, img in enumerate(fixture_corpus):
        cls = root / f"class_{i % 2}"
        cls.mkdir(exist_ok=True)
        Image.fromarray(img).save(cls / f"img_{i:02d}.png")
    return root


@pytest.fixture(scope="session")
def mini_corpus_dir(tmp_path_factory):
    """Four small images in two classes, for fast harness tests."""
    from PIL import Image

    root = tmp_path_factory.mktemp("mini_corpus")
    for i in range(4):
        cls = root / ("daisy" if i % 2 else "tulip")
        cls.mkdir(exist_ok=True)
        Image.fromarray(synth_image(40 + i, 56, 64)).save(cls / f"img_{i}.png")
    return root
