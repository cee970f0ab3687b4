"""8x8 block-DCT image coding.

Images are split into 8x8 blocks, transformed with an orthonormal 2-D DCT-II,
quantized with JPEG-style tables, and regrouped into 64 coefficient planes in
zigzag order. A plane holds the k-th zigzag coefficient of every block of one
channel, which makes it the unit of progressive transmission: reconstruction
accepts any subset of coefficients via a boolean mask.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

COLOR_MODES = ("luma", "ycbcr")

# Standard JPEG zigzag scan: ZIGZAG_INDEX[k] is the row-major flat position
# (row * 8 + col) of the k-th coefficient.
ZIGZAG_INDEX = np.array([
    0,  1,  8, 16,  9,  2,  3, 10,
    17, 24, 32, 25, 18, 11,  4,  5,
    12, 19, 26, 33, 40, 48, 41, 34,
    27, 20, 13,  6,  7, 14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36,
    29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46,
    53, 60, 61, 54, 47, 55, 62, 63,
], dtype=np.int64)

# Base quantization tables (ITU-T T.81 Annex K).
LUMA_BASE_TABLE = np.array([
    [16, 11, 10, 16, 24, 40, 51, 61],
    [12, 12, 14, 19, 26, 58, 60, 55],
    [14, 13, 16, 24, 40, 57, 69, 56],
    [14, 17, 22, 29, 51, 87, 80, 62],
    [18, 22, 37, 56, 68, 109, 103, 77],
    [24, 35, 55, 64, 81, 104, 113, 92],
    [49, 64, 78, 87, 103, 121, 120, 101],
    [72, 92, 95, 98, 112, 100, 103, 99],
], dtype=np.int64)

CHROMA_BASE_TABLE = np.array([
    [17, 18, 24, 47, 99, 99, 99, 99],
    [18, 21, 26, 66, 99, 99, 99, 99],
    [24, 26, 56, 99, 99, 99, 99, 99],
    [47, 66, 99, 99, 99, 99, 99, 99],
    [99, 99, 99, 99, 99, 99, 99, 99],
    [99, 99, 99, 99, 99, 99, 99, 99],
    [99, 99, 99, 99, 99, 99, 99, 99],
    [99, 99, 99, 99, 99, 99, 99, 99],
], dtype=np.int64)


def _dct_matrix() -> np.ndarray:
    n = 8
    m = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            scale = np.sqrt(1.0 / n) if i == 0 else np.sqrt(2.0 / n)
            m[i, j] = scale * np.cos((2 * j + 1) * i * np.pi / (2 * n))
    return m


_DCT = _dct_matrix()
_DCT_T = _DCT.T.copy()


def zigzag_position(k: int) -> tuple[int, int]:
    """Map zigzag index k in [0, 63] to its (row, col) in the 8x8 grid."""
    if not 0 <= k <= 63:
        raise ValueError(f"zigzag index out of range: {k}")
    flat = int(ZIGZAG_INDEX[k])
    return flat // 8, flat % 8


def forward_dct8(block: np.ndarray) -> np.ndarray:
    """Orthonormal 2-D DCT-II of level-shifted 8x8 samples.

    Accepts a single (8, 8) block or a batch (..., 8, 8). Orthonormality
    means Parseval holds: sum of squared samples equals sum of squared
    coefficients.
    """
    block = np.asarray(block, dtype=np.float64)
    return _DCT @ block @ _DCT_T


def inverse_dct8(coeffs: np.ndarray) -> np.ndarray:
    """Exact inverse of forward_dct8 (up to floating-point tolerance)."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    return _DCT_T @ coeffs @ _DCT


def quantization_matrix(quality: int, chroma: bool = False) -> np.ndarray:
    """JPEG quantization table scaled by quality factor Q in [1, 100].

    Scaling follows the common libjpeg convention: s = 5000/Q for Q < 50,
    otherwise 200 - 2Q; each entry is clamp(floor((base * s + 50) / 100),
    1, 255). Q=50 reproduces the base table, Q=100 gives all ones.
    """
    quality = int(quality)
    if not 1 <= quality <= 100:
        raise ValueError(f"quality factor out of range [1, 100]: {quality}")
    base = CHROMA_BASE_TABLE if chroma else LUMA_BASE_TABLE
    s = 5000.0 / quality if quality < 50 else 200.0 - 2.0 * quality
    scaled = np.floor((base * s + 50.0) / 100.0)
    return np.clip(scaled, 1, 255).astype(np.int64)


def quantization_vector(quality: int, chroma: bool = False) -> np.ndarray:
    """Quantization table reordered so entry k matches zigzag index k."""
    return quantization_matrix(quality, chroma).reshape(64)[ZIGZAG_INDEX]


def rgb_to_ycbcr(rgb: np.ndarray) -> np.ndarray:
    """ITU-R BT.601 full-range RGB -> YCbCr, float output in [0, 255]."""
    rgb = np.asarray(rgb, dtype=np.float64)
    y = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    cb = -0.168736 * rgb[..., 0] - 0.331264 * rgb[..., 1] + 0.5 * rgb[..., 2] + 128.0
    cr = 0.5 * rgb[..., 0] - 0.418688 * rgb[..., 1] - 0.081312 * rgb[..., 2] + 128.0
    return np.stack([y, cb, cr], axis=-1)


def ycbcr_to_rgb(ycbcr: np.ndarray) -> np.ndarray:
    """Inverse of rgb_to_ycbcr, float output (callers clamp)."""
    ycbcr = np.asarray(ycbcr, dtype=np.float64)
    y = ycbcr[..., 0]
    cb = ycbcr[..., 1] - 128.0
    cr = ycbcr[..., 2] - 128.0
    r = y + 1.402 * cr
    g = y - 0.344136 * cb - 0.714136 * cr
    b = y + 1.772 * cb
    return np.stack([r, g, b], axis=-1)


@dataclass
class EncodedImage:
    """Quantized DCT representation of an image.

    planes is an int32 array of shape (64, channels, n_blocks): entry
    [k, ch, b] is the k-th zigzag coefficient of block b (block-raster
    order) of channel ch. Transmission order is k outer, channel inner,
    so every DC plane precedes every k=1 plane.
    """

    width: int
    height: int
    quality: int
    color_mode: str
    planes: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.color_mode not in COLOR_MODES:
            raise ValueError(f"unknown color mode: {self.color_mode}")
        expected = (64, self.channels, self.n_blocks)
        if self.planes.shape != expected:
            raise ValueError(f"planes shape {self.planes.shape} != {expected}")

    @property
    def channels(self) -> int:
        return 1 if self.color_mode == "luma" else 3

    @property
    def blocks_w(self) -> int:
        return (self.width + 7) // 8

    @property
    def blocks_h(self) -> int:
        return (self.height + 7) // 8

    @property
    def n_blocks(self) -> int:
        return self.blocks_w * self.blocks_h

    def quant_vector(self, channel: int) -> np.ndarray:
        return quantization_vector(self.quality, chroma=channel > 0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EncodedImage):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and self.quality == other.quality
            and self.color_mode == other.color_mode
            and np.array_equal(self.planes, other.planes)
        )


def _split_blocks(channel: np.ndarray) -> np.ndarray:
    """(H, W) -> (n_blocks, 8, 8) in block-raster order; H, W multiples of 8."""
    h, w = channel.shape
    blocks = channel.reshape(h // 8, 8, w // 8, 8).transpose(0, 2, 1, 3)
    return blocks.reshape(-1, 8, 8)


def _join_blocks(blocks: np.ndarray, blocks_h: int, blocks_w: int) -> np.ndarray:
    grid = blocks.reshape(blocks_h, blocks_w, 8, 8).transpose(0, 2, 1, 3)
    return grid.reshape(blocks_h * 8, blocks_w * 8)


def _round_half_away(x: np.ndarray) -> np.ndarray:
    # np.round is half-to-even; JPEG practice rounds half away from zero.
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def encode_image(img: np.ndarray, quality: int = 90, color_mode: str = "ycbcr") -> EncodedImage:
    """Encode an 8-bit image into quantized zigzag coefficient planes.

    The image is padded to multiples of 8 by edge replication; each channel
    is level-shifted by -128, block-transformed, and quantized with
    round-half-away-from-zero. RGB input in ycbcr mode is converted to
    YCbCr 4:4:4 first; luma mode keeps (or derives) a single channel.
    """
    img = np.asarray(img)
    if img.ndim == 2:
        img = img[:, :, None]
    if img.ndim != 3 or img.shape[2] not in (1, 3):
        raise ValueError(f"unsupported channel count: {img.shape}")
    if color_mode not in COLOR_MODES:
        raise ValueError(f"unknown color mode: {color_mode}")

    height, width = img.shape[:2]
    if color_mode == "ycbcr":
        if img.shape[2] != 3:
            raise ValueError("ycbcr mode requires a 3-channel image")
        data = rgb_to_ycbcr(img)
    else:
        if img.shape[2] == 3:
            data = rgb_to_ycbcr(img)[..., :1]
        else:
            data = img.astype(np.float64)

    pad_h = (-height) % 8
    pad_w = (-width) % 8
    data = np.pad(data, ((0, pad_h), (0, pad_w), (0, 0)), mode="edge")

    channels = data.shape[2]
    n_blocks = (data.shape[0] // 8) * (data.shape[1] // 8)
    planes = np.empty((64, channels, n_blocks), dtype=np.int32)
    for ch in range(channels):
        blocks = _split_blocks(data[:, :, ch]) - 128.0
        coeffs = forward_dct8(blocks).reshape(-1, 64)
        zz = coeffs[:, ZIGZAG_INDEX]
        qvec = quantization_vector(quality, chroma=ch > 0)
        planes[:, ch, :] = _round_half_away(zz / qvec).astype(np.int32).T

    return EncodedImage(width=width, height=height, quality=int(quality),
                        color_mode=color_mode, planes=planes)


def reconstruct(enc: EncodedImage, mask: np.ndarray | None = None) -> np.ndarray:
    """Rebuild the pixel image from the coefficients selected by mask.

    Masked-out coefficients are treated as zero after dequantization. The
    result is level-unshifted, clamped to [0, 255], converted back to RGB
    when applicable, and cropped to the original size. Deterministic.
    """
    if mask is None:
        mask = full_mask(enc)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != enc.planes.shape:
        raise ValueError(f"mask shape {mask.shape} != planes {enc.planes.shape}")

    out = np.empty((enc.blocks_h * 8, enc.blocks_w * 8, enc.channels))
    for ch in range(enc.channels):
        zz = np.where(mask[:, ch, :], enc.planes[:, ch, :], 0).T.astype(np.float64)
        zz *= enc.quant_vector(ch)
        flat = np.zeros((enc.n_blocks, 64))
        flat[:, ZIGZAG_INDEX] = zz
        samples = inverse_dct8(flat.reshape(-1, 8, 8)) + 128.0
        out[:, :, ch] = _join_blocks(samples, enc.blocks_h, enc.blocks_w)

    out = out[: enc.height, : enc.width, :]
    if enc.color_mode == "ycbcr":
        out = ycbcr_to_rgb(np.clip(out, 0.0, 255.0))
    else:
        out = out[:, :, 0]
    return np.clip(_round_half_away(out), 0, 255).astype(np.uint8)


def full_mask(enc: EncodedImage) -> np.ndarray:
    return np.ones(enc.planes.shape, dtype=bool)


def mask_keep_top_n(enc: EncodedImage, n: int) -> np.ndarray:
    """Keep planes 0..n-1 for all channels and blocks, n in [1, 64]."""
    if not 1 <= n <= 64:
        raise ValueError(f"top-n out of range [1, 64]: {n}")
    mask = np.zeros(enc.planes.shape, dtype=bool)
    mask[:n] = True
    return mask


def mask_remove_plane(enc: EncodedImage, k: int) -> np.ndarray:
    """Full mask with exactly plane k absent (all channels)."""
    if not 0 <= k <= 63:
        raise ValueError(f"plane index out of range [0, 63]: {k}")
    mask = full_mask(enc)
    mask[k] = False
    return mask


def mask_from_received(enc: EncodedImage, received) -> np.ndarray:
    """Mask marking only the given (channel, plane, block) triples present."""
    mask = np.zeros(enc.planes.shape, dtype=bool)
    for ch, k, b in received:
        mask[k, ch, b] = True
    return mask


def augment_drop(enc: EncodedImage, drop_prob, seed: int, per_plane: bool = False) -> np.ndarray:
    """Sample a mask dropping each coefficient with a per-plane probability.

    drop_prob is a scalar or a length-64 vector p[k] in [0, 1]; each
    (channel, plane k, block) entry is independently marked absent with
    probability p[k]. With per_plane=True a whole (channel, plane) is kept
    or dropped at once. Deterministic given seed.
    """
    p = np.broadcast_to(np.asarray(drop_prob, dtype=np.float64), (64,))
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise ValueError("drop probabilities must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    if per_plane:
        draw = rng.random((64, enc.channels, 1)) >= p[:, None, None]
        return np.broadcast_to(draw, enc.planes.shape).copy()
    return rng.random(enc.planes.shape) >= p[:, None, None]


def mse(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def psnr(a: np.ndarray, b: np.ndarray, peak: float = 255.0) -> float:
    """Peak signal-to-noise ratio in dB; inf for identical inputs."""
    m = mse(a, b)
    if m == 0.0:
        return float("inf")
    return float(10.0 * np.log10(peak * peak / m))


def masked_coefficient_error(enc: EncodedImage, mask: np.ndarray) -> float:
    """Squared error in the dequantized-coefficient domain caused by mask.

    By orthonormality of the DCT this equals the (pre-clamping) pixel-domain
    squared error of reconstructing with mask instead of the full mask.
    """
    total = 0.0
    for ch in range(enc.channels):
        dropped = np.where(mask[:, ch, :], 0, enc.planes[:, ch, :]).astype(np.float64)
        dropped *= enc.quant_vector(ch)[:, None]
        total += float(np.sum(dropped * dropped))
    return total
