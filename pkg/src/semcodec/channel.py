"""Deterministic, seeded corruption of packet streams.

Models a wireless hop as three composable stages applied in a fixed order:
deadline-budget truncation, packet drops, and uniform payload bit errors.
Packet 0 carries the stream header and is treated as error-free: the drop
and bit-error injectors never touch it. Forward error correction is modeled
as bit immunity for a protected set plus a byte overhead charged against
the budget, not as an implemented code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import bitstream
from .bitstream import PACKET_SIZE, PAYLOAD_SIZE, Packet, StreamHeader
from .dct import EncodedImage, encode_image

PROTECTION_MODES = ("none", "dc_sign", "dc_full")


@dataclass
class ChannelConfig:
    """Corruption parameters for one transmission.

    rate_bps and deadline_s bound the byte budget; deadline_s=None means no
    deadline (everything is delivered). Loss is either drop_count distinct
    packets or an independent per-packet drop_rate, never both.
    """

    bit_error_prob: float = 0.0
    drop_count: int | None = None
    drop_rate: float | None = None
    rate_bps: float | None = None
    deadline_s: float | None = None
    compute_time_s: float = 0.0
    protection: str = "none"
    fec_overhead_factor: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.bit_error_prob <= 1.0:
            raise ValueError(f"bit error probability out of [0, 1]: {self.bit_error_prob}")
        if self.drop_count is not None and self.drop_rate is not None:
            raise ValueError("specify drop_count or drop_rate, not both")
        if self.drop_count is not None and self.drop_count < 0:
            raise ValueError("drop_count must be non-negative")
        if self.drop_rate is not None and not 0.0 <= self.drop_rate <= 1.0:
            raise ValueError(f"drop rate out of [0, 1]: {self.drop_rate}")
        if self.protection not in PROTECTION_MODES:
            raise ValueError(f"unknown protection mode: {self.protection}")
        if self.fec_overhead_factor < 0.0:
            raise ValueError("fec_overhead_factor must be >= 0")
        if self.deadline_s is not None:
            if self.rate_bps is None or self.rate_bps <= 0.0:
                raise ValueError("a finite deadline requires a positive rate")
            if self.deadline_s < self.compute_time_s:
                raise ValueError("deadline must cover the compute time")


def channel_config_from_file(path) -> dict:
    """Parse a plain-text key=value run file into ChannelConfig kwargs.

    Accepts the dataclass field names plus rate_mbps / deadline_ms /
    compute_time_ms conveniences; '#' starts a comment.
    """
    kwargs: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key == "rate_mbps":
                kwargs["rate_bps"] = float(value) * 1e6
            elif key == "deadline_ms":
                kwargs["deadline_s"] = float(value) * 1e-3
            elif key == "compute_time_ms":
                kwargs["compute_time_s"] = float(value) * 1e-3
            elif key == "protection":
                kwargs["protection"] = value
            elif key in ("drop_count", "seed"):
                kwargs[key] = int(value)
            elif key in ("bit_error_prob", "drop_rate", "rate_bps", "deadline_s",
                         "compute_time_s", "fec_overhead_factor"):
                kwargs[key] = float(value)
            else:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
    return kwargs


@dataclass
class TransmissionReport:
    packets_sent: int = 0
    packets_delivered: int = 0
    bits_flipped: int = 0
    bytes_budget: int | None = None
    protected_bytes: int = 0          # FEC overhead charged to the budget
    effective_payload_bytes: int = 0  # real stream bytes among delivered packets


def bytes_budget(cfg: ChannelConfig) -> int | None:
    """floor(rate * (deadline - compute_time) / 8), or None when unbounded."""
    if cfg.deadline_s is None:
        return None
    return math.floor(cfg.rate_bps * (cfg.deadline_s - cfg.compute_time_s) / 8.0)


def protected_bit_set(enc: EncodedImage, mode: str,
                      fec_overhead_factor: float = 1.0) -> tuple[np.ndarray, int]:
    """Absolute stream bit positions shielded from errors, plus overhead bytes.

    dc_sign protects the sign (most significant) bit of every plane-0 value
    across all channels; dc_full protects every bit of every plane-0 value.
    Overhead is ceil(fec_overhead_factor * protected_bits / 8).
    """
    if mode not in PROTECTION_MODES:
        raise ValueError(f"unknown protection mode: {mode}")
    if mode == "none":
        return np.empty(0, dtype=np.int64), 0

    widths = bitstream.plane_bit_widths(enc)
    counts = np.full((64, enc.channels), enc.n_blocks, dtype=np.int64)
    header = StreamHeader(width=enc.width, height=enc.height,
                          channels=enc.channels, quality=enc.quality,
                          color_mode=enc.color_mode, bit_widths=widths,
                          value_counts=counts)
    offsets = header.plane_offsets()

    positions = []
    for ch in range(enc.channels):
        w = int(widths[0, ch])
        if w == 0:
            continue
        first_bit = int(offsets[0, ch]) * 8
        value_starts = first_bit + np.arange(enc.n_blocks, dtype=np.int64) * w
        if mode == "dc_sign":
            positions.append(value_starts)
        else:
            positions.append((value_starts[:, None]
                              + np.arange(w, dtype=np.int64)[None, :]).reshape(-1))
    bits = np.sort(np.concatenate(positions)) if positions else np.empty(0, dtype=np.int64)
    overhead = math.ceil(fec_overhead_factor * bits.size / 8.0)
    return bits, overhead


def truncate_to_budget(packets: list[Packet], cfg: ChannelConfig,
                       overhead_bytes: int = 0) -> tuple[list[Packet], TransmissionReport]:
    """Deliver the longest packet prefix whose wire bytes fit the budget.

    Wire accounting is 1024 bytes per packet plus the FEC overhead. Packet 0
    is always delivered when the budget covers at least one packet; a budget
    below 1024 bytes delivers nothing (undecodable image).
    """
    budget = bytes_budget(cfg)
    report = TransmissionReport(packets_sent=len(packets), bytes_budget=budget,
                                protected_bytes=overhead_bytes)
    if budget is None:
        delivered = list(packets)
    elif budget < PACKET_SIZE:
        delivered = []
    else:
        fit = (budget - overhead_bytes) // PACKET_SIZE
        delivered = list(packets[: max(1, min(len(packets), fit))])
    report.packets_delivered = len(delivered)
    return delivered, report


def drop_packets(packets: list[Packet], cfg: ChannelConfig) -> list[Packet]:
    """Remove payload packets at random; packet 0 is never dropped.

    drop_count picks n distinct packets uniformly without replacement among
    those present with seq >= 1; drop_rate drops each independently.
    Deterministic given cfg.seed.
    """
    candidates = [p for p in packets if p.seq != 0]
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed & 0xFFFFFFFFFFFFFFFF, 1]))
    if cfg.drop_count is not None:
        n = cfg.drop_count
        if n == 0:
            return list(packets)
        if n > len(candidates) - 1:
            raise ValueError(
                f"cannot drop {n} of {len(candidates)} payload packets")
        picked = rng.choice(len(candidates), size=n, replace=False)
        dropped = {candidates[i].seq for i in picked}
    elif cfg.drop_rate is not None:
        lost = rng.random(len(candidates)) < cfg.drop_rate
        dropped = {p.seq for p, is_lost in zip(candidates, lost) if is_lost}
    else:
        return list(packets)
    return [p for p in packets if p.seq not in dropped]


def inject_bit_errors(packets: list[Packet], cfg: ChannelConfig,
                      protected_bits: np.ndarray | None = None
                      ) -> tuple[list[Packet], int]:
    """Flip each payload bit of packets 1..end with probability p.

    Bits listed in protected_bits (absolute stream bit positions) and the
    whole of packet 0 are exempt. Flip patterns are keyed per packet seq,
    so losing one packet never changes the corruption of another.
    """
    p = cfg.bit_error_prob
    if p == 0.0:
        return list(packets), 0
    if protected_bits is None:
        protected_bits = np.empty(0, dtype=np.int64)

    out = []
    flipped = 0
    for pkt in packets:
        if pkt.seq == 0:
            out.append(pkt)
            continue
        rng = np.random.default_rng(
            np.random.SeedSequence([cfg.seed & 0xFFFFFFFFFFFFFFFF, 2, pkt.seq]))
        flips = rng.random(PAYLOAD_SIZE * 8) < p
        bit_lo = pkt.seq * PAYLOAD_SIZE * 8
        bit_hi = bit_lo + PAYLOAD_SIZE * 8
        local = protected_bits[(protected_bits >= bit_lo) & (protected_bits < bit_hi)]
        flips[local - bit_lo] = False
        flipped += int(flips.sum())
        xor_bytes = np.packbits(flips)
        payload = np.frombuffer(pkt.payload, dtype=np.uint8) ^ xor_bytes
        out.append(replace(pkt, payload=payload.tobytes()))
    return out, flipped


def transmit(stream: bytes, cfg: ChannelConfig) -> tuple[list[Packet], TransmissionReport]:
    """Run the full corruption pipeline: packetize, truncate, drop, bit errors.

    Protection is derived from the stream header so the caller only needs
    the serialized bytes. Returns the delivered packets (possibly empty)
    and the filled-in transmission report.
    """
    if cfg.protection != "none":
        enc, _ = bitstream.deserialize(stream)
        protected_bits, overhead = protected_bit_set(enc, cfg.protection,
                                                     cfg.fec_overhead_factor)
    else:
        protected_bits, overhead = np.empty(0, dtype=np.int64), 0

    packets = bitstream.packetize(stream)
    delivered, report = truncate_to_budget(packets, cfg, overhead_bytes=overhead)
    delivered = drop_packets(delivered, cfg) if delivered else delivered
    delivered, report.bits_flipped = inject_bit_errors(delivered, cfg, protected_bits)
    report.packets_delivered = len(delivered)
    report.effective_payload_bytes = sum(
        min(PAYLOAD_SIZE, len(stream) - p.seq * PAYLOAD_SIZE) for p in delivered)
    return delivered, report


def conventional_baseline(img: np.ndarray, cfg: ChannelConfig,
                          color_mode: str = "ycbcr") -> tuple[int, bytes] | None:
    """Pick the largest Q whose complete stream fits the budget, or fail.

    Mirrors deadline-constrained offloading with an ahead-of-time compression
    choice: the whole image (all 64 planes) must fit, so a budget below the
    Q=1 wire size means no inference at all. Returns (selected_q, stream).
    """
    budget = bytes_budget(cfg)

    def attempt(q: int) -> bytes:
        return bitstream.serialize(encode_image(img, quality=q, color_mode=color_mode))

    def wire_size(stream: bytes) -> int:
        return PACKET_SIZE * ((len(stream) + PAYLOAD_SIZE - 1) // PAYLOAD_SIZE)

    if budget is None:
        return 100, attempt(100)
    lo_stream = attempt(1)
    if wire_size(lo_stream) > budget:
        return None
    # Stream size is monotone non-decreasing in Q, so bisect the largest fit.
    lo, hi = 1, 100
    best = lo_stream
    while lo < hi:
        mid = (lo + hi + 1) // 2
        candidate = attempt(mid)
        if wire_size(candidate) <= budget:
            lo = mid
            best = candidate
        else:
            hi = mid - 1
    return lo, best
