"""Bit-exact serialization of encoded images and fixed-size packetization.

Stream layout (".semc" file format, all multi-byte integers little-endian):

    magic       4 bytes  "SEMC"
    version     u8       currently 1
    width       u16
    height      u16
    channels    u8       1 or 3
    quality     u8       quality factor in [1, 100]
    color_mode  u8       0 = luma, 1 = ycbcr 4:4:4
    plane table 64 * channels entries of (bit_width u8, value_count u32),
                in transmission order (zigzag index outer, channel inner)
    payload     one record per plane, same order: value_count values packed
                MSB-first in bit_width bits, two's complement, zero-padded
                to a byte boundary; planes with bit_width 0 take no bytes

The header fully determines the byte offset and bit span of every
coefficient, so a receiver can decode exactly the coefficients whose bytes
arrived. Packets (".pkts" format) are fixed 1024-byte units: an 8-byte
header (seq u32, total u32) followed by a 1016-byte slice of the stream,
the last one zero-padded. Packet 0 always contains the complete stream
header, which is guaranteed to fit by construction.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .dct import COLOR_MODES, EncodedImage

MAGIC = b"SEMC"
VERSION = 1
PACKET_SIZE = 1024
PACKET_HEADER_SIZE = 8
PAYLOAD_SIZE = PACKET_SIZE - PACKET_HEADER_SIZE

_FIXED_HEADER = struct.Struct("<4sBHHBBB")
_PLANE_ENTRY = struct.Struct("<BI")


class StreamFormatError(ValueError):
    """Malformed stream, header, or packet bytes."""


class HeaderLostError(Exception):
    """Packet 0 (the stream header) was not received; image undecodable."""


def min_bit_width(values: np.ndarray) -> int:
    """Minimal two's-complement width holding every value; 0 if all zero."""
    values = np.asarray(values, dtype=np.int64)
    if values.size == 0 or not values.any():
        return 0
    # For v >= 0 the width is bitlen(v) + 1, for v < 0 it is bitlen(~v) + 1.
    m = int(np.maximum(values, ~values).max())
    return m.bit_length() + 1


def plane_bit_widths(enc: EncodedImage) -> np.ndarray:
    """Per-plane minimal bit widths, shape (64, channels)."""
    widths = np.zeros((64, enc.channels), dtype=np.uint8)
    for k in range(64):
        for ch in range(enc.channels):
            widths[k, ch] = min_bit_width(enc.planes[k, ch])
    return widths


@dataclass
class StreamHeader:
    width: int
    height: int
    channels: int
    quality: int
    color_mode: str
    bit_widths: np.ndarray   # (64, channels) in plane order
    value_counts: np.ndarray  # (64, channels)

    @property
    def header_size(self) -> int:
        return _FIXED_HEADER.size + _PLANE_ENTRY.size * 64 * self.channels

    def plane_byte_lengths(self) -> np.ndarray:
        """Payload bytes per plane in transmission order, shape (64, channels)."""
        bits = self.bit_widths.astype(np.int64) * self.value_counts.astype(np.int64)
        return (bits + 7) // 8

    def plane_offsets(self) -> np.ndarray:
        """Absolute stream byte offset of each plane, shape (64, channels)."""
        lengths = self.plane_byte_lengths().reshape(-1)
        offsets = self.header_size + np.concatenate(([0], np.cumsum(lengths)[:-1]))
        return offsets.reshape(64, self.channels)

    @property
    def stream_length(self) -> int:
        return self.header_size + int(self.plane_byte_lengths().sum())


def _pack_plane(values: np.ndarray, width: int) -> bytes:
    if width == 0:
        return b""
    u = (values.astype(np.int64) & ((1 << width) - 1)).astype(np.uint64)
    shifts = np.arange(width - 1, -1, -1, dtype=np.uint64)
    bits = ((u[:, None] >> shifts) & 1).astype(np.uint8)
    return np.packbits(bits.reshape(-1)).tobytes()


def _unpack_plane(data: np.ndarray, width: int, count: int) -> np.ndarray:
    if width == 0:
        return np.zeros(count, dtype=np.int32)
    bits = np.unpackbits(data)[: count * width].reshape(count, width).astype(np.int64)
    weights = 1 << np.arange(width - 1, -1, -1, dtype=np.int64)
    u = bits @ weights
    return (u - (bits[:, 0] << width)).astype(np.int32)


def serialize(enc: EncodedImage) -> bytes:
    """Encode an EncodedImage as header plus bit-packed payload."""
    widths = plane_bit_widths(enc)
    if widths.max(initial=0) > 16:
        raise AssertionError("coefficient exceeds 16-bit width")
    header = bytearray()
    header += _FIXED_HEADER.pack(MAGIC, VERSION, enc.width, enc.height,
                                 enc.channels, enc.quality,
                                 COLOR_MODES.index(enc.color_mode))
    for k in range(64):
        for ch in range(enc.channels):
            header += _PLANE_ENTRY.pack(int(widths[k, ch]), enc.n_blocks)
    if len(header) > PAYLOAD_SIZE:
        raise StreamFormatError("stream header does not fit one packet payload")

    payload = bytearray()
    for k in range(64):
        for ch in range(enc.channels):
            payload += _pack_plane(enc.planes[k, ch], int(widths[k, ch]))
    return bytes(header) + bytes(payload)


def parse_header(data: bytes) -> StreamHeader:
    if len(data) < _FIXED_HEADER.size:
        raise StreamFormatError("stream shorter than fixed header")
    magic, version, width, height, channels, quality, mode_code = \
        _FIXED_HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise StreamFormatError(f"bad magic: {magic!r}")
    if version != VERSION:
        raise StreamFormatError(f"unsupported version: {version}")
    if channels not in (1, 3) or mode_code >= len(COLOR_MODES):
        raise StreamFormatError("corrupt header fields")
    table_size = _PLANE_ENTRY.size * 64 * channels
    if len(data) < _FIXED_HEADER.size + table_size:
        raise StreamFormatError("stream shorter than plane table")
    bit_widths = np.zeros((64, channels), dtype=np.uint8)
    value_counts = np.zeros((64, channels), dtype=np.int64)
    offset = _FIXED_HEADER.size
    for k in range(64):
        for ch in range(channels):
            w, c = _PLANE_ENTRY.unpack_from(data, offset)
            if w > 16:
                raise StreamFormatError(f"plane bit width out of range: {w}")
            bit_widths[k, ch] = w
            value_counts[k, ch] = c
            offset += _PLANE_ENTRY.size
    return StreamHeader(width=width, height=height, channels=channels,
                        quality=quality, color_mode=COLOR_MODES[mode_code],
                        bit_widths=bit_widths, value_counts=value_counts)


def _decode_buffer(header: StreamHeader, buf: np.ndarray,
                   avail: np.ndarray) -> tuple[EncodedImage, np.ndarray]:
    """Decode every coefficient whose bit span lies in available bytes."""
    n_blocks = int(header.value_counts[0, 0])
    planes = np.zeros((64, header.channels, n_blocks), dtype=np.int32)
    mask = np.zeros((64, header.channels, n_blocks), dtype=bool)
    offsets = header.plane_offsets()
    lengths = header.plane_byte_lengths()
    missing = np.concatenate(([0], np.cumsum(~avail)))

    for k in range(64):
        for ch in range(header.channels):
            width = int(header.bit_widths[k, ch])
            count = int(header.value_counts[k, ch])
            if width == 0:
                # All-zero plane: known exactly from the reliable header.
                mask[k, ch, :] = True
                continue
            start = int(offsets[k, ch])
            data = buf[start: start + int(lengths[k, ch])]
            planes[k, ch, :] = _unpack_plane(data, width, count)
            idx = np.arange(count, dtype=np.int64)
            lo = start + (idx * width) // 8
            hi = start + ((idx + 1) * width - 1) // 8
            present = (missing[hi + 1] - missing[lo]) == 0
            planes[k, ch, ~present] = 0
            mask[k, ch, :] = present

    enc = EncodedImage(width=header.width, height=header.height,
                       quality=header.quality, color_mode=header.color_mode,
                       planes=planes)
    return enc, mask


def deserialize(stream: bytes) -> tuple[EncodedImage, np.ndarray]:
    """Decode a complete stream (no loss); mask comes back all-true."""
    header = parse_header(stream)
    if len(stream) < header.stream_length:
        raise StreamFormatError("stream truncated")
    buf = np.frombuffer(stream[: header.stream_length], dtype=np.uint8)
    avail = np.ones(header.stream_length, dtype=bool)
    return _decode_buffer(header, buf, avail)


@dataclass(frozen=True)
class Packet:
    """Fixed 1024-byte transmission unit: 8-byte header + 1016-byte payload."""

    seq: int
    total: int
    payload: bytes

    def __post_init__(self):
        if not 0 <= self.seq < self.total:
            raise ValueError(f"packet seq {self.seq} outside total {self.total}")
        if len(self.payload) != PAYLOAD_SIZE:
            raise ValueError(f"payload must be {PAYLOAD_SIZE} bytes")

    def to_wire(self) -> bytes:
        return struct.pack("<II", self.seq, self.total) + self.payload

    @classmethod
    def from_wire(cls, data: bytes) -> "Packet":
        if len(data) != PACKET_SIZE:
            raise StreamFormatError(f"packet must be {PACKET_SIZE} bytes")
        seq, total = struct.unpack_from("<II", data, 0)
        return cls(seq=seq, total=total, payload=data[PACKET_HEADER_SIZE:])


def packetize(stream: bytes) -> list[Packet]:
    """Split a stream into 1016-byte payload slices, zero-padding the last."""
    if not stream:
        raise ValueError("cannot packetize an empty stream")
    total = (len(stream) + PAYLOAD_SIZE - 1) // PAYLOAD_SIZE
    packets = []
    for seq in range(total):
        chunk = stream[seq * PAYLOAD_SIZE: (seq + 1) * PAYLOAD_SIZE]
        packets.append(Packet(seq=seq, total=total,
                              payload=chunk.ljust(PAYLOAD_SIZE, b"\x00")))
    return packets


def depacketize(packets) -> tuple[EncodedImage, np.ndarray]:
    """Reassemble coefficients and a presence mask from received packets.

    Coefficients whose bit span is fully covered by received payload bytes
    are decoded and marked present; the rest are zeroed and marked absent.
    Bit-flipped payload decodes to whatever value it encodes, undetected.
    Raises HeaderLostError when packet 0 is missing.
    """
    by_seq: dict[int, Packet] = {}
    total = None
    for pkt in packets:
        if pkt.seq in by_seq:
            raise ValueError(f"duplicate packet seq {pkt.seq}")
        if total is None:
            total = pkt.total
        elif pkt.total != total:
            raise StreamFormatError("inconsistent packet totals")
        by_seq[pkt.seq] = pkt
    if 0 not in by_seq:
        raise HeaderLostError("packet 0 with the stream header was lost")

    header = parse_header(by_seq[0].payload)
    stream_length = header.stream_length
    expected_total = (stream_length + PAYLOAD_SIZE - 1) // PAYLOAD_SIZE
    if total != expected_total:
        raise StreamFormatError(
            f"packet total {total} does not match header ({expected_total})")

    buf = np.zeros(stream_length, dtype=np.uint8)
    avail = np.zeros(stream_length, dtype=bool)
    for seq, pkt in by_seq.items():
        start = seq * PAYLOAD_SIZE
        end = min(start + PAYLOAD_SIZE, stream_length)
        if start >= end:
            raise StreamFormatError(f"packet seq {seq} beyond stream end")
        buf[start:end] = np.frombuffer(pkt.payload[: end - start], dtype=np.uint8)
        avail[start:end] = True
    return _decode_buffer(header, buf, avail)


def write_semc(path, enc: EncodedImage) -> bytes:
    stream = serialize(enc)
    with open(path, "wb") as fh:
        fh.write(stream)
    return stream


def read_semc(path) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


def write_pkts(path, packets) -> None:
    """Packet capture: concatenated 1024-byte packets ordered by seq."""
    with open(path, "wb") as fh:
        for pkt in sorted(packets, key=lambda p: p.seq):
            fh.write(pkt.to_wire())


def read_pkts(path) -> list[Packet]:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) % PACKET_SIZE:
        raise StreamFormatError("packet capture is not a multiple of 1024 bytes")
    return [Packet.from_wire(data[i: i + PACKET_SIZE])
            for i in range(0, len(data), PACKET_SIZE)]
