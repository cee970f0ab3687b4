import numpy as np
import pytest

from semcodec import (
    EncodedImage,
    HeaderLostError,
    Packet,
    StreamFormatError,
    depacketize,
    deserialize,
    encode_image,
    packetize,
    psnr,
    reconstruct,
    serialize,
)
from semcodec.bitstream import (
    PAYLOAD_SIZE,
    min_bit_width,
    parse_header,
    plane_bit_widths,
    read_pkts,
    read_semc,
    write_pkts,
    write_semc,
)


def random_encoded(seed, width=40, height=32, color_mode="ycbcr"):
    """EncodedImage with random planes spanning the representable range."""
    rng = np.random.default_rng(seed)
    channels = 1 if color_mode == "luma" else 3
    n_blocks = ((width + 7) // 8) * ((height + 7) // 8)
    planes = np.zeros((64, channels, n_blocks), dtype=np.int32)
    for k in range(64):
        for ch in range(channels):
            width_bits = rng.integers(0, 12)
            if width_bits:
                lo = -(1 << (width_bits - 1))
                hi = (1 << (width_bits - 1)) - 1
                planes[k, ch] = rng.integers(lo, hi + 1, size=n_blocks)
    return EncodedImage(width=width, height=height, quality=90,
                        color_mode=color_mode, planes=planes)


class TestMinBitWidth:
    @pytest.mark.parametrize("values,expected", [
        ([0, 0, 0], 0),
        ([-1], 1),
        ([1], 2),
        ([-2, 1], 2),
        ([3], 3),
        ([-4], 3),
        ([4], 4),
        ([127], 8),
        ([-128], 8),
        ([-128, 127], 8),
        ([255], 9),
        ([-1024], 11),
        ([1024], 12),
    ])
    def test_known_widths(self, values, expected):
        assert min_bit_width(np.array(values)) == expected

    def test_matches_python_reference(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            v = int(rng.integers(-5000, 5000))
            if v == 0:
                continue
            b = min_bit_width(np.array([v]))
            assert -(1 << (b - 1)) <= v <= (1 << (b - 1)) - 1
            if b > 1:
                smaller = b - 1
                assert not (-(1 << (smaller - 1)) <= v <= (1 << (smaller - 1)) - 1)


class TestSerialize:
    def test_gray_image_is_header_only(self):
        enc = encode_image(np.full((16, 16, 3), 128, dtype=np.uint8), quality=90)
        stream = serialize(enc)
        header = parse_header(stream)
        assert len(stream) == header.header_size
        assert not header.bit_widths.any()

    def test_round_trip_bit_exact(self):
        for seed in range(8):
            enc = random_encoded(seed)
            dec, mask = deserialize(serialize(enc))
            assert dec == enc
            assert mask.all()

    def test_round_trip_luma(self):
        enc = random_encoded(1, color_mode="luma")
        dec, mask = deserialize(serialize(enc))
        assert dec == enc
        assert mask.all()

    def test_round_trip_real_images(self, fixture_corpus):
        for img in fixture_corpus[:3]:
            enc = encode_image(img, quality=85)
            dec, mask = deserialize(serialize(enc))
            assert dec == enc and mask.all()

    def test_header_determinism(self):
        enc = random_encoded(5)
        assert serialize(enc) == serialize(enc)

    def test_header_fits_one_packet_payload(self):
        enc = random_encoded(2)
        assert parse_header(serialize(enc)).header_size <= PAYLOAD_SIZE

    def test_bad_magic_rejected(self):
        enc = random_encoded(3)
        stream = bytearray(serialize(enc))
        stream[0] = 0x58
        with pytest.raises(StreamFormatError):
            parse_header(bytes(stream))


class TestPacketize:
    def test_single_packet_boundary(self):
        packets = packetize(b"x" * PAYLOAD_SIZE)
        assert len(packets) == 1 and packets[0].total == 1

    def test_two_packet_boundary_padded(self):
        packets = packetize(b"x" * (PAYLOAD_SIZE + 1))
        assert len(packets) == 2
        assert packets[1].payload == b"x" + b"\x00" * (PAYLOAD_SIZE - 1)

    def test_empty_stream_rejected(self):
        with pytest.raises(ValueError):
            packetize(b"")

    def test_packet_invariants(self):
        with pytest.raises(ValueError):
            Packet(seq=2, total=2, payload=b"\x00" * PAYLOAD_SIZE)
        with pytest.raises(ValueError):
            Packet(seq=0, total=1, payload=b"short")

    def test_wire_round_trip(self):
        pkt = packetize(b"a" * 2000)[1]
        assert Packet.from_wire(pkt.to_wire()) == pkt

    def test_flower_sized_packet_count(self, flower_like_image):
        # Order-of-magnitude check against the ~36 packets / ~2 DC packets
        # regime of photographic content at this size.
        enc = encode_image(flower_like_image, quality=90)
        stream = serialize(enc)
        packets = packetize(stream)
        assert 18 <= len(packets) <= 72
        header = parse_header(stream)
        plane0_bytes = int(header.plane_byte_lengths()[0].sum())
        assert 1 <= round(plane0_bytes / PAYLOAD_SIZE) <= 4


class TestDepacketize:
    def test_lossless_reassembly(self):
        enc = random_encoded(7)
        dec, mask = depacketize(packetize(serialize(enc)))
        assert dec == enc and mask.all()

    def test_missing_header_packet_fails(self):
        packets = packetize(serialize(random_encoded(8)))
        with pytest.raises(HeaderLostError):
            depacketize(packets[1:])

    def test_duplicate_seq_rejected(self):
        packets = packetize(serialize(random_encoded(8)))
        with pytest.raises(ValueError):
            depacketize(packets + [packets[1]])

    def test_single_loss_masks_only_lost_span(self):
        enc = random_encoded(9, width=96, height=96)
        stream = serialize(enc)
        packets = packetize(stream)
        assert len(packets) >= 4
        lost_seq = 2
        dec, mask = depacketize([p for p in packets if p.seq != lost_seq])
        # Present coefficients decode to their original values (locality).
        assert np.array_equal(np.where(mask, dec.planes, 0),
                              np.where(mask, enc.planes, 0))
        assert not mask.all()
        # Absent coefficients are exactly those whose byte span hits the
        # lost packet.
        header = parse_header(stream)
        offsets = header.plane_offsets()
        widths = header.bit_widths
        lo_byte = lost_seq * PAYLOAD_SIZE
        hi_byte = lo_byte + PAYLOAD_SIZE
        for k in range(64):
            for ch in range(enc.channels):
                w = int(widths[k, ch])
                if w == 0:
                    assert mask[k, ch].all()
                    continue
                start = int(offsets[k, ch])
                idx = np.arange(enc.n_blocks)
                first = start + (idx * w) // 8
                last = start + ((idx + 1) * w - 1) // 8
                overlaps = (first < hi_byte) & (last >= lo_byte)
                assert np.array_equal(mask[k, ch], ~overlaps)

    def test_prefix_masks_are_nested(self):
        enc = random_encoded(10, width=80, height=80)
        packets = packetize(serialize(enc))
        prev = None
        for m in range(1, len(packets) + 1):
            _, mask = depacketize(packets[:m])
            if prev is not None:
                assert (mask | prev).sum() == mask.sum()
            prev = mask

    def test_early_loss_hurts_more_than_late_loss(self, fixture_corpus):
        img = fixture_corpus[5]
        enc = encode_image(img, quality=90)
        packets = packetize(serialize(enc))
        assert len(packets) >= 4

        def rec_without(seq):
            dec, mask = depacketize([p for p in packets if p.seq != seq])
            return psnr(img, reconstruct(dec, mask))

        assert rec_without(len(packets) - 1) > rec_without(1)

    def test_total_mismatch_rejected(self):
        packets = packetize(serialize(random_encoded(11)))
        bad = [Packet(seq=p.seq, total=p.total + 1, payload=p.payload)
               for p in packets]
        with pytest.raises(StreamFormatError):
            depacketize(bad)


class TestFiles:
    def test_semc_round_trip(self, tmp_path):
        enc = random_encoded(12)
        path = tmp_path / "img.semc"
        stream = write_semc(path, enc)
        assert read_semc(path) == stream
        dec, _ = deserialize(read_semc(path))
        assert dec == enc

    def test_pkts_round_trip(self, tmp_path):
        packets = packetize(serialize(random_encoded(13)))
        path = tmp_path / "cap.pkts"
        write_pkts(path, packets)
        assert read_pkts(path) == packets

    def test_pkts_rejects_ragged_file(self, tmp_path):
        path = tmp_path / "bad.pkts"
        path.write_bytes(b"\x00" * 1000)
        with pytest.raises(StreamFormatError):
            read_pkts(path)


class TestPlaneWidthsConsistency:
    def test_widths_match_header(self):
        enc = random_encoded(14)
        header = parse_header(serialize(enc))
        assert np.array_equal(plane_bit_widths(enc), header.bit_widths)
        assert (header.value_counts == enc.n_blocks).all()
