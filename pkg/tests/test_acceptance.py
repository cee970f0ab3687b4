"""Acceptance suite: one test per release criterion, one pass/fail line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. Tolerances are fixed here, not calibrated elsewhere.
"""

import time

import numpy as np
import pytest

from semcodec import (
    ChannelConfig,
    bytes_budget,
    conventional_baseline,
    depacketize,
    drop_packets,
    encode_image,
    forward_dct8,
    inject_bit_errors,
    inverse_dct8,
    mask_keep_top_n,
    masked_coefficient_error,
    packetize,
    protected_bit_set,
    psnr,
    quantization_matrix,
    reconstruct,
    serialize,
    transmit,
    zigzag_position,
)
from semcodec.bitstream import PACKET_SIZE, PAYLOAD_SIZE
from semcodec.dct import CHROMA_BASE_TABLE, LUMA_BASE_TABLE


def report(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {status}: {name}{suffix}")
    assert ok, f"{name}{suffix}"


def test_criterion_zigzag_dct_correctness():
    start = time.perf_counter()
    cells = {zigzag_position(k) for k in range(64)}
    bijection = cells == {(r, c) for r in range(8) for c in range(8)}

    rng = np.random.default_rng(2024)
    blocks = rng.uniform(-128.0, 127.0, size=(10_000, 8, 8))
    coeffs = forward_dct8(blocks)
    round_trip = float(np.max(np.abs(inverse_dct8(coeffs) - blocks)))
    e_in = np.sum(blocks ** 2, axis=(1, 2))
    e_out = np.sum(coeffs ** 2, axis=(1, 2))
    parseval = float(np.max(np.abs(e_out - e_in) / e_in))
    elapsed = time.perf_counter() - start

    ok = bijection and round_trip <= 1e-6 and parseval <= 1e-9 and elapsed < 5.0
    report("zigzag/DCT correctness", ok,
           f"round_trip={round_trip:.2e}, parseval={parseval:.2e}, {elapsed:.2f}s")


def test_criterion_quantizer_formula():
    q50 = (np.array_equal(quantization_matrix(50), LUMA_BASE_TABLE)
           and np.array_equal(quantization_matrix(50, chroma=True),
                              CHROMA_BASE_TABLE))
    ones = np.ones((8, 8), dtype=int)
    q100 = (np.array_equal(quantization_matrix(100), ones)
            and np.array_equal(quantization_matrix(100, chroma=True), ones))
    report("quantizer formula", q50 and q100,
           f"Q=50 base tables: {q50}, Q=100 all ones: {q100}")


def test_criterion_lossless_path(fixture_corpus):
    start = time.perf_counter()
    worst = 0
    for img in fixture_corpus:
        enc = encode_image(img, quality=100)
        dec, mask = depacketize(packetize(serialize(enc)))
        assert mask.all() and dec == enc
        rec = reconstruct(dec, mask)
        worst = max(worst, int(np.max(np.abs(rec.astype(int) - img.astype(int)))))
    elapsed = time.perf_counter() - start
    ok = worst <= 4 and elapsed < 30.0
    report("lossless path", ok, f"max deviation={worst}, {elapsed:.2f}s")


def test_criterion_progressive_refinement(fixture_corpus):
    start = time.perf_counter()
    violations = 0
    top5_wins = True
    for img in fixture_corpus:
        enc = encode_image(img, quality=90)
        errors = [masked_coefficient_error(enc, mask_keep_top_n(enc, n))
                  for n in range(1, 65)]
        violations += sum(1 for a, b in zip(errors, errors[1:]) if b > a)
        p1 = psnr(img, reconstruct(enc, mask_keep_top_n(enc, 1)))
        p5 = psnr(img, reconstruct(enc, mask_keep_top_n(enc, 5)))
        top5_wins = top5_wins and (p5 > p1)
    elapsed = time.perf_counter() - start
    ok = violations == 0 and top5_wins and elapsed < 120.0
    report("progressive refinement", ok,
           f"violations={violations}, top5>top1={top5_wins}, {elapsed:.2f}s")


def test_criterion_channel_statistics():
    rng = np.random.default_rng(5)
    stream = rng.integers(0, 256, size=130 * PAYLOAD_SIZE, dtype=np.uint8).tobytes()
    packets = packetize(stream)
    payload_bits = (len(packets) - 1) * PAYLOAD_SIZE * 8
    assert payload_bits >= 10 ** 6

    rates_ok = True
    details = []
    for p in (0.01, 0.05, 0.1):
        _, flipped = inject_bit_errors(packets, ChannelConfig(bit_error_prob=p, seed=3))
        sigma = np.sqrt(payload_bits * p * (1 - p))
        rates_ok = rates_ok and abs(flipped - p * payload_bits) <= 3 * sigma
        details.append(f"p={p}: {flipped / payload_bits:.5f}")

    drops_ok = True
    for seed in range(10):
        kept = drop_packets(packets, ChannelConfig(drop_count=5, seed=seed))
        drops_ok = drops_ok and len(kept) == len(packets) - 5 and kept[0].seq == 0

    cfg = ChannelConfig(bit_error_prob=0.05, drop_count=3, seed=42)
    run1, _ = transmit(stream, cfg)
    run2, _ = transmit(stream, cfg)
    deterministic = (b"".join(p.to_wire() for p in run1)
                     == b"".join(p.to_wire() for p in run2))

    ok = rates_ok and drops_ok and deterministic
    report("channel statistics", ok,
           f"{', '.join(details)}, drops_ok={drops_ok}, deterministic={deterministic}")


def test_criterion_protection_accounting(fixture_corpus):
    total_sign = total_full = total_bits = 0
    for img in fixture_corpus:
        enc = encode_image(img, quality=90)
        total_bits += len(serialize(enc)) * 8
        total_sign += protected_bit_set(enc, "dc_sign")[0].size
        total_full += protected_bit_set(enc, "dc_full")[0].size
    sign_frac = total_sign / total_bits
    full_frac = total_full / total_bits

    enc = encode_image(fixture_corpus[0], quality=90)
    stream = serialize(enc)
    cfg = ChannelConfig(bit_error_prob=0.1, protection="dc_full", seed=17)
    delivered, _ = transmit(stream, cfg)
    dec, mask = depacketize(delivered)
    dc_intact = mask[0].all() and np.array_equal(dec.planes[0], enc.planes[0])

    ok = sign_frac <= 0.007 and 0.02 <= full_frac <= 0.06 and dc_intact
    report("protection accounting", ok,
           f"dc_sign={100 * sign_frac:.3f}%, dc_full={100 * full_frac:.3f}%, "
           f"dc_intact={dc_intact}")


def test_criterion_budget_model(fixture_corpus):
    hand_pairs = [
        (50, 50, 0, 312_500),
        (1, 1, 0, 125),
        (5, 5, 0, 3_125),
        (10, 10, 0, 12_500),
        (1, 50, 0, 6_250),
        (50, 1, 0, 6_250),
        (20, 30, 0, 75_000),
        (25, 40, 10, 93_750),
        (2, 16, 4, 3_000),
        (8, 12.5, 0.5, 12_000),
    ]
    arithmetic_ok = all(
        bytes_budget(ChannelConfig(rate_bps=r * 1e6, deadline_s=d * 1e-3,
                                   compute_time_s=c * 1e-3)) == expected
        for r, d, c, expected in hand_pairs)

    img = fixture_corpus[0]
    tight = ChannelConfig(rate_bps=1e6, deadline_s=1e-3)
    delivered, rep = transmit(serialize(encode_image(img, quality=90)), tight)
    tight_ok = rep.bytes_budget == 125 and len(delivered) == 0

    selected = []
    for deadline_ms in (1.5, 2, 3, 5, 8, 12, 20, 35, 50):
        cfg = ChannelConfig(rate_bps=10e6, deadline_s=deadline_ms * 1e-3)
        result = conventional_baseline(img, cfg)
        selected.append(-1 if result is None else result[0])
    monotone_ok = selected == sorted(selected)

    q1_stream = serialize(encode_image(img, quality=1))
    q1_wire = PACKET_SIZE * ((len(q1_stream) + PAYLOAD_SIZE - 1) // PAYLOAD_SIZE)
    band_budget = q1_wire - PACKET_SIZE // 2
    assert band_budget >= PACKET_SIZE
    band_cfg = ChannelConfig(rate_bps=band_budget * 8 * 1000.0, deadline_s=1e-3)
    conv_fails = conventional_baseline(img, band_cfg) is None
    delivered, _ = transmit(serialize(encode_image(img, quality=90)), band_cfg)
    _, mask = depacketize(delivered)
    band_ok = conv_fails and mask.any()

    ok = arithmetic_ok and tight_ok and monotone_ok and band_ok
    report("budget model", ok,
           f"arithmetic={arithmetic_ok}, tight={tight_ok}, "
           f"monotoneQ={monotone_ok}, band={band_ok}")
