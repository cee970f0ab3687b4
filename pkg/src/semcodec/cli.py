"""Command-line interface: encode, decode, corrupt, sweep, augment."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bitstream, channel, dct
from .manifest import MANIFEST_COLUMNS, format_value
from .sweeps import (
    AugmentSpec,
    EXPERIMENTS,
    SweepSpec,
    load_image,
    run_augment,
    run_sweep,
    save_image,
)


def parse_int_list(text: str) -> tuple[int, ...]:
    """Accepts comma-separated integers and inclusive a-b ranges."""
    values = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            values.extend(range(int(lo), int(hi) + 1))
        else:
            values.append(int(part))
    return tuple(values)


def parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(","))


def parse_str_list(text: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in text.split(","))


def _add_channel_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path,
                        help="key=value run file with channel settings")
    parser.add_argument("--bit-error-prob", type=float)
    parser.add_argument("--drop-count", type=int)
    parser.add_argument("--drop-rate", type=float)
    parser.add_argument("--rate-mbps", type=float)
    parser.add_argument("--deadline-ms", type=float)
    parser.add_argument("--compute-time-ms", type=float)
    parser.add_argument("--protection", choices=channel.PROTECTION_MODES)
    parser.add_argument("--fec-overhead-factor", type=float)
    parser.add_argument("--seed", type=int)


def _channel_config(args) -> channel.ChannelConfig:
    kwargs = channel.channel_config_from_file(args.config) if args.config else {}
    overrides = {
        "bit_error_prob": args.bit_error_prob,
        "drop_count": args.drop_count,
        "drop_rate": args.drop_rate,
        "rate_bps": args.rate_mbps * 1e6 if args.rate_mbps is not None else None,
        "deadline_s": args.deadline_ms * 1e-3 if args.deadline_ms is not None else None,
        "compute_time_s": args.compute_time_ms * 1e-3
        if args.compute_time_ms is not None else None,
        "protection": args.protection,
        "fec_overhead_factor": args.fec_overhead_factor,
        "seed": args.seed,
    }
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    return channel.ChannelConfig(**kwargs)


def cmd_encode(args) -> int:
    img = load_image(args.input, args.color_mode)
    enc = dct.encode_image(img, args.quality, args.color_mode)
    stream = bitstream.write_semc(args.output, enc)
    packets = (len(stream) + bitstream.PAYLOAD_SIZE - 1) // bitstream.PAYLOAD_SIZE
    print(f"{args.output}: {len(stream)} bytes, {packets} packets")
    return 0


def cmd_decode(args) -> int:
    data = Path(args.input).read_bytes()
    if Path(args.input).suffix == ".pkts":
        enc, mask = bitstream.depacketize(bitstream.read_pkts(args.input))
    else:
        enc, mask = bitstream.deserialize(data)
    if args.keep_top_n is not None:
        mask &= dct.mask_keep_top_n(enc, args.keep_top_n)
    if args.remove_plane is not None:
        mask &= dct.mask_remove_plane(enc, args.remove_plane)
    rec = dct.reconstruct(enc, mask)
    save_image(args.output, rec)
    kept = int(mask.sum())
    print(f"{args.output}: {rec.shape[1]}x{rec.shape[0]}, "
          f"{kept}/{mask.size} coefficients present")
    return 0


_REPORT_COLUMNS = ["input", "status", "psnr_db", "mask_kept", "mask_total",
                   "packets_sent", "packets_delivered", "bits_flipped",
                   "bytes_budget", "protected_bytes", "effective_payload_bytes"]


def cmd_corrupt(args) -> int:
    cfg = _channel_config(args)
    stream = bitstream.read_semc(args.input)
    reference, _ = bitstream.deserialize(stream)
    ref_img = (np.asarray(load_image(args.ref, reference.color_mode))
               if args.ref else dct.reconstruct(reference))

    delivered, report = channel.transmit(stream, cfg)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.input).stem
    bitstream.write_pkts(out_dir / f"{stem}.pkts", delivered)

    row = {"input": str(args.input), "status": "failed",
           "psnr_db": None, "mask_kept": None, "mask_total": None,
           "packets_sent": report.packets_sent,
           "packets_delivered": report.packets_delivered,
           "bits_flipped": report.bits_flipped,
           "bytes_budget": report.bytes_budget,
           "protected_bytes": report.protected_bytes,
           "effective_payload_bytes": report.effective_payload_bytes}
    if delivered:
        try:
            dec, mask = bitstream.depacketize(delivered)
        except bitstream.HeaderLostError:
            dec = None
        if dec is not None:
            rec = dct.reconstruct(dec, mask)
            save_image(out_dir / f"{stem}.png", rec)
            row.update(status="ok", psnr_db=dct.psnr(ref_img, rec),
                       mask_kept=int(mask.sum()), mask_total=int(mask.size))
    print(",".join(_REPORT_COLUMNS))
    print(",".join(format_value(row[c]) for c in _REPORT_COLUMNS))
    return 0


def cmd_sweep(args) -> int:
    kwargs = {
        "experiment": args.experiment,
        "corpus": args.corpus,
        "out_dir": args.out,
        "seed": args.seed,
        "quality": args.quality,
        "color_mode": args.color_mode,
        "workers": args.workers,
        "repeats": args.repeats,
        "bit_error_prob": args.bit_error_prob,
        "protection": args.protection,
        "fec_overhead_factor": args.fec_overhead_factor,
        "compute_time_ms": args.compute_time_ms,
    }
    for name in ("n_values", "k_values", "q_values", "drop_counts",
                 "error_probs", "protections", "rates_mbps", "deadlines_ms"):
        value = getattr(args, name)
        if value is not None:
            kwargs[name] = value
    path = run_sweep(SweepSpec(**kwargs))
    print(f"manifest: {path}")
    return 0


def cmd_augment(args) -> int:
    drop_prob = args.drop_prob if args.drop_prob is not None else (0.0,)
    spec = AugmentSpec(corpus=args.corpus, out_dir=args.out, seed=args.seed,
                       quality=args.quality, color_mode=args.color_mode,
                       workers=args.workers, schedule=args.schedule,
                       drop_prob=drop_prob, per_plane=args.per_plane)
    path = run_augment(spec)
    print(f"manifest: {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semcodec",
        description="Progressive DCT codec with a deterministic channel simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="encode a PNG/BMP image to .semc")
    p.add_argument("input", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("-q", "--quality", type=int, default=90)
    p.add_argument("--color-mode", choices=dct.COLOR_MODES, default="ycbcr")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="reconstruct a PNG from .semc or .pkts")
    p.add_argument("input", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--keep-top-n", type=int)
    p.add_argument("--remove-plane", type=int)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("corrupt", help="run one .semc through the channel")
    p.add_argument("input", type=Path)
    p.add_argument("-o", "--out", type=Path, required=True)
    p.add_argument("--ref", type=Path, help="original image for PSNR")
    _add_channel_flags(p)
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("sweep", help="run an experiment grid over a corpus")
    p.add_argument("--experiment", choices=EXPERIMENTS, required=True)
    p.add_argument("--corpus", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quality", type=int, default=90)
    p.add_argument("--color-mode", choices=dct.COLOR_MODES, default="ycbcr")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--n-values", type=parse_int_list)
    p.add_argument("--k-values", type=parse_int_list)
    p.add_argument("--q-values", type=parse_int_list)
    p.add_argument("--drop-counts", type=parse_int_list)
    p.add_argument("--error-probs", type=parse_float_list)
    p.add_argument("--protections", type=parse_str_list)
    p.add_argument("--rates-mbps", type=parse_float_list)
    p.add_argument("--deadlines-ms", type=parse_float_list)
    p.add_argument("--bit-error-prob", type=float, default=0.0,
                   help="channel errors for the latency/rate grid")
    p.add_argument("--protection", choices=channel.PROTECTION_MODES,
                   default="none")
    p.add_argument("--fec-overhead-factor", type=float, default=1.0)
    p.add_argument("--compute-time-ms", type=float, default=0.0)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("augment", help="per-epoch training-set augmentation")
    p.add_argument("--corpus", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quality", type=int, default=90)
    p.add_argument("--color-mode", choices=dct.COLOR_MODES, default="ycbcr")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--schedule", choices=("constant", "top_n_uniform"),
                   default="constant")
    p.add_argument("--drop-prob", type=parse_float_list,
                   help="drop probability: one value or 64 per-plane values")
    p.add_argument("--per-plane", action="store_true",
                   help="drop whole planes instead of single coefficients")
    p.set_defaults(func=cmd_augment)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, ValueError, bitstream.StreamFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
