"""Command-line interface: train, evaluate, report, make-dataset."""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .config import ARCHITECTURES, TrainConfig
from .evaluation import evaluate, report_rows, table_report
from .synthetic import make_corpus
from .training import load_model, train


def cmd_train(args) -> int:
    cfg = TrainConfig(dataset=args.dataset, out_dir=args.out,
                      architecture=args.arch, epochs=args.epochs,
                      schedule=args.schedule, rotation=not args.no_rotation,
                      scaling=not args.no_scaling, seed=args.seed,
                      quality=args.quality, image_size=args.image_size,
                      batch_size=args.batch_size, learning_rate=args.lr,
                      val_fraction=args.val_fraction, pretrained=args.pretrained,
                      augment_workers=args.augment_workers)
    path = train(cfg)
    print(f"checkpoint: {path}")
    return 0


def cmd_evaluate(args) -> int:
    model, classes, image_size = load_model(args.model)
    report = evaluate(model, classes, image_size, args.manifest,
                      pipeline=args.pipeline, model_name=Path(args.model).stem)
    for cell in sorted(report.cells):
        correct, total = report.cells[cell]
        print(f"{'/'.join(cell)}: {report.accuracy(cell):.3f} ({correct}/{total})")
    print(f"average: {report.average:.3f}")
    if report.skipped:
        print(f"skipped rows with missing files: {report.skipped}")
    return 0


def cmd_report(args) -> int:
    orig_model, classes, image_size = load_model(args.original)
    robust_model, r_classes, r_size = load_model(args.robust)
    if classes != r_classes:
        print("error: models were trained on different class sets",
              file=sys.stderr)
        return 1
    orig = evaluate(orig_model, classes, image_size, args.manifest,
                    pipeline=args.pipeline, model_name="original")
    robust = evaluate(robust_model, r_classes, r_size, args.manifest,
                      pipeline=args.pipeline, model_name="robust")
    text = table_report(orig, robust)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        if out.suffix == ".csv":
            rows = report_rows(orig, robust)
            with open(out, "w", newline="", encoding="utf-8") as fh:
                writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
                writer.writeheader()
                writer.writerows(rows)
        else:
            out.write_text(text, encoding="utf-8")
        print(f"report: {out}")
    else:
        print(text, end="")
    return 0


def cmd_make_dataset(args) -> int:
    path = make_corpus(args.out, per_class=args.per_class, seed=args.seed,
                       size=args.size)
    print(f"corpus: {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semtrain",
        description="Robust CNN training on DCT-drop augmented corpora")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model with per-epoch augmentation")
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--arch", choices=ARCHITECTURES, default="small_cnn")
    p.add_argument("--epochs", type=int, default=12)
    p.add_argument("--schedule", default="top_n_uniform",
                   help="none | top_n_uniform | constant:P")
    p.add_argument("--no-rotation", action="store_true")
    p.add_argument("--no-scaling", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quality", type=int, default=90)
    p.add_argument("--image-size", type=int, default=64)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--lr", type=float, default=2e-3)
    p.add_argument("--val-fraction", type=float, default=0.2)
    p.add_argument("--pretrained", action="store_true",
                   help="start from pretrained weights (needs a weights cache)")
    p.add_argument("--augment-workers", type=int, default=1)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="accuracy of one model over a manifest")
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--pipeline", choices=("proposed", "conventional"),
                   default="proposed")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="original vs robust trend table")
    p.add_argument("--original", type=Path, required=True)
    p.add_argument("--robust", type=Path, required=True)
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--pipeline", choices=("proposed", "conventional"),
                   default="proposed")
    p.add_argument("--out", type=Path, help=".md or .csv output path")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("make-dataset", help="synthetic five-class corpus")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--per-class", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=256)
    p.set_defaults(func=cmd_make_dataset)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
