"""Run-manifest CSV schema shared by the sweep and augment commands.

One row per reconstructed image, linking it to its source, label, and
corruption parameters. Output paths are stored relative to the manifest's
directory. Failure rows keep their parameter fields but leave output and
quality fields empty; timestamps are deliberately absent so identical runs
produce identical files.
"""

from __future__ import annotations

import csv
from pathlib import Path

SCHEMA_VERSION = 1

MANIFEST_NAME = "manifest.csv"

MANIFEST_COLUMNS = [
    "source",
    "label",
    "experiment",
    "seed",
    "n",
    "q",
    "k",
    "drop_count",
    "bit_error_prob",
    "protection",
    "rate_mbps",
    "deadline_ms",
    "status",
    "output",
    "psnr_db",
    "mask_kept",
    "mask_total",
    "packets_sent",
    "packets_delivered",
    "bits_flipped",
    "bytes_budget",
    "protected_bytes",
    "effective_payload_bytes",
    "conv_status",
    "conv_q",
    "conv_output",
    "conv_psnr_db",
]


def format_value(value) -> str:
    """Render a cell: floats with 6 significant digits, None as empty."""
    if value is None:
        return ""
    if isinstance(value, float):
        if value != value:
            return "nan"
        if value in (float("inf"), float("-inf")):
            return "inf" if value > 0 else "-inf"
        return f"{value:.6g}"
    return str(value)


def write_manifest(path, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_COLUMNS)
        for row in rows:
            unknown = set(row) - set(MANIFEST_COLUMNS)
            if unknown:
                raise ValueError(f"unknown manifest columns: {sorted(unknown)}")
            writer.writerow([format_value(row.get(col)) for col in MANIFEST_COLUMNS])
    return path


def read_manifest(path) -> list[dict]:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
