"""Accuracy evaluation over sweep manifests and paper-style trend tables.

Evaluation is a pure function of (model, manifest): all distortion is frozen
in the manifest's image artifacts, produced earlier by the codec CLI. Rows
whose pipeline failed count as incorrect; rows whose output file is missing
are excluded and reported.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import torch
from PIL import Image
from torchvision import transforms

from .data import read_manifest

CELL_KEYS = {
    "top_n": ("n",),
    "remove_k": ("k",),
    "quality": ("q",),
    "packet_loss": ("drop_count",),
    "bit_error": ("bit_error_prob", "protection"),
    "latency_rate": ("deadline_ms", "rate_mbps"),
    "conventional_vs_proposed": ("deadline_ms", "rate_mbps"),
    "augment": ("q",),
}


@dataclass
class EvalReport:
    experiment: str
    model_name: str
    pipeline: str
    cells: dict = field(default_factory=dict)  # cell key -> [correct, total]
    skipped: int = 0

    def accuracy(self, cell) -> float:
        correct, total = self.cells[cell]
        return correct / total if total else 0.0

    def accuracies(self) -> dict:
        return {cell: self.accuracy(cell) for cell in self.cells}

    @property
    def average(self) -> float:
        if not self.cells:
            return 0.0
        values = [self.accuracy(cell) for cell in self.cells]
        return sum(values) / len(values)


def _cell_key(row: dict, experiment: str) -> tuple:
    return tuple(row[col] for col in CELL_KEYS[experiment])


def evaluate(model, classes: list[str], image_size: int, manifest_path,
             pipeline: str = "proposed", model_name: str = "model",
             batch_size: int = 64, device: str = "cpu") -> EvalReport:
    """Classify every manifest row and aggregate accuracy per parameter cell."""
    if pipeline not in ("proposed", "conventional"):
        raise ValueError(f"unknown pipeline: {pipeline}")
    status_col = "status" if pipeline == "proposed" else "conv_status"
    output_col = "output" if pipeline == "proposed" else "conv_output"

    rows = read_manifest(manifest_path)
    if not rows:
        raise ValueError(f"empty manifest: {manifest_path}")
    experiment = rows[0]["experiment"]
    root = Path(manifest_path).parent
    transform = transforms.Compose([
        transforms.Resize((image_size, image_size)),
        transforms.ToTensor(),
    ])
    class_index = {name: i for i, name in enumerate(classes)}

    report = EvalReport(experiment=experiment, model_name=model_name,
                        pipeline=pipeline)
    pending: list[tuple[tuple, int, Path]] = []
    for row in rows:
        cell = _cell_key(row, experiment)
        stats = report.cells.setdefault(cell, [0, 0])
        if row[status_col] != "ok" or not row[output_col]:
            stats[1] += 1  # failed transmission counts as a wrong answer
            continue
        path = root / row[output_col]
        if not path.is_file():
            report.skipped += 1
            continue
        pending.append((cell, class_index[row["label"]], path))

    model.eval()
    with torch.no_grad():
        for start in range(0, len(pending), batch_size):
            batch = pending[start: start + batch_size]
            images = []
            for _, _, path in batch:
                with Image.open(path) as im:
                    images.append(transform(im.convert("RGB")))
            preds = model(torch.stack(images).to(device)).argmax(dim=1).cpu()
            for (cell, label, _), pred in zip(batch, preds):
                stats = report.cells[cell]
                stats[0] += int(pred == label)
                stats[1] += 1
    return report


def _sort_key(cell: tuple):
    def coerce(v):
        try:
            return (0, float(v))
        except ValueError:
            return (1, v)
    return tuple(coerce(v) for v in cell)


def table_report(original: EvalReport, robust: EvalReport) -> str:
    """Markdown table with original/robust/difference columns per cell.

    Cells present in only one report render blank, never interpolated.
    """
    experiment = original.experiment
    key_names = CELL_KEYS[experiment]
    cells = sorted(set(original.cells) | set(robust.cells), key=_sort_key)

    header = [*key_names, original.model_name, robust.model_name, "diff"]
    lines = ["| " + " | ".join(header) + " |",
             "|" + "|".join(["---"] * len(header)) + "|"]
    for cell in cells:
        a = f"{original.accuracy(cell):.3f}" if cell in original.cells else ""
        b = f"{robust.accuracy(cell):.3f}" if cell in robust.cells else ""
        diff = (f"{robust.accuracy(cell) - original.accuracy(cell):+.3f}"
                if cell in original.cells and cell in robust.cells else "")
        lines.append("| " + " | ".join([*cell, a, b, diff]) + " |")
    lines.append("| " + " | ".join(
        ["average"] + [""] * (len(key_names) - 1)
        + [f"{original.average:.3f}", f"{robust.average:.3f}",
           f"{robust.average - original.average:+.3f}"]) + " |")
    return "\n".join(lines) + "\n"


def report_rows(original: EvalReport, robust: EvalReport) -> list[dict]:
    """The same table as plain dict rows, for CSV output."""
    experiment = original.experiment
    key_names = CELL_KEYS[experiment]
    rows = []
    for cell in sorted(set(original.cells) | set(robust.cells), key=_sort_key):
        row = dict(zip(key_names, cell))
        row["original"] = (f"{original.accuracy(cell):.6g}"
                           if cell in original.cells else "")
        row["robust"] = f"{robust.accuracy(cell):.6g}" if cell in robust.cells else ""
        row["difference"] = (
            f"{robust.accuracy(cell) - original.accuracy(cell):.6g}"
            if cell in original.cells and cell in robust.cells else "")
        rows.append(row)
    return rows
