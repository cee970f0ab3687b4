"""Robust CNN training harness consuming the semcodec CLI and manifests."""

from .config import ARCHITECTURES, TrainConfig, parse_schedule
from .evaluation import EvalReport, evaluate, report_rows, table_report
from .synthetic import CLASS_NAMES, make_corpus, pattern_image
from .training import load_model, train

__all__ = [
    "ARCHITECTURES",
    "TrainConfig",
    "parse_schedule",
    "EvalReport",
    "evaluate",
    "report_rows",
    "table_report",
    "CLASS_NAMES",
    "make_corpus",
    "pattern_image",
    "load_model",
    "train",
]

__version__ = "0.1.0"
