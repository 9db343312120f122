"""
afcf/db/repositories/result_repo.py — Файлы результатов на диске.

Форматы:
    • labels.csv   — заголовок ``index,label``, затем по строке на объект
    • record.json  — RunRecord одним JSON-документом
    • trace.jsonl  — трасса ADMM (пишет ``TraceLogger``)
    • bench.json / sweep.json — отчёты харнесса
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import BaseModel

from afcf.exceptions import DataValidationError

logger = logging.getLogger(__name__)

LABELS_FILE = "labels.csv"
RECORD_FILE = "record.json"
TRACE_FILE = "trace.jsonl"
BENCH_FILE = "bench.json"
SWEEP_FILE = "sweep.json"
METRICS_FILE = "metrics.json"


def write_labels(path: Path, labels: np.ndarray) -> Path:
    """Записать метки ``index,label``."""
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame({"index": np.arange(labels.size), "label": np.asarray(labels, dtype=np.int64)})
    frame.to_csv(path, index=False)
    return path


def read_labels(path: Path, n: int | None = None) -> np.ndarray:
    """
    Прочитать метки, упорядоченные по index.

    Raises:
        DataValidationError: нет файла/колонок или число строк ≠ n.
    """
    if not path.is_file():
        raise DataValidationError(f"Labels file not found: {path}")
    frame = pd.read_csv(path)
    if list(frame.columns[:2]) != ["index", "label"]:
        raise DataValidationError(
            f"Labels file must have header 'index,label', got {list(frame.columns)}"
        )
    frame = frame.sort_values("index")
    if n is not None and len(frame) != n:
        raise DataValidationError(f"Labels file has {len(frame)} rows, dataset has {n} samples")
    labels = frame["label"].to_numpy(dtype=np.int64)
    if labels.size and labels.min() < 0:
        raise DataValidationError(f"Labels file {path.name} contains negative labels")
    return labels


def write_model(path: Path, model: BaseModel) -> Path:
    """Записать pydantic-модель как JSON-документ."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.model_dump_json(indent=2), encoding="utf-8")
    logger.debug("Wrote %s", path)
    return path


def remove_outputs(*paths: Path | None) -> None:
    """Удалить частичные результаты неудачного запуска."""
    for p in paths:
        if p is not None and p.exists():
            p.unlink()
            logger.info("Removed partial output %s", p)
