"""
afcf/adapters/csv_loader.py — Загрузка табличного набора из CSV.

Колонка чувствительного атрибута → плотные id групп; признаки
стандартизуются (z-score, нулевая дисперсия делится на 1) и
транспонируются в соглашение d×n.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import pandas as pd

from afcf.exceptions import DataValidationError
from afcf.models.dataset import Dataset
from afcf.services.dataset_service import validate_dataset

logger = logging.getLogger(__name__)


def _numeric_block(frame: pd.DataFrame, columns: list[str]) -> np.ndarray:
    """Числовая матрица n×d с ошибкой по первой нечисловой ячейке."""
    block = frame[columns].apply(pd.to_numeric, errors="coerce")
    bad = block.isna().to_numpy()
    if bad.any():
        row, col = (int(x) for x in np.argwhere(bad)[0])
        raw = frame[columns[col]].iloc[row]
        raise DataValidationError(
            f"Non-numeric or missing value {raw!r} in column '{columns[col]}' "
            f"at data row {row} (file line {row + 2})",
            details={"row": row, "column": columns[col]},
        )
    return block.to_numpy(dtype=np.float64)


def standardize(samples: np.ndarray) -> np.ndarray:
    """z-score по признакам (n×d); постоянный признак → нули."""
    mean = samples.mean(axis=0)
    std = samples.std(axis=0)
    std[std == 0] = 1.0
    return (samples - mean) / std


def load_csv(
    path: str | Path,
    attribute_column: str,
    truth_column: str | None = None,
    feature_columns: list[str] | None = None,
    *,
    k: int | None = None,
) -> Dataset:
    """
    Читает CSV с заголовком.

    Raises:
        DataValidationError: нет файла/колонки, нечисловая ячейка признака.
    """
    path = Path(path)
    if not path.is_file():
        raise DataValidationError(f"Input file not found: {path}", details={"path": str(path)})
    frame = pd.read_csv(path, skipinitialspace=True)

    required = [attribute_column] + ([truth_column] if truth_column else [])
    if feature_columns:
        required += feature_columns
    for column in required:
        if column not in frame.columns:
            raise DataValidationError(
                f"Column '{column}' not found in {path.name}",
                details={"column": column, "available": list(frame.columns)},
            )
    if feature_columns is None:
        feature_columns = [c for c in frame.columns if c not in (attribute_column, truth_column)]
    if not feature_columns:
        raise DataValidationError("No feature columns left after removing attribute/truth columns")

    features = standardize(_numeric_block(frame, feature_columns))
    if frame[attribute_column].isna().any():
        row = int(np.flatnonzero(frame[attribute_column].isna().to_numpy())[0])
        raise DataValidationError(
            f"Missing sensitive attribute at data row {row}",
            details={"row": row, "column": attribute_column},
        )
    groups = frame[attribute_column].astype(str).to_numpy()

    truth = None
    if truth_column:
        truth = frame[truth_column].astype(str).to_numpy()
        distinct = np.unique(truth).size
        if k is not None and distinct < k:
            logger.warning(
                "Truth column '%s' has %d distinct labels, fewer than k=%d",
                truth_column, distinct, k,
            )

    ds = validate_dataset(features.T, groups, truth)
    logger.info(
        "Loaded %s: n=%d d=%d t=%d groups=%s",
        path.name, ds.n, ds.d, ds.t, ds.group_map,
    )
    return ds


def dataset_frame(dataset: Dataset) -> pd.DataFrame:
    """Обратное преобразование: колонки x0..x{d-1}, group (исходные ключи), truth."""
    frame = pd.DataFrame(dataset.samples(), columns=[f"x{i}" for i in range(dataset.d)])
    keys = {v: k for k, v in dataset.group_map.items()}
    frame["group"] = [keys[g] for g in dataset.groups.tolist()]
    if dataset.truth is not None:
        frame["truth"] = dataset.truth
    return frame
