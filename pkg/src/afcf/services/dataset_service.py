"""
afcf/services/dataset_service.py — Приём и проверка набора данных.

Группы уплотняются в порядке первого появления; исходный → плотный
идентификатор сохраняется в ``Dataset.group_map`` для отчётов.
"""

from __future__ import annotations

import logging

import numpy as np

from afcf.exceptions import DataValidationError
from afcf.models.dataset import Dataset, GroupStats

logger = logging.getLogger(__name__)


def _densify(values: np.ndarray) -> tuple[np.ndarray, dict[str, int]]:
    """Плотные идентификаторы по первому появлению."""
    _, first_idx, inverse = np.unique(values, return_index=True, return_inverse=True)
    order = np.argsort(first_idx, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    dense = rank[inverse.ravel()]
    uniques = values[np.sort(first_idx)]
    mapping = {str(u): i for i, u in enumerate(uniques.tolist())}
    return dense.astype(np.int64), mapping


def validate_dataset(features, groups, truth=None) -> Dataset:
    """
    Проверяет сырые признаки (d×n) и метки групп, возвращает Dataset.

    Raises:
        DataValidationError: непрямоугольная матрица, пустой набор,
            нечисловое значение (с координатами), несовпадение длин.
    """
    try:
        X = np.asarray(features, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise DataValidationError(f"features are not a numeric rectangular matrix: {exc}") from exc
    if X.ndim != 2:
        raise DataValidationError(f"features must be 2-dimensional (d×n), got ndim={X.ndim}")
    if X.size == 0:
        raise DataValidationError("Dataset is empty", details={"shape": list(X.shape)})

    g = np.asarray(groups)
    if g.ndim != 1 or g.size != X.shape[1]:
        raise DataValidationError(
            f"groups has {g.size} entries, expected one per sample ({X.shape[1]})"
        )
    dense, mapping = _densify(g)

    y = None
    if truth is not None:
        y = np.asarray(truth)
        if y.ndim != 1 or y.size != X.shape[1]:
            raise DataValidationError(
                f"truth has {y.size} entries, expected {X.shape[1]}"
            )
        if not np.issubdtype(y.dtype, np.integer) or y.min() < 0:
            y, _ = _densify(y)

    ds = Dataset(features=X, groups=dense, truth=y, group_map=mapping)
    logger.debug("Dataset validated: d=%d n=%d t=%d", ds.d, ds.n, ds.t)
    return ds


def group_stats(dataset: Dataset) -> GroupStats:
    """|G_r| и ρ_r = |G_r|/n."""
    sizes = np.bincount(dataset.groups, minlength=dataset.t)
    return GroupStats(sizes=sizes, proportions=sizes / dataset.n)
