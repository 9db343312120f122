"""
afcf/models/dataset.py — Набор данных и статистика защищённых групп.

Соглашение: features имеет форму d×n (столбец — объект). Группы уже плотные
(0..t-1); переход от исходных идентификаторов выполняет
``afcf.services.dataset_service.validate_dataset``.
"""

from __future__ import annotations

import numpy as np
from pydantic import Field, field_validator, model_validator

from afcf.exceptions import DataValidationError
from afcf.models.common import AfcfBase, frozen_array


class Dataset(AfcfBase):
    """
    Матрица признаков d×n + метки защищённых групп + (опц.) истинные кластеры.

    Инварианты проверяются при построении: конечные значения, каждая
    группа 0..t-1 представлена, длины векторов совпадают с n.
    """

    features: np.ndarray
    groups: np.ndarray
    truth: np.ndarray | None = None
    group_map: dict[str, int] = Field(default_factory=dict)

    @field_validator("features", mode="before")
    @classmethod
    def _freeze_features(cls, v) -> np.ndarray:
        return frozen_array(v, dtype=np.float64)

    @field_validator("groups", mode="before")
    @classmethod
    def _freeze_groups(cls, v) -> np.ndarray:
        return frozen_array(v, dtype=np.int64)

    @field_validator("truth", mode="before")
    @classmethod
    def _freeze_truth(cls, v) -> np.ndarray | None:
        return None if v is None else frozen_array(v, dtype=np.int64)

    @model_validator(mode="after")
    def _check_invariants(self) -> "Dataset":
        if self.features.ndim != 2:
            raise DataValidationError(
                f"features must be a d×n matrix, got shape {self.features.shape}"
            )
        d, n = self.features.shape
        if n == 0 or d == 0:
            raise DataValidationError("Dataset is empty", details={"shape": [d, n]})
        bad = np.argwhere(~np.isfinite(self.features))
        if bad.size:
            row, col = (int(x) for x in bad[0])
            raise DataValidationError(
                f"Non-finite feature value at row {row}, column {col}",
                details={"row": row, "column": col},
            )
        if self.groups.shape != (n,):
            raise DataValidationError(
                f"groups has length {self.groups.size}, expected {n}"
            )
        t = int(self.groups.max()) + 1
        if self.groups.min() < 0 or np.bincount(self.groups, minlength=t).min() == 0:
            raise DataValidationError("group ids must be dense in [0, t)")
        if self.truth is not None and self.truth.shape != (n,):
            raise DataValidationError(
                f"truth has length {self.truth.size}, expected {n}"
            )
        return self

    @property
    def d(self) -> int:
        return int(self.features.shape[0])

    @property
    def n(self) -> int:
        return int(self.features.shape[1])

    @property
    def t(self) -> int:
        return int(self.groups.max()) + 1

    def samples(self) -> np.ndarray:
        """Представление n×d (строка — объект) для операторов и sklearn."""
        return self.features.T


class GroupStats(AfcfBase):
    """Размеры |G_r| и глобальные доли ρ_r = |G_r|/n."""

    sizes: np.ndarray
    proportions: np.ndarray

    @field_validator("sizes", mode="before")
    @classmethod
    def _freeze_sizes(cls, v) -> np.ndarray:
        return frozen_array(v, dtype=np.int64)

    @field_validator("proportions", mode="before")
    @classmethod
    def _freeze_proportions(cls, v) -> np.ndarray:
        return frozen_array(v, dtype=np.float64)

    @property
    def t(self) -> int:
        return int(self.sizes.size)
