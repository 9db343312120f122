"""
afcf/models/anchors.py — Якоря: квоты, выбранное множество, разметка.

    • QuotaVector — число якорей на группу (сумма = m)
    • AnchorSet — индексы якорей, матрица H (d×m), группы якорей
    • AnchorLabeling — метки l, one-hot L (m×k), |C_l|, |G_{l,r}|
"""

from __future__ import annotations

import numpy as np
from pydantic import field_validator

from afcf.models.common import AfcfBase, frozen_array


class QuotaVector(AfcfBase):
    """Квоты якорей по группам."""

    counts: np.ndarray

    @field_validator("counts", mode="before")
    @classmethod
    def _freeze(cls, v) -> np.ndarray:
        return frozen_array(v, dtype=np.int64)

    @property
    def m(self) -> int:
        return int(self.counts.sum())


class AnchorSet(AfcfBase):
    """Выбранные якоря; H — копии столбцов features."""

    indices: np.ndarray
    H: np.ndarray
    anchor_groups: np.ndarray

    @field_validator("indices", "anchor_groups", mode="before")
    @classmethod
    def _freeze_int(cls, v) -> np.ndarray:
        return frozen_array(v, dtype=np.int64)

    @field_validator("H", mode="before")
    @classmethod
    def _freeze_h(cls, v) -> np.ndarray:
        return frozen_array(v, dtype=np.float64)

    @property
    def m(self) -> int:
        return int(self.indices.size)


class AnchorLabeling(AfcfBase):
    """Результат оператора F на якорях, уже в плотных идентификаторах."""

    labels: np.ndarray
    L: np.ndarray
    cluster_sizes: np.ndarray
    joint_counts: np.ndarray

    @field_validator("labels", "cluster_sizes", "joint_counts", mode="before")
    @classmethod
    def _freeze_int(cls, v) -> np.ndarray:
        return frozen_array(v, dtype=np.int64)

    @field_validator("L", mode="before")
    @classmethod
    def _freeze_l(cls, v) -> np.ndarray:
        return frozen_array(v, dtype=np.float64)

    @property
    def m(self) -> int:
        return int(self.labels.size)

    @property
    def k(self) -> int:
        return int(self.L.shape[1])

    def anchor_blocks(self) -> list[np.ndarray]:
        """Индексы якорей C_l для каждого кластера l."""
        return [np.flatnonzero(self.labels == l) for l in range(self.k)]
