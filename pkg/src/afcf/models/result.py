"""
afcf/models/result.py — Результат кластеризации и набор метрик.
"""

from __future__ import annotations

import numpy as np
from pydantic import BaseModel, Field, field_validator

from afcf.models.common import AfcfBase, frozen_array


class ClusterResult(AfcfBase):
    """
    Жёсткие метки ŷ, мягкая матрица Y (n×k), метрики и тайминги стадий.

    ``metrics`` и ``timings`` заполняются конвейером; ``propagate`` отдаёт их
    пустыми.
    """

    hard_labels: np.ndarray
    Y: np.ndarray
    k: int = Field(ge=1)
    metrics: dict[str, float] = Field(default_factory=dict)
    timings: dict[str, float] = Field(default_factory=dict)

    @field_validator("hard_labels", mode="before")
    @classmethod
    def _freeze_labels(cls, v) -> np.ndarray:
        return frozen_array(v, dtype=np.int64)

    @field_validator("Y", mode="before")
    @classmethod
    def _freeze_y(cls, v) -> np.ndarray:
        return frozen_array(v, dtype=np.float64)

    @property
    def n(self) -> int:
        return int(self.hard_labels.size)


class MetricsBundle(BaseModel):
    """Метрики качества и справедливости (сериализуются в RunRecord)."""

    acc: float | None = None
    nmi: float | None = None
    balance: float
    mnce: float | None = None
    soft_balance: float | None = None
    anchor_balance: float | None = None
    target_balance: float | None = None
    balance_gap: float | None = Field(
        default=None,
        description="soft_balance − balance: effect of the argmax decision",
    )
    anchor_target_gap: float | None = Field(
        default=None,
        description="anchor_balance − target_balance: cost of the group-size correction of the targets",
    )
    empty_clusters: list[int] = Field(default_factory=list)
    per_cluster_proportions: list[list[float]]

    def as_flat(self) -> dict[str, float]:
        """Скалярные метрики для ``ClusterResult.metrics``."""
        names = (
            "acc", "nmi", "balance", "mnce", "soft_balance",
            "anchor_balance", "target_balance", "balance_gap", "anchor_target_gap",
        )
        return {
            name: float(getattr(self, name))
            for name in names
            if getattr(self, name) is not None
        }
