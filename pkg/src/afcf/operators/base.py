"""
afcf/operators/base.py — Контракт оператора кластеризации якорей.
"""

from __future__ import annotations

from typing import Protocol, runtime_checkable

import numpy as np


@runtime_checkable
class FairClusteringOperator(Protocol):
    """
    Оператор F: (A — m×d, g_A — длины m, k) → метки длины m в [0, k).

    Каждый якорь получает ровно одну метку, все k кластеров непусты.
    Проверку контракта выполняет ``anchor_clustering.run_operator``.
    """

    def __call__(
        self,
        anchors: np.ndarray,
        anchor_groups: np.ndarray,
        k: int,
        *,
        seed: int = 0,
    ) -> np.ndarray: ...
