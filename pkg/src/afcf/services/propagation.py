"""
afcf/services/propagation.py — Распространение меток якорей на все объекты.

Y = ZᵀL (n×k), ŷ_i = argmax_j Y_{ij}; при равенстве — меньший номер кластера.
"""

from __future__ import annotations

import logging

import numpy as np

from afcf.exceptions import DataValidationError
from afcf.models.anchors import AnchorLabeling
from afcf.models.graph import AnchorGraph
from afcf.models.result import ClusterResult

logger = logging.getLogger(__name__)


def propagate(anchor_graph: AnchorGraph, anchor_labeling: AnchorLabeling) -> ClusterResult:
    """
    Одношаговая диффузия меток.

    Raises:
        DataValidationError: число якорей в Z и L не совпадает.
    """
    Z, L = anchor_graph.Z, anchor_labeling.L
    if Z.shape[0] != L.shape[0]:
        raise DataValidationError(
            f"Anchor graph has {Z.shape[0]} anchors but labeling has {L.shape[0]}",
            details={"graph_m": int(Z.shape[0]), "labeling_m": int(L.shape[0])},
        )
    Y = Z.T @ L
    hard = np.argmax(Y, axis=1)  # первый максимум → меньший номер
    logger.debug("Propagated %d anchor labels to %d samples", L.shape[0], Z.shape[1])
    return ClusterResult(hard_labels=hard, Y=Y, k=anchor_labeling.k)
