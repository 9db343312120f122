"""
afcf/operators/lloyd.py — Несправедливый базовый оператор: k-means Ллойда.

Группы якорей игнорируются (плагин для абляций). Посев k-means++ с
фиксированным seed; пустой кластер переносится на самую дальнюю от своего
центра точку кластера, где больше одного элемента (ничья → меньший индекс).
"""

from __future__ import annotations

import logging

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.cluster import kmeans_plusplus

logger = logging.getLogger(__name__)

MAX_ITER = 300


def _repair_empty(labels: np.ndarray, dist: np.ndarray, k: int) -> np.ndarray:
    """Переносит по одной точке в каждый пустой кластер."""
    labels = labels.copy()
    for c in range(k):
        if (labels == c).any():
            continue
        sizes = np.bincount(labels, minlength=k)
        movable = sizes[labels] > 1
        own = dist[np.arange(labels.size), labels]
        far = np.where(movable, own, -np.inf)
        j = int(np.argmax(far))
        logger.debug("Lloyd: cluster %d empty, re-seeded at anchor %d", c, j)
        labels[j] = c
    return labels


def lloyd_kmeans(
    anchors: np.ndarray,
    anchor_groups: np.ndarray,
    k: int,
    *,
    seed: int = 0,
) -> np.ndarray:
    """Метки k-means для якорей (m×d)."""
    X = np.asarray(anchors, dtype=np.float64)
    centers, _ = kmeans_plusplus(X, n_clusters=k, random_state=seed)
    labels: np.ndarray | None = None
    for it in range(MAX_ITER):
        dist = cdist(X, centers, metric="sqeuclidean")
        new = _repair_empty(np.argmin(dist, axis=1), dist, k)
        if labels is not None and np.array_equal(new, labels):
            logger.debug("Lloyd converged after %d iterations", it)
            break
        labels = new
        centers = np.stack([X[labels == c].mean(axis=0) for c in range(k)])
    return labels
