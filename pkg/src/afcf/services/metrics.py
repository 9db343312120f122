"""
afcf/services/metrics.py — Метрики справедливости и качества.

    • balance — min по кластерам и парам групп отношения внутрикластерных долей
    • mnce — минимальная по кластерам энтропия групп / глобальная энтропия
    • acc — точность при оптимальном сопоставлении меток (венгерский алгоритм)
    • nmi — нормированная взаимная информация (арифметическое среднее энтропий)
    • soft_balance — balance по мягким массам Z в блоках (кластер якорей, группа)

Пустые предсказанные кластеры исключаются из минимумов balance и MNCE.
"""

from __future__ import annotations

import logging

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.stats import entropy
from sklearn.metrics import normalized_mutual_info_score

from afcf.exceptions import MetricError
from afcf.models.anchors import AnchorLabeling
from afcf.models.result import MetricsBundle

logger = logging.getLogger(__name__)


def contingency(labels, groups, k: int, t: int) -> np.ndarray:
    """Матрица k×t: число объектов кластера l в группе r."""
    table = np.zeros((k, t), dtype=np.int64)
    np.add.at(table, (np.asarray(labels, dtype=np.int64), np.asarray(groups, dtype=np.int64)), 1)
    return table


def balance_from_counts(counts) -> float:
    """
    balance по матрице масс кластер × группа (целые счётчики или мягкие массы).

    Для кластера min_{r≠r'} ρ_r/ρ_r' = min(ρ)/max(ρ); пустые строки пропускаются.
    """
    counts = np.asarray(counts, dtype=np.float64)
    if counts.shape[1] < 2:
        return 1.0
    rows = counts[counts.sum(axis=1) > 0]
    if rows.size == 0:
        return 0.0
    return float((rows.min(axis=1) / rows.max(axis=1)).min())


def per_cluster_proportions(labels, groups, k: int, t: int) -> np.ndarray:
    """ρ_r^{(l)}; строки пустых кластеров — нули."""
    table = contingency(labels, groups, k, t).astype(np.float64)
    sizes = table.sum(axis=1, keepdims=True)
    return np.divide(table, sizes, out=np.zeros_like(table), where=sizes > 0)


def _empty_clusters(labels, k: int) -> list[int]:
    sizes = np.bincount(np.asarray(labels, dtype=np.int64), minlength=k)
    return np.flatnonzero(sizes == 0).tolist()


def balance(hard_labels, groups, k: int, t: int) -> float:
    """balance разбиения; кластер без какой-либо группы → 0."""
    empty = _empty_clusters(hard_labels, k)
    if empty:
        logger.warning("Clusters %s are empty and excluded from balance", empty)
    return balance_from_counts(contingency(hard_labels, groups, k, t))


def mnce(hard_labels, groups, k: int, t: int) -> float:
    """
    Minimal Normalized Conditional Entropy.

    Raises:
        MetricError: в данных одна группа (глобальная энтропия равна 0).
    """
    global_counts = np.bincount(np.asarray(groups, dtype=np.int64), minlength=t)
    denom = entropy(global_counts)
    if denom <= 0.0:
        raise MetricError(
            "MNCE is undefined for a single protected group (global entropy is 0)",
            details={"t": int((global_counts > 0).sum())},
        )
    table = contingency(hard_labels, groups, k, t)
    rows = table[table.sum(axis=1) > 0]
    return float(min(entropy(row) for row in rows) / denom)


def _dense(values) -> np.ndarray:
    _, inverse = np.unique(np.asarray(values), return_inverse=True)
    return inverse.ravel()


def acc(hard_labels, truth, k: int | None = None) -> float:
    """Точность при оптимальном взаимно-однозначном сопоставлении меток."""
    pred = _dense(hard_labels)
    true = _dense(truth)
    size = max(pred.max(), true.max()) + 1
    w = np.zeros((size, size), dtype=np.int64)
    np.add.at(w, (pred, true), 1)
    rows, cols = linear_sum_assignment(w, maximize=True)
    return float(w[rows, cols].sum() / pred.size)


def nmi(hard_labels, truth, k: int | None = None) -> float:
    """NMI с арифметической нормировкой; вырожденное разбиение → 0."""
    if np.unique(hard_labels).size < 2 or np.unique(truth).size < 2:
        return 0.0
    return float(
        normalized_mutual_info_score(truth, hard_labels, average_method="arithmetic")
    )


def soft_masses(Z: np.ndarray, labeling: AnchorLabeling, groups, t: int) -> np.ndarray:
    """Массы Σ_{j∈C_l} Σ_{i∈G_r} Z_{j,i} (k×t)."""
    group_onehot = np.zeros((Z.shape[1], t))
    group_onehot[np.arange(Z.shape[1]), np.asarray(groups, dtype=np.int64)] = 1.0
    return labeling.L.T @ Z @ group_onehot


def soft_balance(Z, labeling: AnchorLabeling, groups, t: int | None = None) -> float:
    """
    balance по мягким долям ρ_r^{(l)} = масса блока / масса кластера.

    Raises:
        MetricError: нулевая мягкая масса у кластера.
    """
    Z = np.asarray(Z, dtype=np.float64)
    t = int(np.max(groups)) + 1 if t is None else t
    masses = soft_masses(Z, labeling, groups, t)
    cluster_mass = masses.sum(axis=1)
    if (cluster_mass <= 0).any():
        l = int(np.flatnonzero(cluster_mass <= 0)[0])
        raise MetricError(
            f"Cluster {l} receives zero soft mass from Z",
            details={"cluster": l},
        )
    return balance_from_counts(masses / cluster_mass[:, None])


def evaluate(
    hard_labels,
    groups,
    k: int,
    t: int,
    truth=None,
    *,
    Z: np.ndarray | None = None,
    labeling: AnchorLabeling | None = None,
    target_balance: float | None = None,
) -> MetricsBundle:
    """Собирает MetricsBundle; acc/nmi — только при наличии truth."""
    hard_balance = balance(hard_labels, groups, k, t)
    bundle: dict = {
        "balance": hard_balance,
        "per_cluster_proportions": per_cluster_proportions(hard_labels, groups, k, t).tolist(),
        "empty_clusters": _empty_clusters(hard_labels, k),
        "target_balance": target_balance,
    }
    if t >= 2:
        bundle["mnce"] = mnce(hard_labels, groups, k, t)
    if truth is not None:
        bundle["acc"] = acc(hard_labels, truth, k)
        bundle["nmi"] = nmi(hard_labels, truth, k)
    if Z is not None and labeling is not None:
        soft = soft_balance(Z, labeling, groups, t)
        bundle["soft_balance"] = soft
        bundle["anchor_balance"] = balance_from_counts(labeling.joint_counts)
        bundle["balance_gap"] = soft - hard_balance
        if target_balance is not None:
            bundle["anchor_target_gap"] = bundle["anchor_balance"] - target_balance
    return MetricsBundle(**bundle)
