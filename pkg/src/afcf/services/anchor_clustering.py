"""
afcf/services/anchor_clustering.py — Применение оператора F к якорям.

``run_operator`` проверяет контракт оператора, уплотняет идентификаторы
кластеров по первому появлению и строит one-hot матрицу L (m×k),
|C_l| и совместные счётчики |G_{l,r}| (k×t).
"""

from __future__ import annotations

import logging

import numpy as np

from afcf.exceptions import OperatorError
from afcf.models.anchors import AnchorLabeling, AnchorSet
from afcf.operators.base import FairClusteringOperator
from afcf.services.metrics import balance_from_counts

logger = logging.getLogger(__name__)


def labeling_from_labels(labels, anchor_groups, k: int, t: int | None = None) -> AnchorLabeling:
    """Строит AnchorLabeling по плотным меткам 0..k-1."""
    labels = np.asarray(labels, dtype=np.int64)
    anchor_groups = np.asarray(anchor_groups, dtype=np.int64)
    t = int(anchor_groups.max()) + 1 if t is None else t
    L = np.zeros((labels.size, k))
    L[np.arange(labels.size), labels] = 1.0
    joint = np.zeros((k, t), dtype=np.int64)
    np.add.at(joint, (labels, anchor_groups), 1)
    return AnchorLabeling(
        labels=labels,
        L=L,
        cluster_sizes=joint.sum(axis=1),
        joint_counts=joint,
    )


def run_operator(
    operator: FairClusteringOperator,
    anchor_set: AnchorSet,
    k: int,
    *,
    t: int | None = None,
    seed: int = 0,
) -> AnchorLabeling:
    """
    Запускает оператор на якорях и проверяет результат.

    Args:
        t: Число групп во всём наборе (по умолчанию — по группам якорей).

    Raises:
        OperatorError: m < k, метка вне [0, k), пустой кластер.
    """
    m = anchor_set.m
    if m < k:
        raise OperatorError(f"m={m} anchors cannot form k={k} clusters", details={"m": m, "k": k})

    raw = np.asarray(
        operator(anchor_set.H.T, anchor_set.anchor_groups, k, seed=seed)
    )
    if raw.shape != (m,):
        raise OperatorError(f"Operator returned {raw.shape} labels, expected ({m},)")
    if not np.issubdtype(raw.dtype, np.integer):
        if not np.all(np.equal(np.mod(raw, 1), 0)):
            raise OperatorError("Operator returned non-integer labels")
        raw = raw.astype(np.int64)
    out_of_range = (raw < 0) | (raw >= k)
    if out_of_range.any():
        j = int(np.flatnonzero(out_of_range)[0])
        raise OperatorError(
            f"Operator label {int(raw[j])} of anchor {j} is outside [0, {k})",
            details={"anchor": j, "label": int(raw[j])},
        )
    sizes = np.bincount(raw, minlength=k)
    if (sizes == 0).any():
        empty = int(np.flatnonzero(sizes == 0)[0])
        raise OperatorError(
            f"Operator produced empty cluster {empty}",
            details={"cluster": empty},
        )

    # плотные id по первому появлению
    _, first = np.unique(raw, return_index=True)
    order = raw[np.sort(first)]
    remap = np.empty(k, dtype=np.int64)
    remap[order] = np.arange(k)
    labels = remap[raw]

    labeling = labeling_from_labels(labels, anchor_set.anchor_groups, k, t)
    logger.info("Anchor clustering: cluster sizes %s", labeling.cluster_sizes.tolist())
    return labeling


def anchor_balance(labeling: AnchorLabeling) -> float:
    """balance на якорях по joint_counts."""
    return balance_from_counts(labeling.joint_counts)
