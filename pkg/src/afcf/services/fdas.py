"""
afcf/services/fdas.py — Справедливый отбор якорей (Fair Directly Alternate Sampling).

Алгоритм:
    1. Сдвиг данных на глобальный минимум: X ← X − min(X).
    2. Квоты по группам: ⌊m·ρ_g⌋, остаток Δ раздаётся по одному группе
       с наименьшей текущей квотой (ничья → меньший id).
    3. Внутри группы: s_i = Σ_p X_{p,i}, s ← s / max(s); квота[g] раз берём
       argmax s, маскируем выбранный объект, затухание s ← s⊙(1−s)/max(s)
       и перенормировка по максимуму немаскированных.

Абляции: DAS (одна общая группа, квота = m) и случайный отбор.
Никакой случайности в FDAS/DAS нет — результат детерминирован.
"""

from __future__ import annotations

import logging

import numpy as np

from afcf.exceptions import QuotaError
from afcf.models.anchors import AnchorSet, QuotaVector
from afcf.models.dataset import Dataset
from afcf.services.dataset_service import group_stats

logger = logging.getLogger(__name__)

# Погрешность произведения m·ρ (0.29·100 = 28.999…)
_FLOOR_EPS = 1e-9


def compute_quotas(m: int, proportions) -> QuotaVector:
    """
    Пропорциональные квоты якорей с раздачей остатка.

    Raises:
        QuotaError: m ≤ 0, отрицательная доля или доли не суммируются в 1.
    """
    if m <= 0:
        raise QuotaError(f"Number of anchors must be positive, got m={m}", details={"m": m})
    p = np.asarray(proportions, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise QuotaError("proportions must be a non-empty vector")
    if (p < 0).any():
        bad = int(np.flatnonzero(p < 0)[0])
        raise QuotaError(
            f"Negative proportion for group {bad}: {p[bad]}",
            details={"group": bad},
        )
    if abs(p.sum() - 1.0) > 1e-9:
        raise QuotaError(f"proportions must sum to 1, got {p.sum():.12f}")
    if m < p.size:
        logger.warning("m=%d is smaller than the number of groups t=%d; some groups get no anchors", m, p.size)

    counts = np.floor(m * p + _FLOOR_EPS).astype(np.int64)
    for _ in range(m - int(counts.sum())):
        counts[int(np.argmin(counts))] += 1
    return QuotaVector(counts=counts)


def _normalized(s: np.ndarray, free: np.ndarray) -> np.ndarray:
    """Делит на максимум по свободным позициям; нулевой максимум → единицы."""
    top = s[free].max() if free.any() else 0.0
    if top <= 0.0:
        out = np.zeros_like(s)
        out[free] = 1.0
        return out
    return s / top


def _pick_in_group(scores: np.ndarray, quota: int) -> list[int]:
    """Повторный argmax с маскировкой и нелинейным затуханием."""
    free = np.ones(scores.size, dtype=bool)
    s = _normalized(scores.astype(np.float64), free)
    picked: list[int] = []
    for _ in range(quota):
        masked = np.where(free, s, -np.inf)
        j = int(np.argmax(masked))
        picked.append(j)
        free[j] = False
        if not free.any():
            break
        # mask → decay → renormalize
        top = s[free].max()
        s = np.where(free, s * (1.0 - s) / top if top > 0 else 0.0, 0.0)
        s = _normalized(s, free)
    return picked


def _shifted_scores(dataset: Dataset) -> np.ndarray:
    X = dataset.features
    return (X - X.min()).sum(axis=0)


def _make_anchor_set(dataset: Dataset, indices: list[int] | np.ndarray) -> AnchorSet:
    idx = np.asarray(indices, dtype=np.int64)
    return AnchorSet(
        indices=idx,
        H=dataset.features[:, idx],
        anchor_groups=dataset.groups[idx],
    )


def _select_by_quota(dataset: Dataset, groups: np.ndarray, counts: np.ndarray) -> list[int]:
    scores = _shifted_scores(dataset)
    anchors: list[int] = []
    for g, quota in enumerate(counts.tolist()):
        members = np.flatnonzero(groups == g)
        if quota > members.size:
            raise QuotaError(
                f"Group {g} has {members.size} samples but needs {quota} anchors; lower m",
                details={"group": g, "size": int(members.size), "quota": int(quota)},
            )
        if quota == 0:
            continue
        local = _pick_in_group(scores[members], quota)
        anchors.extend(members[local].tolist())
    return anchors


def select_anchors(dataset: Dataset, m: int) -> AnchorSet:
    """
    FDAS: m якорей с составом групп, равным ``compute_quotas``.

    Raises:
        QuotaError: m < 1 или группа меньше своей квоты.
    """
    stats = group_stats(dataset)
    quotas = compute_quotas(m, stats.proportions)
    anchors = _select_by_quota(dataset, dataset.groups, quotas.counts)
    logger.info("FDAS selected %d anchors, quotas=%s", len(anchors), quotas.counts.tolist())
    return _make_anchor_set(dataset, anchors)


def select_anchors_das(dataset: Dataset, m: int) -> AnchorSet:
    """DAS: тот же отбор без учёта групп (одна группа, квота m)."""
    if m <= 0:
        raise QuotaError(f"Number of anchors must be positive, got m={m}", details={"m": m})
    single = np.zeros(dataset.n, dtype=np.int64)
    anchors = _select_by_quota(dataset, single, np.array([m]))
    logger.info("DAS selected %d anchors", len(anchors))
    return _make_anchor_set(dataset, anchors)


def select_anchors_random(dataset: Dataset, m: int, seed: int) -> AnchorSet:
    """Случайные m якорей без возвращения (детерминированы seed)."""
    if m <= 0 or m > dataset.n:
        raise QuotaError(f"m must lie in [1, n={dataset.n}], got {m}", details={"m": m})
    rng = np.random.default_rng(seed)
    anchors = np.sort(rng.choice(dataset.n, size=m, replace=False))
    logger.info("Random anchor selection: %d anchors (seed=%d)", m, seed)
    return _make_anchor_set(dataset, anchors)


def anchor_histogram(anchor_set: AnchorSet, t: int) -> np.ndarray:
    """Число якорей в каждой группе."""
    return np.bincount(anchor_set.anchor_groups, minlength=t)
