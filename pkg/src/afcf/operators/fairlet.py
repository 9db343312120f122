"""
afcf/operators/fairlet.py — Справедливый оператор: фэрлеты + k-center.

Упрощённая декомпозиция на фэрлеты для двух защищённых групп:
    1. Сокращённое отношение p:q числа якорей групп 0 и 1 (g = НОД).
    2. Якоря группы 0 сортируются лексикографически; каждый свободный
       якорь-затравка забирает p−1 ближайших свободных якорей своей группы
       и q ближайших свободных якорей группы 1. Получается g фэрлетов.
       Если g < k (например, 9:11), затравками служат якоря меньшей группы,
       а якоря большей делятся между ними почти поровну.
    3. k-center (farthest-first, старт с фэрлета 0) на центроидах фэрлетов.
    4. Каждый якорь наследует кластер своего фэрлета.

Квадратичная стоимость допустима: оператор работает только на m якорях.
"""

from __future__ import annotations

import logging
from math import gcd

import numpy as np
from scipy.spatial.distance import cdist

from afcf.exceptions import OperatorError

logger = logging.getLogger(__name__)


def _nearest_free(dist_row: np.ndarray, free: np.ndarray, count: int) -> np.ndarray:
    """count ближайших свободных позиций (ничья → меньший индекс)."""
    candidates = np.flatnonzero(free)
    order = np.argsort(dist_row[candidates], kind="stable")
    return candidates[order[:count]]


def decompose_fairlets(X: np.ndarray, groups: np.ndarray, min_fairlets: int = 1) -> list[np.ndarray]:
    """
    Разбиение якорей на фэрлеты.

    Точный состав p:q, если НОД даёт не меньше ``min_fairlets`` фэрлетов;
    иначе по одному якорю меньшей группы на фэрлет и поровну якорей
    большей группы (первые b mod a фэрлетов получают на один больше).
    """
    idx = [np.flatnonzero(groups == 0), np.flatnonzero(groups == 1)]
    g = gcd(idx[0].size, idx[1].size)
    if g >= min_fairlets:
        seed_group = 0
        p, q = idx[0].size // g, idx[1].size // g
        same, other = [p - 1] * g, [q] * g
    else:
        seed_group = int(idx[1].size < idx[0].size)
        a, b = idx[seed_group].size, idx[1 - seed_group].size
        same = [0] * a
        other = [b // a + (1 if i < b % a else 0) for i in range(a)]
        logger.debug("fairlets: ratio %d:%d is coprime, seeding %d fairlets from group %d",
                     idx[0].size, idx[1].size, a, seed_group)

    seed_idx, other_idx = idx[seed_group], idx[1 - seed_group]
    # порядок затравок: лексикографический по признакам (первый признак главный)
    seeds = seed_idx[np.lexsort(X[seed_idx].T[::-1])]
    free_seed = np.ones(seed_idx.size, dtype=bool)
    free_other = np.ones(other_idx.size, dtype=bool)
    pos = {int(a): i for i, a in enumerate(seed_idx)}
    d_same = cdist(X[seed_idx], X[seed_idx])
    d_other = cdist(X[seed_idx], X[other_idx])

    fairlets: list[np.ndarray] = []
    for seed in seeds:
        s = pos[int(seed)]
        if not free_seed[s]:
            continue
        free_seed[s] = False
        f = len(fairlets)
        near_same = _nearest_free(d_same[s], free_seed, same[f])
        free_seed[near_same] = False
        near_other = _nearest_free(d_other[s], free_other, other[f])
        free_other[near_other] = False
        fairlets.append(np.concatenate(([seed_idx[s]], seed_idx[near_same], other_idx[near_other])))
    return fairlets


def kcenter(points: np.ndarray, k: int) -> np.ndarray:
    """Жадная 2-аппроксимация k-center; возвращает индекс центра для каждой точки."""
    centers = [0]
    min_dist = cdist(points, points[[0]]).ravel()
    while len(centers) < k:
        j = int(np.argmax(min_dist))
        if min_dist[j] <= 0.0:
            # совпадающие точки: первая ещё не выбранная
            j = next(i for i in range(points.shape[0]) if i not in centers)
        centers.append(j)
        min_dist = np.minimum(min_dist, cdist(points, points[[j]]).ravel())
    assignment = np.argmin(cdist(points, points[centers]), axis=1)
    assignment[centers] = np.arange(k)
    return assignment


def fairlet_kcenter(
    anchors: np.ndarray,
    anchor_groups: np.ndarray,
    k: int,
    *,
    seed: int = 0,
) -> np.ndarray:
    """
    Метки якорей через фэрлеты.

    Raises:
        OperatorError: число групп среди якорей ≠ 2 или фэрлетов меньше k.
    """
    X = np.asarray(anchors, dtype=np.float64)
    groups = np.asarray(anchor_groups, dtype=np.int64)
    present = np.unique(groups)
    if present.size != 2:
        raise OperatorError(
            f"fairlet-kcenter supports exactly 2 protected groups among anchors, "
            f"found {present.size}; use another operator (e.g. 'lloyd')",
            details={"groups": present.tolist()},
        )
    # группы якорей могут быть не 0/1 (например, 0 и 2)
    groups = np.searchsorted(present, groups)

    fairlets = decompose_fairlets(X, groups, min_fairlets=k)
    if len(fairlets) < k:
        raise OperatorError(
            f"Only {len(fairlets)} fairlets for k={k}; increase m or lower k",
            details={"fairlets": len(fairlets), "k": k},
        )
    centroids = np.stack([X[f].mean(axis=0) for f in fairlets])
    assignment = kcenter(centroids, k)

    labels = np.empty(X.shape[0], dtype=np.int64)
    for f, cluster in zip(fairlets, assignment):
        labels[f] = cluster
    logger.debug("fairlet-kcenter: %d fairlets -> %d clusters", len(fairlets), k)
    return labels
