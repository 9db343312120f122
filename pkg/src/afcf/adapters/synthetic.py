"""
afcf/adapters/synthetic.py — Синтетические данные в стиле Zafar.

Два гауссовых кластера (единичная ковариация, центры (±sep, 0)) и бинарный
чувствительный атрибут: P(группа 0 | кластер c) = attr_probs[c]. Группы
коррелируют с кластерами, но перекрываются.
"""

from __future__ import annotations

import logging

import numpy as np

from afcf.exceptions import DataValidationError
from afcf.models.dataset import Dataset
from afcf.models.run import SyntheticSpec
from afcf.services.dataset_service import validate_dataset

logger = logging.getLogger(__name__)


def gen_synthetic(n: int, seed: int = 0, **params) -> Dataset:
    """
    Детерминированный набор для заданного seed: features 2×n, groups, truth.

    Raises:
        DataValidationError: n < 4 или выпала только одна группа.
    """
    if n < 4:
        raise DataValidationError(f"Synthetic data needs n >= 4 for k=2, got n={n}", details={"n": n})
    spec = SyntheticSpec(n=n, seed=seed, **params)
    rng = np.random.default_rng(spec.seed)

    truth = np.repeat([0, 1], [n - n // 2, n // 2])
    means = np.array([[-spec.separation, 0.0], [spec.separation, 0.0]])
    points = means[truth] + rng.standard_normal((n, 2))

    p_group0 = np.asarray(spec.attr_probs)[truth]
    groups = np.where(rng.random(n) < p_group0, 0, 1)
    if np.unique(groups).size < 2:
        raise DataValidationError("Synthetic draw produced a single protected group; change seed or n")

    # группа 0 должна получить id 0 при уплотнении по первому появлению
    ds = validate_dataset(points.T, groups, truth)
    if ds.group_map.get("0") != 0:
        ds = Dataset(features=ds.features, groups=1 - ds.groups, truth=ds.truth, group_map={"0": 0, "1": 1})
    logger.debug("Synthetic dataset: n=%d seed=%d sizes=%s", n, seed, np.bincount(ds.groups).tolist())
    return ds


def from_spec(spec: SyntheticSpec) -> Dataset:
    return gen_synthetic(
        spec.n, spec.seed, separation=spec.separation, attr_probs=spec.attr_probs
    )
