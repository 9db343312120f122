"""
afcf/models/common.py — Базовые типы AFCF.

Все доменные типы неизменяемы после построения: pydantic-модели заморожены,
а массивы numpy копируются и помечаются read-only.
"""

from __future__ import annotations

import numpy as np
from pydantic import BaseModel, ConfigDict


class AfcfBase(BaseModel):
    """Базовая Pydantic-модель для типов с массивами numpy."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


def frozen_array(value, dtype=None) -> np.ndarray:
    """Копия массива с запретом записи."""
    arr = np.array(value, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr
