"""
afcf/models/enums.py — Перечисления AFCF.

    • AnchorMode — способ отбора якорей (fdas, либо абляции das / random)
    • GraphMode — справедливый граф или обычный (абляция FAC vs AC)
    • MSpec — как задан размер якорного множества m
"""

from enum import Enum


class AnchorMode(str, Enum):
    """Способ отбора якорей."""
    FDAS = "fdas"
    DAS = "das"
    RANDOM = "random"


class GraphMode(str, Enum):
    """Режим построения якорного графа."""
    FAIR = "fair"
    UNCONSTRAINED = "unconstrained"


class MSpec(str, Enum):
    """Как задано m: абсолютным числом или кратным числу групп t."""
    ABSOLUTE = "absolute"
    PER_GROUP = "per_group"
