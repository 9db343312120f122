"""
afcf/operators/registry.py — Реестр операторов по имени.
"""

from __future__ import annotations

import logging

from afcf.exceptions import OperatorError
from afcf.operators.base import FairClusteringOperator
from afcf.operators.fairlet import fairlet_kcenter
from afcf.operators.lloyd import lloyd_kmeans

logger = logging.getLogger(__name__)

_REGISTRY: dict[str, FairClusteringOperator] = {
    "lloyd": lloyd_kmeans,
    "fairlet-kcenter": fairlet_kcenter,
}


def register_operator(name: str, operator: FairClusteringOperator) -> None:
    """Регистрирует сторонний оператор (имя перезаписывается)."""
    if not callable(operator):
        raise OperatorError(f"Operator '{name}' is not callable")
    if name in _REGISTRY:
        logger.warning("Operator '%s' is re-registered", name)
    _REGISTRY[name] = operator


def get_operator(name: str) -> FairClusteringOperator:
    """Возвращает оператор по имени."""
    try:
        return _REGISTRY[name]
    except KeyError:
        raise OperatorError(
            f"Unknown operator '{name}'. Available: {', '.join(available_operators())}",
            details={"operator": name},
        ) from None


def available_operators() -> list[str]:
    return sorted(_REGISTRY)
