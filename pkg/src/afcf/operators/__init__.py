"""
afcf.operators — Операторы справедливой кластеризации якорей l = F(A, g_A, k).

Встроенные плагины регистрируются под именами "lloyd" и "fairlet-kcenter".
Сторонний оператор подключается через ``register_operator``::

    from afcf.operators import register_operator

    def my_operator(anchors, anchor_groups, k, *, seed=0):
        ...  # вернуть метки длины m в [0, k)

    register_operator("my-fair", my_operator)
"""

from afcf.operators.base import FairClusteringOperator  # noqa: F401
from afcf.operators.registry import (  # noqa: F401
    available_operators,
    get_operator,
    register_operator,
)
