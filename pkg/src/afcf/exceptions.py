"""
═══════════════════════════════════════════════════════════════════════════════
AFCF — Иерархия доменных ошибок (Custom Exception Hierarchy)
═══════════════════════════════════════════════════════════════════════════════

Базовый класс ``AfcfError``. Каждый подкласс несёт фиксированный строковый
код; маппинг кодов на exit-коды процесса выполняется в ``afcf.main``.
"""


class AfcfError(Exception):
    """
    Базовое исключение для всех доменных ошибок AFCF.

    Атрибуты
    ────────
        message (str):  Описание ошибки. Печатается пользователю CLI.
        code (str):     Строковый код. Используется для маппинга на exit-код.
        details (dict): Дополнительные данные (координаты, группа, стадия…).
    """

    def __init__(
        self,
        message: str,
        code: str = "AFCF_ERROR",
        details: dict | None = None,
    ):
        self.message = message
        self.code = code
        self.details = details or {}
        super().__init__(message)


class DataValidationError(AfcfError):
    """Некорректные входные данные (NaN, пустой набор, нет колонки…)."""

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message, code="AFCF_DATA_INVALID", details=details)


class QuotaError(AfcfError):
    """Квоты якорей невыполнимы (m ≤ 0, группа меньше своей квоты…)."""

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message, code="AFCF_QUOTA_INFEASIBLE", details=details)


class OperatorError(AfcfError):
    """Оператор кластеризации якорей нарушил контракт."""

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message, code="AFCF_OPERATOR_CONTRACT", details=details)


class InfeasibleConstraintError(AfcfError):
    """Ограничения справедливости несовместны (пустой блок с t > 0…)."""

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message, code="AFCF_CONSTRAINT_INFEASIBLE", details=details)


class SolverDivergenceError(AfcfError):
    """Нечисловое значение в итерации ADMM."""

    def __init__(self, iteration: int, variable: str):
        super().__init__(
            message=f"Non-finite value in {variable} at ADMM iteration {iteration}",
            code="AFCF_SOLVER_DIVERGED",
            details={"iteration": iteration, "variable": variable},
        )


class MetricError(AfcfError):
    """Метрика не определена на данном входе."""

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message, code="AFCF_METRIC_UNDEFINED", details=details)


class StageError(AfcfError):
    """Ошибка стадии конвейера: оборачивает исходную с именем стадии."""

    def __init__(self, stage: str, cause: Exception):
        cause_code = getattr(cause, "code", type(cause).__name__)
        cause_details = getattr(cause, "details", {})
        super().__init__(
            message=f"{stage}: {cause}",
            code="AFCF_STAGE_FAILED",
            details={"stage": stage, "cause_code": cause_code, **cause_details},
        )
        self.stage = stage
        self.cause = cause


__all__ = [
    "AfcfError",
    "DataValidationError",
    "QuotaError",
    "OperatorError",
    "InfeasibleConstraintError",
    "SolverDivergenceError",
    "MetricError",
    "StageError",
]
