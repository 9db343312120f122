"""
afcf/models/graph.py — Модели справедливого якорного графа.

    • SolverConfig — гиперпараметры ADMM / Frank-Wolfe / адаптивного ρ
    • ConstraintTable — целевые массы t_{l,r} и индексы блоков
    • AdmmState — текущие итераты Z, E, двойственная переменная, ρ, невязки
    • TraceEntry — одна строка трассы сходимости
    • AnchorGraph / SolveResult — итог решателя
"""

from __future__ import annotations

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from afcf.models.common import AfcfBase, frozen_array


class SolverConfig(BaseModel):
    """Параметры решателя; дефолты совпадают с ``AfcfSettings``."""

    alpha: float = Field(default=1e-2, ge=0.0, description="Ridge weight α")
    rho0: float = Field(default=1.0, gt=0.0)
    eps: float = Field(default=1e-4, gt=0.0, description="Outer tolerance on max(r, s)")
    max_iter: int = Field(default=500, ge=1, description="K")
    fw_max_iter: int = Field(default=200, ge=1, description="T")
    eps_fw: float = Field(default=1e-8, gt=0.0)
    eps_curv: float = Field(default=1e-12, gt=0.0)
    rho_beta: float = Field(default=2.0)
    rho_tau: float = Field(default=10.0)
    rho_period: int = Field(default=10, ge=1)
    max_workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _validate_rho_rule(self) -> "SolverConfig":
        if self.rho_beta <= 1.0:
            raise ValueError(f"rho_beta must be > 1, got {self.rho_beta}")
        if self.rho_tau <= 1.0:
            raise ValueError(f"rho_tau must be > 1, got {self.rho_tau}")
        return self

    @classmethod
    def from_settings(cls, **overrides) -> "SolverConfig":
        """Собирает конфигурацию из ``AfcfSettings`` с перекрытием полей."""
        from afcf.config import get_settings

        s = get_settings()
        base = {
            "alpha": s.alpha,
            "rho0": s.rho0,
            "eps": s.eps,
            "max_iter": s.max_iter,
            "fw_max_iter": s.fw_max_iter,
            "eps_fw": s.eps_fw,
            "eps_curv": s.eps_curv,
            "rho_beta": s.rho_beta,
            "rho_tau": s.rho_tau,
            "rho_period": s.rho_period,
            "max_workers": s.max_workers,
        }
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**base)


class ConstraintTable(AfcfBase):
    """
    Целевые массы блоков (кластер якорей l) × (группа объектов r).

    targets — k×t; anchor_blocks[l] = C_l; sample_blocks[r] = G_r;
    block_sizes[l, r] = |C_l|·|G_r|.
    """

    targets: np.ndarray
    anchor_blocks: list[np.ndarray]
    sample_blocks: list[np.ndarray]
    block_sizes: np.ndarray

    @field_validator("targets", mode="before")
    @classmethod
    def _freeze_targets(cls, v) -> np.ndarray:
        return frozen_array(v, dtype=np.float64)

    @field_validator("block_sizes", mode="before")
    @classmethod
    def _freeze_sizes(cls, v) -> np.ndarray:
        return frozen_array(v, dtype=np.int64)

    @field_validator("anchor_blocks", "sample_blocks", mode="before")
    @classmethod
    def _freeze_blocks(cls, v) -> list[np.ndarray]:
        return [frozen_array(b, dtype=np.int64) for b in v]

    @property
    def k(self) -> int:
        return int(self.targets.shape[0])

    @property
    def t(self) -> int:
        return int(self.targets.shape[1])


class AdmmState(BaseModel):
    """
    Изменяемое состояние ADMM.

    ``dual`` хранится в масштабированной форме U = Λ/ρ; при смене ρ
    масштабируется на ρ_old/ρ_new.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    Z: np.ndarray
    E: np.ndarray
    dual: np.ndarray
    rho: float = Field(gt=0.0)
    iteration: int = 0
    r: float = Field(default=float("inf"), ge=0.0)
    s: float = Field(default=float("inf"), ge=0.0)
    objective_trace: list[float] = Field(default_factory=list)

    @property
    def lam(self) -> np.ndarray:
        """Неотмасштабированная двойственная переменная Λ = ρU."""
        return self.rho * self.dual


class TraceEntry(BaseModel):
    """Строка трассы ADMM (пишется в JSON lines)."""

    iteration: int
    objective: float
    lagrangian: float
    r: float
    s: float
    rho: float
    combined_residual: float = Field(default=0.0, description="ρr² + s²/ρ")


class AnchorGraph(AfcfBase):
    """Столбцово-стохастический граф Z (m×n)."""

    Z: np.ndarray

    @field_validator("Z", mode="before")
    @classmethod
    def _freeze(cls, v) -> np.ndarray:
        return frozen_array(v, dtype=np.float64)

    @property
    def m(self) -> int:
        return int(self.Z.shape[0])

    @property
    def n(self) -> int:
        return int(self.Z.shape[1])


class SolveResult(AfcfBase):
    """Итог ``fair_graph.solve``."""

    graph: AnchorGraph
    trace: list[TraceEntry]
    converged: bool
    iterations: int
    final_rho: float
