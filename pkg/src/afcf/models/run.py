"""
afcf/models/run.py — Конфигурация запуска и отчёты харнесса.

    • SyntheticSpec — параметры генератора данных в стиле Zafar
    • RunConfig — всё, что нужно одному запуску конвейера
    • StageTimings / RunRecord — результат запуска
    • ScalingReport — бенчмарк линейной масштабируемости
    • SweepReport — анализ чувствительности по α и m
"""

from __future__ import annotations

from pathlib import Path

from pydantic import BaseModel, Field, model_validator

from afcf.models.enums import AnchorMode, GraphMode, MSpec
from afcf.models.graph import SolverConfig
from afcf.models.result import MetricsBundle


class SyntheticSpec(BaseModel):
    """Два гауссовых кластера в 2-d + бинарный атрибут, зависящий от кластера."""

    n: int = Field(ge=4)
    seed: int = Field(default=0, ge=0)
    separation: float = Field(default=3.0, gt=0.0, description="Cluster means at (±separation, 0)")
    attr_probs: tuple[float, float] = Field(
        default=(0.65, 0.35),
        description="P(group = 0) inside truth cluster 0 and inside truth cluster 1",
    )

    @model_validator(mode="after")
    def _check_probs(self) -> "SyntheticSpec":
        if not all(0.0 <= p <= 1.0 for p in self.attr_probs):
            raise ValueError(f"attr_probs must lie in [0, 1], got {self.attr_probs}")
        return self


class RunConfig(BaseModel):
    """Конфигурация одного запуска конвейера AFCF."""

    input_path: Path | None = None
    synthetic: SyntheticSpec | None = None
    attribute_column: str | None = None
    truth_column: str | None = None
    feature_columns: list[str] | None = None

    k: int = Field(default=2, ge=2)
    m: int = Field(default=20, ge=1)
    m_spec: MSpec = MSpec.ABSOLUTE
    operator: str = "fairlet-kcenter"
    anchor_mode: AnchorMode = AnchorMode.FDAS
    graph_mode: GraphMode = GraphMode.FAIR
    solver: SolverConfig = Field(default_factory=SolverConfig)
    seed: int = Field(default=0, ge=0)
    output_dir: Path | None = None

    @model_validator(mode="after")
    def _check_source(self) -> "RunConfig":
        if (self.input_path is None) == (self.synthetic is None):
            raise ValueError("exactly one of input_path / synthetic must be set")
        if self.input_path is not None and not self.attribute_column:
            raise ValueError("attribute_column is required for CSV input")
        if self.m_spec == MSpec.ABSOLUTE and self.m < self.k:
            raise ValueError(f"m ({self.m}) must be >= k ({self.k})")
        return self

    def resolve_m(self, t: int) -> int:
        """Фактическое число якорей: m или m·t."""
        return self.m * t if self.m_spec == MSpec.PER_GROUP else self.m


class StageTimings(BaseModel):
    """Время стадий в секундах."""

    anchor_selection: float = 0.0
    anchor_clustering: float = 0.0
    graph_construction: float = 0.0
    propagation: float = 0.0
    metrics: float = 0.0
    total: float = 0.0

    @property
    def covered(self) -> float:
        """Доля total, покрытая стадиями."""
        stages = (
            self.anchor_selection + self.anchor_clustering
            + self.graph_construction + self.propagation + self.metrics
        )
        return stages / self.total if self.total > 0 else 1.0


class RunRecord(BaseModel):
    """Итоговая запись запуска (один JSON-документ)."""

    config: RunConfig
    n: int
    d: int
    t: int
    m: int
    m_spec: MSpec
    group_map: dict[str, int]
    group_sizes: list[int]
    anchor_histogram: list[int]
    metrics: MetricsBundle
    timings: StageTimings
    solver_converged: bool
    solver_iterations: int
    final_rho: float
    objective_monotone: bool
    residual_monotone: bool = Field(
        description="ρr² + s²/ρ non-increasing within every fixed-ρ window",
    )
    labels_path: Path | None = None
    trace_path: Path | None = None
    record_path: Path | None = None


class ScalingPoint(BaseModel):
    """Один размер в бенчмарке."""

    n: int
    timings: StageTimings
    timed_out: bool = False


class ScalingReport(BaseModel):
    """Линейная аппроксимация total(n) = slope·n + intercept и R²."""

    m: int
    d: int
    k: int
    points: list[ScalingPoint]
    slope: float | None = None
    intercept: float | None = None
    r_squared: float | None = None
    doubling_ratios: list[float] = Field(default_factory=list)
    complete: bool = True
    error: str | None = None


class SweepPoint(BaseModel):
    """Одна точка анализа чувствительности."""

    alpha: float
    m: int
    metrics: MetricsBundle
    total_time: float


class SweepReport(BaseModel):
    """Анализ чувствительности по сетке α × m."""

    alphas: list[float]
    m_values: list[int]
    points: list[SweepPoint]
