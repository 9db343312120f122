"""
═══════════════════════════════════════════════════════════════════════════════
AFCF — Настройки (Application Configuration)
═══════════════════════════════════════════════════════════════════════════════

Класс AfcfSettings читает параметры из переменных окружения (префикс
``AFCF_``) или .env файла. Содержит настройки:
    • Среда выполнения и уровень логирования
    • Каталог результатов (AFCF_OUTPUT_DIR перекрывает значение CLI)
    • Seed и число потоков для Z-подзадачи
    • Параметры решателя ADMM / Frank-Wolfe по умолчанию
    • Бюджет времени бенчмарка (30 минут, как в сравнении методов)
"""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path

from pydantic import Field, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class AfcfSettings(BaseSettings):
    """
    Настройки AFCF.

    Все параметры читаются из переменных окружения ``AFCF_*`` или .env файла.
    Значения решателя — дефолты для ``SolverConfig``; CLI-флаги их перекрывают.
    """

    model_config = SettingsConfigDict(
        env_prefix="AFCF_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
    )

    # ── Среда выполнения ──────────────────────────────────────────────────
    app_env: str = Field(
        default="development",
        description="Application environment: development | benchmark",
    )
    log_level: str = Field(default="INFO")

    # ── Результаты ────────────────────────────────────────────────────────
    output_dir: Path | None = Field(
        default=None,
        description="Overrides the --out directory of every CLI subcommand",
    )

    # ── Воспроизводимость ─────────────────────────────────────────────────
    seed: int = Field(default=0, ge=0)
    max_workers: int = Field(
        default=1,
        ge=1,
        description="Worker cap for the column-parallel Z-update",
    )

    # ── Решатель (дефолты SolverConfig) ───────────────────────────────────
    alpha: float = Field(default=1e-2, ge=0.0)
    rho0: float = Field(default=1.0, gt=0.0)
    eps: float = Field(default=1e-4, gt=0.0)
    max_iter: int = Field(default=500, ge=1)
    fw_max_iter: int = Field(default=200, ge=1)
    eps_fw: float = Field(default=1e-8, gt=0.0)
    eps_curv: float = Field(default=1e-12, gt=0.0)
    rho_beta: float = Field(default=2.0)
    rho_tau: float = Field(default=10.0)
    rho_period: int = Field(default=10, ge=1)

    # ── Бенчмарк ──────────────────────────────────────────────────────────
    bench_time_budget_s: float = Field(
        default=1800.0,
        gt=0.0,
        description="Wall-clock budget of one benchmark run (seconds)",
    )

    @model_validator(mode="after")
    def _validate_rho_rule(self) -> "AfcfSettings":
        """Адаптивное правило ρ имеет смысл только при β > 1 и τ > 1."""
        if self.rho_beta <= 1.0 or self.rho_tau <= 1.0:
            raise ValueError(
                f"AFCF_RHO_BETA and AFCF_RHO_TAU must be > 1 "
                f"(got beta={self.rho_beta}, tau={self.rho_tau})"
            )
        return self


@lru_cache
def get_settings() -> AfcfSettings:
    """
    Возвращает единственный экземпляр AfcfSettings (singleton).

    Декоратор ``@lru_cache`` гарантирует, что объект создаётся
    только при первом вызове.
    """
    return AfcfSettings()


__all__ = ["AfcfSettings", "get_settings"]
