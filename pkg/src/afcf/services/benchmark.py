"""
afcf/services/benchmark.py — Бенчмарк масштабируемости и анализ чувствительности.

    • benchmark_scaling — прогоны на растущих n при фиксированных m, d, k;
      линейная регрессия total(n) и R², отношения времени соседних размеров
    • sensitivity_sweep — сетка α × m (m кратно числу групп t)

Размеры прогоняются последовательно, чтобы замеры не мешали друг другу.
"""

from __future__ import annotations

import logging

from scipy.stats import linregress

from afcf.adapters.synthetic import from_spec, gen_synthetic
from afcf.config import get_settings
from afcf.exceptions import AfcfError, DataValidationError
from afcf.models.enums import MSpec
from afcf.models.run import (
    RunConfig,
    ScalingPoint,
    ScalingReport,
    SweepPoint,
    SweepReport,
)
from afcf.services.pipeline import execute, load_dataset, output_dir_for

logger = logging.getLogger(__name__)

DEFAULT_ALPHAS = (1e-4, 1e-2, 1.0, 100.0)
DEFAULT_M_MULTIPLES = tuple(range(2, 21, 2))


def _fit(report: ScalingReport) -> ScalingReport:
    """Линейная аппроксимация по завершённым точкам."""
    done = [p for p in report.points if not p.timed_out]
    totals = [p.timings.total for p in done]
    ratios = [b / a for a, b in zip(totals, totals[1:]) if a > 0]
    update: dict = {"doubling_ratios": ratios}
    if len(done) >= 2:
        fit = linregress([p.n for p in done], totals)
        update.update(slope=float(fit.slope), intercept=float(fit.intercept), r_squared=float(fit.rvalue**2))
    return report.model_copy(update=update)


def benchmark_scaling(
    config: RunConfig,
    sizes: list[int],
    *,
    time_budget_s: float | None = None,
) -> ScalingReport:
    """
    Прогоны конвейера на синтетических данных размеров ``sizes``.

    Ошибка или превышение бюджета времени прерывают серию; отчёт
    возвращается частичным (complete=False).

    Raises:
        DataValidationError: sizes не строго возрастают или их меньше трёх.
    """
    if len(sizes) < 3 or any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise DataValidationError(
            f"Benchmark sizes must be strictly increasing with at least 3 entries, got {sizes}"
        )
    budget = time_budget_s or get_settings().bench_time_budget_s
    seed = config.synthetic.seed if config.synthetic is not None else config.seed
    report = ScalingReport(m=config.resolve_m(2), d=2, k=config.k, points=[])

    for n in sizes:
        if config.synthetic is not None:
            dataset = from_spec(config.synthetic.model_copy(update={"n": n}))
        else:
            dataset = gen_synthetic(n, seed)
        run_config = config.model_copy(update={"output_dir": output_dir_for(config, f"n{n}")})
        try:
            outcome = execute(run_config, dataset)
        except AfcfError as exc:
            logger.error("Benchmark aborted at n=%d: %s", n, exc)
            report = report.model_copy(update={"complete": False, "error": f"n={n}: {exc}"})
            break
        timings = outcome.record.timings
        timed_out = timings.total > budget
        report.points.append(ScalingPoint(n=n, timings=timings, timed_out=timed_out))
        logger.info("Benchmark n=%d: total %.3fs (graph %.3fs)", n, timings.total, timings.graph_construction)
        if timed_out:
            logger.warning("Benchmark n=%d exceeded the %.0fs budget; stopping", n, budget)
            report = report.model_copy(update={"complete": False, "error": f"n={n}: time budget exceeded"})
            break

    report = _fit(report)
    if report.r_squared is not None:
        logger.info("Linear fit: slope=%.3e s/sample, R²=%.4f", report.slope, report.r_squared)
    return report


def sensitivity_sweep(
    config: RunConfig,
    alphas: tuple[float, ...] | list[float] = DEFAULT_ALPHAS,
    m_multiples: tuple[int, ...] | list[int] = DEFAULT_M_MULTIPLES,
) -> SweepReport:
    """Сетка α × m; m = кратное·t. Точки с невыполнимым m пропускаются."""
    dataset = load_dataset(config)
    m_values = [mult * dataset.t for mult in m_multiples]
    points: list[SweepPoint] = []
    for alpha in alphas:
        for mult, m in zip(m_multiples, m_values):
            if m < config.k or m > dataset.n:
                logger.warning("Sweep: skipping m=%d (outside [k, n])", m)
                continue
            run_config = config.model_copy(
                update={
                    "m": mult,
                    "m_spec": MSpec.PER_GROUP,
                    "solver": config.solver.model_copy(update={"alpha": alpha}),
                    "output_dir": output_dir_for(config, f"alpha{alpha:g}_m{m}"),
                }
            )
            try:
                outcome = execute(run_config, dataset)
            except AfcfError as exc:
                logger.warning("Sweep point alpha=%g m=%d failed: %s", alpha, m, exc)
                continue
            points.append(
                SweepPoint(
                    alpha=alpha,
                    m=m,
                    metrics=outcome.record.metrics,
                    total_time=outcome.record.timings.total,
                )
            )
    return SweepReport(alphas=list(alphas), m_values=m_values, points=points)
