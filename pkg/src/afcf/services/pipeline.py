"""
afcf/services/pipeline.py — Оркестрация AFCF: якоря → F → граф → метки → метрики.

Каждая стадия замеряется отдельно и при ошибке оборачивается в
``StageError`` с именем стадии; частичные файлы результатов удаляются.
"""

from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator

from afcf.adapters.csv_loader import load_csv
from afcf.adapters.synthetic import from_spec
from afcf.db.repositories import result_repo
from afcf.exceptions import QuotaError, StageError
from afcf.models.anchors import AnchorLabeling, AnchorSet
from afcf.models.common import AfcfBase
from afcf.models.dataset import Dataset
from afcf.models.enums import AnchorMode, GraphMode
from afcf.models.graph import SolveResult
from afcf.models.result import ClusterResult
from afcf.models.run import RunConfig, RunRecord, StageTimings
from afcf.operators import get_operator
from afcf.services import fair_graph, fdas, metrics
from afcf.services.anchor_clustering import run_operator
from afcf.services.dataset_service import group_stats
from afcf.services.propagation import propagate
from afcf.services.trace_logger import TraceEvent, TraceLogger

logger = logging.getLogger(__name__)


class PipelineOutcome(AfcfBase):
    """Все промежуточные результаты одного запуска."""

    dataset: Dataset
    anchors: AnchorSet
    labeling: AnchorLabeling
    solve: SolveResult
    result: ClusterResult
    record: RunRecord


@contextmanager
def _stage(name: str, timings: dict[str, float], trace: TraceLogger) -> Iterator[None]:
    """Замер длительности стадии и перевод ошибок в StageError."""
    trace.log(TraceEvent.STAGE_START, stage=name)
    start = time.perf_counter()
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc
    finally:
        timings[name] = time.perf_counter() - start
    trace.log(TraceEvent.STAGE_DONE, stage=name, seconds=timings[name])


def load_dataset(config: RunConfig) -> Dataset:
    """Набор из CSV или синтетический — по конфигурации."""
    if config.input_path is not None:
        return load_csv(
            config.input_path,
            config.attribute_column,
            config.truth_column,
            config.feature_columns,
            k=config.k,
        )
    return from_spec(config.synthetic)


def select(dataset: Dataset, m: int, mode: AnchorMode, seed: int) -> AnchorSet:
    """Отбор якорей по режиму абляции."""
    if mode == AnchorMode.FDAS:
        return fdas.select_anchors(dataset, m)
    if mode == AnchorMode.DAS:
        return fdas.select_anchors_das(dataset, m)
    return fdas.select_anchors_random(dataset, m, seed)


def execute(config: RunConfig, dataset: Dataset | None = None) -> PipelineOutcome:
    """
    Полный прогон конвейера.

    Args:
        dataset: Готовый набор (бенчмарк, тесты); иначе грузится по config.

    Raises:
        StageError: ошибка любой стадии (имя стадии в details["stage"]).
    """
    out_dir = config.output_dir
    labels_path = out_dir / result_repo.LABELS_FILE if out_dir else None
    trace_path = out_dir / result_repo.TRACE_FILE if out_dir else None
    record_path = out_dir / result_repo.RECORD_FILE if out_dir else None

    timings: dict[str, float] = {}
    trace = TraceLogger(trace_path)
    try:
        if dataset is None:
            with _stage("load", timings, trace):
                dataset = load_dataset(config)

        stats = group_stats(dataset)
        m = config.resolve_m(dataset.t)
        if m < config.k or m > dataset.n:
            raise StageError(
                "config",
                QuotaError(f"m={m} must lie in [k={config.k}, n={dataset.n}]", details={"m": m}),
            )
        logger.info(
            "AFCF run: n=%d t=%d m=%d k=%d operator=%s anchors=%s graph=%s",
            dataset.n, dataset.t, m, config.k, config.operator,
            config.anchor_mode.value, config.graph_mode.value,
        )

        total_start = time.perf_counter()
        with _stage("anchor_selection", timings, trace):
            anchors = select(dataset, m, config.anchor_mode, config.seed)

        with _stage("anchor_clustering", timings, trace):
            operator = get_operator(config.operator)
            labeling = run_operator(operator, anchors, config.k, t=dataset.t, seed=config.seed)

        fair = config.graph_mode == GraphMode.FAIR
        table = None
        with _stage("graph_construction", timings, trace):
            if fair:
                table = fair_graph.build_constraint_table(labeling, dataset, m)
            solved = fair_graph.solve(
                dataset, anchors, labeling, config.solver,
                constraints=table, fair=fair, on_iteration=trace.admm_iteration,
            )

        with _stage("propagation", timings, trace):
            result = propagate(solved.graph, labeling)

        with _stage("metrics", timings, trace):
            bundle = metrics.evaluate(
                result.hard_labels, dataset.groups, config.k, dataset.t, dataset.truth,
                Z=solved.graph.Z, labeling=labeling,
                target_balance=fair_graph.target_balance(table) if table is not None else None,
            )
        total = time.perf_counter() - total_start

        stage_timings = StageTimings(
            anchor_selection=timings["anchor_selection"],
            anchor_clustering=timings["anchor_clustering"],
            graph_construction=timings["graph_construction"],
            propagation=timings["propagation"],
            metrics=timings["metrics"],
            total=total,
        )
        result = result.model_copy(update={"metrics": bundle.as_flat(), "timings": stage_timings.model_dump()})
        if bundle.empty_clusters:
            logger.warning("Predicted clusters %s are empty after propagation", bundle.empty_clusters)

        record = RunRecord(
            config=config,
            n=dataset.n,
            d=dataset.d,
            t=dataset.t,
            m=m,
            m_spec=config.m_spec,
            group_map=dataset.group_map,
            group_sizes=stats.sizes.tolist(),
            anchor_histogram=fdas.anchor_histogram(anchors, dataset.t).tolist(),
            metrics=bundle,
            timings=stage_timings,
            solver_converged=solved.converged,
            solver_iterations=solved.iterations,
            final_rho=solved.final_rho,
            objective_monotone=fair_graph.is_monotone([e.objective for e in solved.trace]),
            residual_monotone=fair_graph.residual_monotone(solved.trace),
            labels_path=labels_path,
            trace_path=trace_path,
            record_path=record_path,
        )
        if out_dir is not None:
            result_repo.write_labels(labels_path, result.hard_labels)
            trace.flush()
            result_repo.write_model(record_path, record)
            logger.info("Run outputs written to %s", out_dir)
    except Exception:
        result_repo.remove_outputs(labels_path, trace_path, record_path)
        raise

    logger.info(
        "AFCF done in %.3fs: balance=%.4f soft_balance=%s acc=%s",
        stage_timings.total, bundle.balance, bundle.soft_balance, bundle.acc,
    )
    return PipelineOutcome(
        dataset=dataset,
        anchors=anchors,
        labeling=labeling,
        solve=solved,
        result=result,
        record=record,
    )


def run_pipeline(config: RunConfig, dataset: Dataset | None = None) -> RunRecord:
    """Прогон конвейера; возвращает RunRecord."""
    return execute(config, dataset).record


def output_dir_for(config: RunConfig, sub: str) -> Path | None:
    """Подкаталог результатов (для серий запусков)."""
    return config.output_dir / sub if config.output_dir is not None else None
