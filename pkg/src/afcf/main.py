"""
═══════════════════════════════════════════════════════════════════════════════
AFCF — Точка входа командной строки (CLI Entry Point)
═══════════════════════════════════════════════════════════════════════════════

Подкоманды:
    • cluster — полный прогон конвейера (labels.csv, record.json, trace.jsonl)
    • gen     — синтетический CSV (два гауссовых кластера + бинарный атрибут)
    • bench   — бенчмарк масштабируемости по n (bench.json)
    • sweep   — анализ чувствительности по α × m (sweep.json)
    • metrics — пересчёт метрик по файлу меток и набору данных

Ошибки печатаются в stderr как ``[stage] CODE: message``; код выхода
выбирается по ``STATUS_MAP``.
"""

from __future__ import annotations

import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator

import click
from pydantic import ValidationError

from afcf import __version__
from afcf.adapters.csv_loader import dataset_frame
from afcf.adapters.synthetic import gen_synthetic
from afcf.config import get_settings
from afcf.db.repositories import result_repo
from afcf.exceptions import AfcfError, StageError
from afcf.models.enums import AnchorMode, GraphMode, MSpec
from afcf.models.graph import SolverConfig
from afcf.models.run import RunConfig, SyntheticSpec
from afcf.operators import available_operators
from afcf.services import benchmark, metrics
from afcf.services.pipeline import load_dataset, run_pipeline

# ═══════════════════════════════════════════════════════════════════════════════
# Настройка логирования
# ═══════════════════════════════════════════════════════════════════════════════
logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    handlers=[logging.StreamHandler(sys.stderr)],
)
logger = logging.getLogger(__name__)

# ── Коды ошибок → коды выхода ─────────────────────────────────────────────
STATUS_MAP = {
    "AFCF_DATA_INVALID": 10,
    "AFCF_QUOTA_INFEASIBLE": 11,
    "AFCF_OPERATOR_CONTRACT": 12,
    "AFCF_CONSTRAINT_INFEASIBLE": 13,
    "AFCF_SOLVER_DIVERGED": 14,
    "AFCF_METRIC_UNDEFINED": 15,
}


def exit_code_for(code: str) -> int:
    return STATUS_MAP.get(code, 1)


@contextmanager
def _reported(command: str) -> Iterator[None]:
    """Печатает доменную ошибку в stderr и завершает процесс с кодом по STATUS_MAP."""
    try:
        yield
    except StageError as exc:
        code = str(exc.details.get("cause_code", exc.code))
        click.echo(f"[{exc.stage}] {code}: {getattr(exc.cause, 'message', exc.cause)}", err=True)
        sys.exit(exit_code_for(code))
    except AfcfError as exc:
        stage = exc.details.get("stage", command)
        click.echo(f"[{stage}] {exc.code}: {exc.message}", err=True)
        sys.exit(exit_code_for(exc.code))
    except ValidationError as exc:
        errors = "; ".join(f"{'.'.join(map(str, e['loc'])) or 'config'}: {e['msg']}" for e in exc.errors())
        click.echo(f"[config] AFCF_DATA_INVALID: {errors}", err=True)
        sys.exit(exit_code_for("AFCF_DATA_INVALID"))


def _output_dir(out: Path | None) -> Path | None:
    """AFCF_OUTPUT_DIR перекрывает --out."""
    return get_settings().output_dir or out


def _csv_list(value: str | None, cast=str) -> list | None:
    if value is None:
        return None
    return [cast(v.strip()) for v in value.split(",") if v.strip()]


# ── Общие опции ───────────────────────────────────────────────────────────

def _source_options(fn):
    options = [
        click.option("--input", "input_path", type=click.Path(dir_okay=False, path_type=Path),
                     help="CSV file with a header row."),
        click.option("--synthetic", "synthetic_n", type=int, help="Generate n synthetic samples instead of --input."),
        click.option("--synthetic-seed", type=int, default=0, show_default=True),
        click.option("--separation", type=float, default=3.0, show_default=True),
        click.option("--attribute", "attribute_column", help="Sensitive attribute column."),
        click.option("--truth", "truth_column", help="Ground-truth label column (optional)."),
        click.option("--features", "feature_columns", help="Comma-separated feature columns (default: the rest)."),
        click.option("--k", type=int, default=2, show_default=True, help="Number of clusters."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _run_options(fn):
    options = [
        click.option("--m", type=int, default=20, show_default=True, help="Number of anchors."),
        click.option("--m-per-group", is_flag=True, help="Treat --m as a multiple of the group count t."),
        click.option("--operator", type=click.Choice(available_operators()), default="fairlet-kcenter",
                     show_default=True),
        click.option("--anchor-mode", type=click.Choice([m.value for m in AnchorMode]), default="fdas",
                     show_default=True),
        click.option("--graph-mode", type=click.Choice([m.value for m in GraphMode]), default="fair",
                     show_default=True),
        click.option("--alpha", type=float, help="Ridge weight (default from AFCF_ALPHA)."),
        click.option("--rho0", type=float),
        click.option("--eps", type=float, help="ADMM tolerance on max(r, s)."),
        click.option("--max-iter", type=int, help="ADMM iteration cap."),
        click.option("--fw-max-iter", type=int, help="Frank-Wolfe iteration cap."),
        click.option("--rho-period", type=int),
        click.option("--max-workers", type=int, help="Worker cap for the Z-update."),
        click.option("--seed", type=int, help="Seed for random anchors and operators."),
        click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=Path("afcf-out"),
                     show_default=True),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _build_config(params: dict) -> RunConfig:
    """RunConfig из параметров CLI; решатель — настройки + перекрытия флагами."""
    synthetic = None
    if params.get("synthetic_n") is not None:
        synthetic = SyntheticSpec(
            n=params["synthetic_n"],
            seed=params.get("synthetic_seed", 0),
            separation=params.get("separation", 3.0),
        )
    solver = SolverConfig.from_settings(
        alpha=params.get("alpha"),
        rho0=params.get("rho0"),
        eps=params.get("eps"),
        max_iter=params.get("max_iter"),
        fw_max_iter=params.get("fw_max_iter"),
        rho_period=params.get("rho_period"),
        max_workers=params.get("max_workers"),
    )
    seed = params.get("seed")
    return RunConfig(
        input_path=params.get("input_path"),
        synthetic=synthetic,
        attribute_column=params.get("attribute_column"),
        truth_column=params.get("truth_column"),
        feature_columns=_csv_list(params.get("feature_columns")),
        k=params["k"],
        m=params.get("m", 20),
        m_spec=MSpec.PER_GROUP if params.get("m_per_group") else MSpec.ABSOLUTE,
        operator=params.get("operator", "fairlet-kcenter"),
        anchor_mode=AnchorMode(params.get("anchor_mode", "fdas")),
        graph_mode=GraphMode(params.get("graph_mode", "fair")),
        solver=solver,
        seed=get_settings().seed if seed is None else seed,
        output_dir=_output_dir(params.get("out")),
    )


# ═══════════════════════════════════════════════════════════════════════════════
# Команды
# ═══════════════════════════════════════════════════════════════════════════════

@click.group()
@click.version_option(__version__, prog_name="afcf")
@click.option("--log-level", default=None, help="Overrides AFCF_LOG_LEVEL.")
def cli(log_level: str | None) -> None:
    """Anchor-based fair clustering."""
    level = (log_level or get_settings().log_level).upper()
    logging.getLogger().setLevel(level)


@cli.command()
@_source_options
@_run_options
def cluster(**params) -> None:
    """Run the full pipeline and write labels, record and trace."""
    with _reported("cluster"):
        config = _build_config(params)
        record = run_pipeline(config)
        bundle = record.metrics
        logger.info("🚀 Run finished: m=%d, %d ADMM iterations", record.m, record.solver_iterations)
        click.echo(
            f"balance={bundle.balance:.4f} mnce={bundle.mnce} acc={bundle.acc} nmi={bundle.nmi} "
            f"time={record.timings.total:.3f}s"
        )
        if record.labels_path is not None:
            click.echo(f"labels: {record.labels_path}")


@cli.command()
@click.option("--n", type=int, required=True, help="Number of samples.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--separation", type=float, default=3.0, show_default=True)
@click.option("--attr-probs", type=float, nargs=2, default=(0.65, 0.35), show_default=True,
              help="P(group 0) inside truth cluster 0 and cluster 1.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
def gen(n: int, seed: int, separation: float, attr_probs: tuple[float, float], out: Path) -> None:
    """Write a synthetic CSV with columns x0, x1, group, truth."""
    with _reported("gen"):
        dataset = gen_synthetic(n, seed, separation=separation, attr_probs=tuple(attr_probs))
        out.parent.mkdir(parents=True, exist_ok=True)
        dataset_frame(dataset).to_csv(out, index=False)
        click.echo(f"wrote {dataset.n} samples to {out}")


@cli.command()
@click.option("--sizes", default="10000,20000,40000,80000", show_default=True,
              help="Comma-separated, strictly increasing sample sizes.")
@click.option("--budget", type=float, help="Per-run time budget in seconds (default AFCF_BENCH_TIME_BUDGET_S).")
@click.option("--synthetic-seed", type=int, default=0, show_default=True)
@click.option("--k", type=int, default=2, show_default=True)
@_run_options
def bench(sizes: str, budget: float | None, **params) -> None:
    """Scaling benchmark over synthetic sample sizes at fixed m, d, k."""
    with _reported("bench"):
        size_list = _csv_list(sizes, int)
        config = _build_config({**params, "synthetic_n": size_list[0]})
        report = benchmark.benchmark_scaling(config, size_list, time_budget_s=budget)
        if config.output_dir is not None:
            path = result_repo.write_model(config.output_dir / result_repo.BENCH_FILE, report)
            click.echo(f"report: {path}")
        for point in report.points:
            click.echo(f"n={point.n} total={point.timings.total:.3f}s")
        if report.r_squared is not None:
            click.echo(f"slope={report.slope:.3e} r2={report.r_squared:.4f}")
    if report.error and not (report.points and report.points[-1].timed_out):
        click.echo(f"[bench] incomplete: {report.error}", err=True)
        sys.exit(1)


@cli.command()
@_source_options
@_run_options
@click.option("--alphas", default="1e-4,1e-2,1,100", show_default=True)
@click.option("--m-multiples", default="2,4,6,8,10,12,14,16,18,20", show_default=True,
              help="m values as multiples of the group count t.")
def sweep(alphas: str, m_multiples: str, **params) -> None:
    """Parameter sensitivity over the alpha x m grid."""
    with _reported("sweep"):
        config = _build_config(params)
        report = benchmark.sensitivity_sweep(config, _csv_list(alphas, float), _csv_list(m_multiples, int))
        if config.output_dir is not None:
            path = result_repo.write_model(config.output_dir / result_repo.SWEEP_FILE, report)
            click.echo(f"report: {path}")
        for point in report.points:
            click.echo(
                f"alpha={point.alpha:g} m={point.m} balance={point.metrics.balance:.4f} "
                f"acc={point.metrics.acc} nmi={point.metrics.nmi}"
            )


@cli.command("metrics")
@_source_options
@click.option("--labels", "labels_path", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), help="Write metrics.json into this directory.")
def metrics_command(labels_path: Path, out: Path | None, **params) -> None:
    """Recompute metrics from a labels file and its dataset."""
    with _reported("metrics"):
        config = _build_config({**params, "m": params["k"], "out": None})
        dataset = load_dataset(config)
        labels = result_repo.read_labels(labels_path, dataset.n)
        k = max(config.k, int(labels.max()) + 1)
        bundle = metrics.evaluate(labels, dataset.groups, k, dataset.t, dataset.truth)
        out_dir = _output_dir(out)
        if out_dir is not None:
            path = result_repo.write_model(out_dir / result_repo.METRICS_FILE, bundle)
            logger.info("Metrics written to %s", path)
        click.echo(bundle.model_dump_json(indent=2))


def main() -> None:
    """Console-script entry point."""
    cli()


if __name__ == "__main__":
    main()
