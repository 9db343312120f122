import json

import numpy as np
import pytest

from afcf.db.repositories import result_repo
from afcf.exceptions import StageError
from afcf.models.enums import AnchorMode, GraphMode, MSpec
from afcf.models.graph import SolverConfig
from afcf.models.run import RunConfig, SyntheticSpec
from afcf.operators.registry import _REGISTRY
from afcf.services import benchmark, fair_graph
from afcf.services.dataset_service import validate_dataset
from afcf.services.pipeline import execute, run_pipeline

from conftest import make_dataset


def _config(tmp_path=None, **overrides):
    base = dict(
        synthetic=SyntheticSpec(n=240, seed=0),
        k=2,
        m=20,
        solver=SolverConfig(max_iter=40, fw_max_iter=100),
        output_dir=tmp_path,
    )
    base.update(overrides)
    return RunConfig(**base)


class TestRunConfig:
    def test_exactly_one_source(self, tmp_path):
        with pytest.raises(ValueError):
            RunConfig(k=2, m=4)
        with pytest.raises(ValueError):
            RunConfig(synthetic=SyntheticSpec(n=10), input_path=tmp_path / "x.csv", attribute_column="g")

    def test_csv_needs_attribute(self, tmp_path):
        with pytest.raises(ValueError):
            RunConfig(input_path=tmp_path / "x.csv")

    def test_m_at_least_k(self):
        with pytest.raises(ValueError):
            RunConfig(synthetic=SyntheticSpec(n=10), k=3, m=2)

    def test_m_per_group(self):
        config = RunConfig(synthetic=SyntheticSpec(n=10), k=2, m=3, m_spec=MSpec.PER_GROUP)
        assert config.resolve_m(2) == 6

    def test_solver_rule_constants(self):
        with pytest.raises(ValueError):
            SolverConfig(rho_beta=1.0)
        with pytest.raises(ValueError):
            SolverConfig(rho_tau=0.5)


class TestExecute:
    def test_writes_outputs(self, tmp_path):
        outcome = execute(_config(tmp_path))
        record = outcome.record
        assert (record.n, record.d, record.t, record.m) == (240, 2, 2, 20)
        assert sum(record.anchor_histogram) == 20
        assert sum(record.group_sizes) == 240

        labels = result_repo.read_labels(tmp_path / result_repo.LABELS_FILE, n=240)
        np.testing.assert_array_equal(labels, outcome.result.hard_labels)

        stored = json.loads((tmp_path / result_repo.RECORD_FILE).read_text(encoding="utf-8"))
        assert stored["m"] == 20
        assert stored["metrics"]["balance"] == pytest.approx(record.metrics.balance)

        lines = (tmp_path / result_repo.TRACE_FILE).read_text(encoding="utf-8").splitlines()
        events = [json.loads(line)["event"] for line in lines]
        assert events.count("admm.iteration") == record.solver_iterations
        # load + five timed stages
        assert events.count("stage.done") == 6

    def test_record_metrics_and_timings(self):
        record = run_pipeline(_config())
        assert record.metrics.acc is not None and record.metrics.nmi is not None
        assert record.metrics.soft_balance is not None
        assert record.metrics.target_balance is not None
        assert 0.0 <= record.metrics.balance <= 1.0
        assert record.timings.total > 0
        assert 0.95 <= record.timings.covered <= 1.0 + 1e-9
        assert record.labels_path is None

    def test_record_reports_anchor_target_gap(self):
        record = run_pipeline(_config())
        gap = record.metrics.anchor_balance - record.metrics.target_balance
        assert record.metrics.anchor_target_gap == pytest.approx(gap)
        assert record.residual_monotone

    def test_deterministic(self):
        a = execute(_config(anchor_mode=AnchorMode.RANDOM, seed=3))
        b = execute(_config(anchor_mode=AnchorMode.RANDOM, seed=3))
        np.testing.assert_array_equal(a.anchors.indices, b.anchors.indices)
        np.testing.assert_array_equal(a.result.hard_labels, b.result.hard_labels)
        np.testing.assert_array_equal(a.solve.graph.Z, b.solve.graph.Z)

    @pytest.mark.parametrize("anchor_mode", list(AnchorMode))
    @pytest.mark.parametrize("graph_mode", list(GraphMode))
    def test_ablation_modes(self, anchor_mode, graph_mode):
        config = _config(anchor_mode=anchor_mode, graph_mode=graph_mode, operator="lloyd")
        outcome = execute(config)
        assert outcome.result.hard_labels.shape == (240,)
        assert (outcome.record.metrics.target_balance is None) == (graph_mode == GraphMode.UNCONSTRAINED)

    def test_per_group_m(self):
        record = run_pipeline(_config(m=5, m_spec=MSpec.PER_GROUP))
        assert record.m == 10
        assert record.m_spec == MSpec.PER_GROUP

    def test_provided_dataset(self):
        ds = make_dataset([20, 20], seed=5)
        record = run_pipeline(_config(m=8), dataset=ds)
        assert record.n == 40


class TestStageErrors:
    def test_m_above_n(self, tmp_path):
        with pytest.raises(StageError) as err:
            execute(_config(tmp_path, synthetic=SyntheticSpec(n=10), m=20))
        assert err.value.stage == "config"
        assert err.value.details["cause_code"] == "AFCF_QUOTA_INFEASIBLE"
        assert not (tmp_path / result_repo.LABELS_FILE).exists()

    def test_operator_failure_removes_outputs(self, tmp_path):
        rng = np.random.default_rng(0)
        ds = validate_dataset(rng.standard_normal((2, 30)), np.repeat([0, 1, 2], 10))
        with pytest.raises(StageError) as err:
            execute(_config(tmp_path, m=9), dataset=ds)
        assert err.value.stage == "anchor_clustering"
        assert err.value.details["cause_code"] == "AFCF_OPERATOR_CONTRACT"
        assert not (tmp_path / result_repo.TRACE_FILE).exists()
        assert not (tmp_path / result_repo.RECORD_FILE).exists()

    def test_unknown_operator(self):
        with pytest.raises(StageError) as err:
            execute(_config(operator="missing"))
        assert err.value.stage == "anchor_clustering"

    def test_third_party_exception_names_stage(self, monkeypatch):
        def broken(anchors, anchor_groups, k, *, seed=0):
            return np.arange(k)[len(anchors)]

        monkeypatch.setitem(_REGISTRY, "broken", broken)
        with pytest.raises(StageError) as err:
            execute(_config(operator="broken"))
        assert err.value.stage == "anchor_clustering"
        assert err.value.details["cause_code"] == "IndexError"
        assert isinstance(err.value.cause, IndexError)

    def test_missing_csv(self, tmp_path):
        config = RunConfig(input_path=tmp_path / "absent.csv", attribute_column="g", k=2, m=4)
        with pytest.raises(StageError) as err:
            execute(config)
        assert err.value.stage == "load"
        assert err.value.details["cause_code"] == "AFCF_DATA_INVALID"


@pytest.mark.slow
class TestAcceptance:
    def test_fair_graph_beats_unconstrained_on_skewed_groups(self):
        base = dict(synthetic=SyntheticSpec(n=5000, seed=0), m=20, solver=SolverConfig())
        fair = run_pipeline(_config(**base))
        plain = run_pipeline(_config(**base, graph_mode=GraphMode.UNCONSTRAINED))
        assert fair.metrics.soft_balance >= plain.metrics.soft_balance - 1e-3

    def test_admm_converges_on_synthetic(self):
        outcome = execute(_config(synthetic=SyntheticSpec(n=5000, seed=0), m=20, solver=SolverConfig()))
        record = outcome.record
        assert record.solver_converged
        assert record.solver_iterations <= 500
        assert record.residual_monotone
        assert record.timings.total < 60.0
        assert record.timings.covered >= 0.95
        last = outcome.solve.trace[-1]
        assert max(last.r, last.s) < 1e-4
        assert fair_graph.residual_monotone(outcome.solve.trace)

    def test_soft_balance_reaches_target_balance(self):
        rng = np.random.default_rng(0)
        for seed in range(50):
            n = int(rng.integers(200, 2001))
            m = int(rng.integers(4, 41))
            p0, p1 = rng.uniform(0.2, 0.8, size=2)
            config = _config(
                synthetic=SyntheticSpec(n=n, seed=seed, attr_probs=(float(p0), float(p1))),
                m=m,
                solver=SolverConfig(),
            )
            record = run_pipeline(config)
            assert record.solver_converged, (seed, n, m)
            assert record.metrics.soft_balance == pytest.approx(record.metrics.target_balance, abs=1e-3), (seed, n, m)
            assert record.metrics.anchor_target_gap == pytest.approx(
                record.metrics.anchor_balance - record.metrics.target_balance
            )

    def test_hundred_thousand_samples(self):
        record = run_pipeline(_config(synthetic=SyntheticSpec(n=100_000, seed=0), m=20, solver=SolverConfig()))
        assert record.metrics.acc >= 0.90
        assert record.metrics.balance >= 0.55
        assert record.timings.total < 300.0


@pytest.mark.slow
def test_runtime_scales_linearly(tmp_path):
    config = _config(tmp_path, synthetic=SyntheticSpec(n=10_000, seed=0), m=20, solver=SolverConfig())
    report = benchmark.benchmark_scaling(config, [10_000, 20_000, 40_000, 80_000])
    assert report.complete
    assert report.r_squared >= 0.95
    assert all(ratio <= 2.5 for ratio in report.doubling_ratios)
