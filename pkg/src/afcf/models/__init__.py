"""
afcf.models — Модели данных AFCF.

Реэкспорт основных классов для удобства:
    from afcf.models import Dataset, AnchorSet, SolverConfig
"""

from afcf.models.enums import AnchorMode, GraphMode, MSpec  # noqa: F401
from afcf.models.dataset import Dataset, GroupStats  # noqa: F401
from afcf.models.anchors import AnchorLabeling, AnchorSet, QuotaVector  # noqa: F401
from afcf.models.graph import (  # noqa: F401
    AdmmState,
    AnchorGraph,
    ConstraintTable,
    SolveResult,
    SolverConfig,
    TraceEntry,
)
from afcf.models.result import ClusterResult, MetricsBundle  # noqa: F401
from afcf.models.run import (  # noqa: F401
    RunConfig,
    RunRecord,
    ScalingPoint,
    ScalingReport,
    StageTimings,
    SweepPoint,
    SweepReport,
    SyntheticSpec,
)
