"""Generalized stochastic dominance fronts for multi-metric classifier benchmarks."""

__version__ = "0.1.0"

from gsdfront.core import (  # noqa: E402
    DataError,
    GsdError,
    MetricSpec,
    NumericalError,
    PerformanceTable,
    Scale,
    ScaleSpec,
    TestConfig,
    validate_table,
)
from gsdfront.gsd import (  # noqa: E402
    DominanceGraph,
    EmpiricalMeasure,
    FrontKind,
    FrontResult,
    StatisticResult,
    d_matrix,
    d_statistic,
    egsd_front,
    empirical_gsd_relation,
    epsilon_schedule,
    pareto_front,
)
from gsdfront.permtest import (  # noqa: E402
    ResamplingPlan,
    dynamic_gsd_test,
    pairwise_test,
    resample_statistics,
    static_gsd_test,
)
from gsdfront.prefsys import (  # noqa: E402
    ConstraintSet,
    Relation3,
    build_constraints,
    check_consistency,
    granularity,
    r1_compare,
    r2_compare,
)
from gsdfront.robust import (  # noqa: E402
    ContaminationCurve,
    aggregate_F,
    breakdown,
    contamination_curve,
    contamination_pvalue,
    robustified_dynamic_test,
    robustified_static_test,
)

__all__ = [
    "ConstraintSet",
    "ContaminationCurve",
    "DataError",
    "DominanceGraph",
    "EmpiricalMeasure",
    "FrontKind",
    "FrontResult",
    "GsdError",
    "MetricSpec",
    "NumericalError",
    "PerformanceTable",
    "Relation3",
    "ResamplingPlan",
    "Scale",
    "ScaleSpec",
    "StatisticResult",
    "TestConfig",
    "__version__",
    "aggregate_F",
    "breakdown",
    "build_constraints",
    "check_consistency",
    "contamination_curve",
    "contamination_pvalue",
    "d_matrix",
    "d_statistic",
    "dynamic_gsd_test",
    "egsd_front",
    "empirical_gsd_relation",
    "epsilon_schedule",
    "granularity",
    "pairwise_test",
    "pareto_front",
    "r1_compare",
    "r2_compare",
    "resample_statistics",
    "robustified_dynamic_test",
    "robustified_static_test",
    "static_gsd_test",
    "validate_table",
]
