from .ablation import ablation_suite, ablation_variants  # noqa
from .config import ConfigError, ExperimentConfig, config_from_dict, load_config  # noqa
from .metrics import COLUMNS, MetricsRow, RecordKind, RunMetrics  # noqa
from .report import (  # noqa
    CheckpointAggregate,
    ReportError,
    SweepSummary,
    aggregate,
    report,
)
from .runner import RunFailure, run, run_seed  # noqa
