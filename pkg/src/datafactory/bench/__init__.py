"""Benchmark harness: dataset loaders, metrics, trace statistics, runner."""

from .datasets import BenchInstance, load_dataset
from .metrics import cohens_d, exact_match, normalize_answer, rouge_score
from .runner import (
    InstanceResult,
    RunReport,
    default_kg_config,
    parse_tabfact_answer,
    run_benchmark,
)
from .stats import (
    BIN_LABELS,
    INVOCATION_CLASSES,
    StatsReport,
    bin_label,
    classify_invocation,
    collect_stats,
)

__all__ = [
    "BenchInstance",
    "load_dataset",
    "cohens_d",
    "exact_match",
    "normalize_answer",
    "rouge_score",
    "InstanceResult",
    "RunReport",
    "default_kg_config",
    "parse_tabfact_answer",
    "run_benchmark",
    "BIN_LABELS",
    "INVOCATION_CLASSES",
    "StatsReport",
    "bin_label",
    "classify_invocation",
    "collect_stats",
]
