"""Trace statistics: team invocation classes and call-frequency bins."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

INVOCATION_CLASSES = ("db_only", "kg_only", "both", "none")
# Bin edges partition the positive integers: 1 | 2-3 | 4-5 | 6-10 | 11+.
BIN_LABELS = ("1", "2-3", "4-5", "6-10", "10+")


def classify_invocation(counts: Mapping[str, int]) -> str:
    db = counts.get("database_team", 0)
    kg = counts.get("knowledge_graph_team", 0)
    if db and kg:
        return "both"
    if db:
        return "db_only"
    if kg:
        return "kg_only"
    return "none"


def bin_label(total_calls: int) -> Optional[str]:
    """Bin for total team calls; traces with zero calls carry no bin."""
    if total_calls < 1:
        return None
    if total_calls == 1:
        return "1"
    if total_calls <= 3:
        return "2-3"
    if total_calls <= 5:
        return "4-5"
    if total_calls <= 10:
        return "6-10"
    return "10+"


@dataclass
class StatsReport:
    invocation: dict[str, dict] = field(default_factory=dict)
    bins: dict[str, dict] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"invocation": self.invocation, "bins": self.bins}


def collect_stats(
    traces: Sequence,
    correctness: Optional[Sequence[bool]] = None,
) -> StatsReport:
    """Invocation distribution and per-bin accuracy over session traces.

    ``traces`` is anything exposing ``team_call_counts``; ``correctness``
    lines up with it positionally when gold labels are available.
    """
    class_counts = {c: 0 for c in INVOCATION_CLASSES}
    bin_counts = {b: 0 for b in BIN_LABELS}
    bin_correct: dict[str, list[bool]] = {b: [] for b in BIN_LABELS}

    for i, trace in enumerate(traces):
        counts = trace.team_call_counts
        class_counts[classify_invocation(counts)] += 1
        label = bin_label(sum(counts.values()))
        if label is not None:
            bin_counts[label] += 1
            if correctness is not None:
                bin_correct[label].append(bool(correctness[i]))

    total = len(traces)
    report = StatsReport()
    for cls in INVOCATION_CLASSES:
        count = class_counts[cls]
        report.invocation[cls] = {
            "count": count,
            "pct": (100.0 * count / total) if total else 0.0,
        }
    for label in BIN_LABELS:
        flags = bin_correct[label]
        report.bins[label] = {
            "count": bin_counts[label],
            "accuracy": (sum(flags) / len(flags)) if flags else None,
        }
    return report
