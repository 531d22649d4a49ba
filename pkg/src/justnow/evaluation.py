"""Accuracy scoring and model-size accounting for both model families."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .data import Dataset
from .fitting import FitReport
from .model import FactorizedModel, PairGaussianModel

__all__ = [
    "AccuracyReport",
    "ExtendabilityRow",
    "accuracy",
    "extendability_table",
    "compare",
    "format_accuracy_report",
    "format_accuracy_comparison",
    "format_extendability_table",
]


@dataclass(frozen=True)
class AccuracyReport:
    """Mean absolute error, overall and split by event and by adverbial.

    Group values are unweighted means over the records in each group;
    overall is the mean over all records.
    """

    per_event: dict[str, float]
    per_adverbial: dict[str, float]
    overall: float

    def to_dict(self) -> dict:
        return {
            "per_event": dict(sorted(self.per_event.items())),
            "per_adverbial": dict(sorted(self.per_adverbial.items())),
            "overall": self.overall,
        }


def accuracy(model: FactorizedModel | PairGaussianModel, data: Dataset) -> AccuracyReport:
    """Mean absolute deviation between model predictions and ratings."""
    if not data.records:
        raise ValueError("dataset is empty")
    by_event: dict[str, list[float]] = {}
    by_adverbial: dict[str, list[float]] = {}
    all_errors: list[float] = []
    for rec in data.records:
        prediction = model.probability(rec.event_id, rec.adverbial_id, rec.elapsed)
        error = abs(prediction - rec.rating)
        by_event.setdefault(rec.event_id, []).append(error)
        by_adverbial.setdefault(rec.adverbial_id, []).append(error)
        all_errors.append(error)
    # fsum keeps the means independent of record order.
    return AccuracyReport(
        per_event={eid: math.fsum(errs) / len(errs) for eid, errs in by_event.items()},
        per_adverbial={aid: math.fsum(errs) / len(errs) for aid, errs in by_adverbial.items()},
        overall=math.fsum(all_errors) / len(all_errors),
    )


@dataclass(frozen=True)
class ExtendabilityRow:
    """Function counts each family needs to cover an E x A vocabulary."""

    n_events: int
    n_adverbials: int
    factorized_functions: int
    baseline_functions: int

    def to_dict(self) -> dict:
        return {
            "n_events": self.n_events,
            "n_adverbials": self.n_adverbials,
            "factorized_functions": self.factorized_functions,
            "baseline_functions": self.baseline_functions,
        }


def extendability_table(
    event_counts: list[int], adverbial_counts: list[int]
) -> list[ExtendabilityRow]:
    """Rows of (E, A, E + A, E * A) for paired count lists.

    A singleton list broadcasts against the other list; otherwise the two
    lists pair up elementwise and must have equal length.
    """
    if not event_counts or not adverbial_counts:
        raise ValueError("count lists must be non-empty")
    for count in [*event_counts, *adverbial_counts]:
        if not isinstance(count, int) or isinstance(count, bool) or count < 1:
            raise ValueError(f"counts must be integers >= 1, got {count!r}")
    if len(event_counts) == 1 and len(adverbial_counts) > 1:
        event_counts = event_counts * len(adverbial_counts)
    elif len(adverbial_counts) == 1 and len(event_counts) > 1:
        adverbial_counts = adverbial_counts * len(event_counts)
    if len(event_counts) != len(adverbial_counts):
        raise ValueError(
            f"count lists must align: {len(event_counts)} events vs "
            f"{len(adverbial_counts)} adverbials"
        )
    return [
        ExtendabilityRow(e, a, e + a, e * a)
        for e, a in zip(event_counts, adverbial_counts)
    ]


def compare(factorized: FitReport, baseline: FitReport, data: Dataset) -> dict:
    """Side-by-side accuracy and size accounting; declares no winner."""
    if not isinstance(factorized.model, FactorizedModel):
        raise ValueError("first report must hold a factorized model")
    if not isinstance(baseline.model, PairGaussianModel):
        raise ValueError("second report must hold a per-pair baseline model")
    acc_f = accuracy(factorized.model, data)
    acc_b = accuracy(baseline.model, data)
    events = sorted(acc_f.per_event)
    adverbials = sorted(acc_f.per_adverbial)
    return {
        "factorized": {
            "accuracy": acc_f.to_dict(),
            "parameter_count": factorized.parameter_count,
            "function_count": factorized.model.function_count,
        },
        "baseline": {
            "accuracy": acc_b.to_dict(),
            "parameter_count": baseline.parameter_count,
            "function_count": baseline.model.function_count,
        },
        "accuracy_difference": {
            "per_event": {e: acc_f.per_event[e] - acc_b.per_event[e] for e in events},
            "per_adverbial": {
                a: acc_f.per_adverbial[a] - acc_b.per_adverbial[a] for a in adverbials
            },
            "overall": acc_f.overall - acc_b.overall,
        },
    }


def _name_width(names, minimum: int) -> int:
    return max([minimum, *(len(str(n)) for n in names)])


def format_accuracy_report(report: AccuracyReport, title: str = "Model") -> str:
    """Plain-text MAE table with one row per event, adverbial, and overall."""
    names = [*report.per_event, *report.per_adverbial]
    width = _name_width(names, 10)
    lines = [f"{title} mean absolute error", f"{'Type':<10} {'Name':<{width}} {'MAE':>8}"]
    for eid in sorted(report.per_event):
        lines.append(f"{'Event':<10} {eid:<{width}} {report.per_event[eid]:>8.4f}")
    for aid in sorted(report.per_adverbial):
        lines.append(f"{'Adverbial':<10} {aid:<{width}} {report.per_adverbial[aid]:>8.4f}")
    lines.append(f"{'Overall':<10} {'':<{width}} {report.overall:>8.4f}")
    return "\n".join(lines)


def format_accuracy_comparison(doc: dict) -> str:
    """Plain-text side-by-side MAE table for a compare() document."""
    acc_f = doc["factorized"]["accuracy"]
    acc_b = doc["baseline"]["accuracy"]
    names = [*acc_f["per_event"], *acc_f["per_adverbial"]]
    width = _name_width(names, 10)
    header = f"{'Type':<10} {'Name':<{width}} {'Factorized':>12} {'Non-factorized':>15}"
    lines = [header]
    for eid in sorted(acc_f["per_event"]):
        lines.append(
            f"{'Event':<10} {eid:<{width}} {acc_f['per_event'][eid]:>12.4f} "
            f"{acc_b['per_event'][eid]:>15.4f}"
        )
    for aid in sorted(acc_f["per_adverbial"]):
        lines.append(
            f"{'Adverbial':<10} {aid:<{width}} {acc_f['per_adverbial'][aid]:>12.4f} "
            f"{acc_b['per_adverbial'][aid]:>15.4f}"
        )
    lines.append(
        f"{'Overall':<10} {'':<{width}} {acc_f['overall']:>12.4f} {acc_b['overall']:>15.4f}"
    )
    lines.append("")
    lines.append(
        f"{'Functions':<{10 + 1 + width}} "
        f"{doc['factorized']['function_count']:>12d} {doc['baseline']['function_count']:>15d}"
    )
    lines.append(
        f"{'Parameters':<{10 + 1 + width}} "
        f"{doc['factorized']['parameter_count']:>12d} {doc['baseline']['parameter_count']:>15d}"
    )
    return "\n".join(lines)


def format_extendability_table(rows: list[ExtendabilityRow]) -> str:
    """Plain-text function-count table, one row per vocabulary size."""
    lines = [f"{'Events':>8} {'Adverbials':>11} {'Factorized':>11} {'Non-factorized':>15}"]
    for row in rows:
        lines.append(
            f"{row.n_events:>8d} {row.n_adverbials:>11d} "
            f"{row.factorized_functions:>11d} {row.baseline_functions:>15d}"
        )
    return "\n".join(lines)
