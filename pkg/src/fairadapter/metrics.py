"""Detection and fairness metrics: rank AUC, false-positive rates, and the
per-group disparity measures, plus evaluation report assembly.

Conventions: scores are fake-probabilities, a record is predicted fake when
its score is >= the threshold, and ties in the AUC count one half. The
group disparity measures are

    fpr gap   sum over groups of |group FPR - overall FPR|
    acc gap   max group accuracy - min group accuracy

The accuracy gap is reported under the name ``f_auc`` (its customary name
in detection-fairness tables) with a per-group rank-AUC gap alongside.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .nn import ModelParams
from .embeddings import EmbeddingSet
from .training import score


class UndefinedMetricError(ValueError):
    """The requested metric has an empty denominator on this data."""


@dataclass
class PredictionRecord:
    """One scored test record."""

    id: str
    category: str
    true_label: int
    score: float
    predicted_label: int


@dataclass
class CategoryStats:
    count: int
    real: int
    fake: int
    auc: float | None
    fpr: float | None
    accuracy: float


@dataclass
class FairnessReport:
    """Per-category and aggregate evaluation results for one test set."""

    threshold: float
    per_category: dict[str, CategoryStats] = field(default_factory=dict)
    mean_category_auc: float | None = None
    pooled_auc: float | None = None
    overall_fpr: float | None = None
    f_fpr: float | None = None
    f_auc: float = 0.0
    auc_gap: float | None = None


def auc_rank(real_scores, fake_scores) -> float:
    """Probability that a random fake outscores a random real, ties half.

    Rank (Mann-Whitney) formulation; agrees exactly with exhaustive pair
    counting.
    """
    real = np.asarray(real_scores, dtype=np.float64)
    fake = np.asarray(fake_scores, dtype=np.float64)
    if real.size == 0 or fake.size == 0:
        raise UndefinedMetricError("auc needs at least one real and one fake score")
    ranks = _average_ranks(np.concatenate([real, fake]))
    u = ranks[real.size:].sum() - fake.size * (fake.size + 1) / 2.0
    return float(u / (real.size * fake.size))


def fpr(records: list[PredictionRecord]) -> float:
    """Fraction of natural records predicted AI-generated."""
    reals = [r for r in records if r.true_label == 0]
    if not reals:
        raise UndefinedMetricError("fpr needs at least one natural record")
    return sum(1 for r in reals if r.predicted_label == 1) / len(reals)


def f_fpr(records: list[PredictionRecord]) -> float:
    """Total absolute deviation of per-group FPR from the pooled FPR.

    Groups without natural records have no FPR and are skipped.
    """
    overall = fpr(records)  # raises if no natural records anywhere
    total = 0.0
    for cat in sorted({r.category for r in records}):
        group = [r for r in records if r.category == cat]
        if any(r.true_label == 0 for r in group):
            total += abs(fpr(group) - overall)
    return total


def f_auc(records: list[PredictionRecord]) -> float:
    """Gap between the best and worst per-group correctness rate."""
    if not records:
        raise UndefinedMetricError("accuracy gap needs at least one record")
    accuracies = []
    for cat in sorted({r.category for r in records}):
        group = [r for r in records if r.category == cat]
        accuracies.append(sum(1 for r in group if r.predicted_label == r.true_label) / len(group))
    return max(accuracies) - min(accuracies)


def auc_gap(records: list[PredictionRecord]) -> float:
    """Gap between the best and worst per-group rank AUC, computed over
    groups containing both labels."""
    aucs = []
    for cat in sorted({r.category for r in records}):
        group = [r for r in records if r.category == cat]
        real = [r.score for r in group if r.true_label == 0]
        fake = [r.score for r in group if r.true_label == 1]
        if real and fake:
            aucs.append(auc_rank(real, fake))
    if not aucs:
        raise UndefinedMetricError("no group contains both labels")
    return max(aucs) - min(aucs)


def predict_set(model: ModelParams, test: EmbeddingSet, threshold: float) -> list[PredictionRecord]:
    """Score every record; a score at or above the threshold predicts fake."""
    if not test.records:
        raise ValueError("test set is empty")
    if test.dim != model.dim:
        raise ValueError(f"dimension mismatch: test dim {test.dim} vs model dim {model.dim}")
    out = []
    for rec in test.records:
        s = score(model, rec.vector)
        out.append(PredictionRecord(rec.id, rec.category, rec.label, s, int(s >= threshold)))
    return out


def evaluate_report(model: ModelParams, test: EmbeddingSet, threshold: float = 0.5) -> FairnessReport:
    """Score a test set and assemble the full fairness report."""
    records = predict_set(model, test, threshold)
    report = FairnessReport(threshold=threshold)

    per_cat_aucs = []
    for cat in sorted({r.category for r in records}):
        group = [r for r in records if r.category == cat]
        real = [r.score for r in group if r.true_label == 0]
        fake = [r.score for r in group if r.true_label == 1]
        cat_auc = auc_rank(real, fake) if real and fake else None
        if cat_auc is not None:
            per_cat_aucs.append(cat_auc)
        cat_fpr = fpr(group) if real else None
        accuracy = sum(1 for r in group if r.predicted_label == r.true_label) / len(group)
        report.per_category[cat] = CategoryStats(
            count=len(group), real=len(real), fake=len(fake),
            auc=cat_auc, fpr=cat_fpr, accuracy=accuracy,
        )

    report.mean_category_auc = float(np.mean(per_cat_aucs)) if per_cat_aucs else None
    all_real = [r.score for r in records if r.true_label == 0]
    all_fake = [r.score for r in records if r.true_label == 1]
    report.pooled_auc = auc_rank(all_real, all_fake) if all_real and all_fake else None
    report.overall_fpr = fpr(records) if all_real else None
    report.f_fpr = f_fpr(records) if all_real else None
    report.f_auc = f_auc(records)
    try:
        report.auc_gap = auc_gap(records)
    except UndefinedMetricError:
        report.auc_gap = None
    return report


def report_to_dict(report: FairnessReport) -> dict:
    """JSON-ready view of a report, fractions plus a percent rendering."""
    def pct(v):
        return None if v is None else 100.0 * v

    return {
        "threshold": report.threshold,
        "per_category": {
            cat: {
                "count": s.count,
                "real": s.real,
                "fake": s.fake,
                "auc": s.auc,
                "fpr": s.fpr,
                "accuracy": s.accuracy,
            }
            for cat, s in report.per_category.items()
        },
        "mean_category_auc": report.mean_category_auc,
        "pooled_auc": report.pooled_auc,
        "overall_fpr": report.overall_fpr,
        "f_fpr": report.f_fpr,
        "f_auc": report.f_auc,
        "auc_gap": report.auc_gap,
        "percent": {
            "mean_category_auc": pct(report.mean_category_auc),
            "pooled_auc": pct(report.pooled_auc),
            "overall_fpr": pct(report.overall_fpr),
            "f_fpr": pct(report.f_fpr),
            "f_auc": pct(report.f_auc),
            "auc_gap": pct(report.auc_gap),
        },
    }


def write_report(report: FairnessReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report_to_dict(report), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def write_category_table(report: FairnessReport, path) -> None:
    """Flat per-category table for plotting."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["category", "count", "real", "fake", "auc", "fpr", "accuracy"])
        for cat in sorted(report.per_category):
            s = report.per_category[cat]
            writer.writerow([
                cat, s.count, s.real, s.fake,
                "" if s.auc is None else repr(s.auc),
                "" if s.fpr is None else repr(s.fpr),
                repr(s.accuracy),
            ])


def write_predictions(records: list[PredictionRecord], path) -> None:
    """One CSV line per scored record."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "category", "true_label", "score", "predicted_label"])
        for r in records:
            writer.writerow([r.id, r.category, r.true_label, repr(r.score), r.predicted_label])


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned the mean rank of their run."""
    uniq, inverse, counts = np.unique(values, return_inverse=True, return_counts=True)
    smaller = np.cumsum(counts) - counts
    return (smaller + (counts + 1) / 2.0)[inverse]
