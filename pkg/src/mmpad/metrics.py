"""Threshold-free evaluation metrics: AUC-ROC, AUC-PR, and their range-aware
volume variants VUS-ROC and VUS-PR.

Fractional labels are handled as instance weights (positive weight = label,
negative weight = 1 - label), which keeps the binary case exact and lets the
VUS construction reuse the same AUC code on ramped labels. VUS at window ell
is the mean over integer buffer widths 0..ell of the AUC on labels whose
anomaly segments are extended by a linear ramp of that width on each side.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MetricError, ParameterError


def _validated(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64).ravel()
    w = np.asarray(labels, dtype=np.float64).ravel()
    if s.shape != w.shape:
        raise MetricError(
            f"scores ({s.size}) and labels ({w.size}) must have equal length"
        )
    if s.size == 0:
        raise MetricError("scores must be non-empty")
    if not np.all(np.isfinite(s)):
        raise MetricError("scores must be finite")
    if not np.all(np.isfinite(w)) or np.any(w < 0) or np.any(w > 1):
        raise MetricError("labels must lie in [0, 1]")
    return s, w


def _grouped_cumweights(s: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative positive/negative weight at the end of each score tie group,
    walking thresholds in descending score order."""
    order = np.argsort(-s, kind="stable")
    ss = s[order]
    wp = w[order]
    ctp = np.cumsum(wp)
    cfp = np.cumsum(1.0 - wp)
    last = np.flatnonzero(np.append(ss[1:] != ss[:-1], True))
    return ctp[last], cfp[last]


def auc_roc(scores, labels) -> float:
    """Exact trapezoidal area under the ROC curve with weighted labels."""
    s, w = _validated(scores, labels)
    total_pos = float(w.sum())
    total_neg = float((1.0 - w).sum())
    if total_pos <= 0:
        raise MetricError("AUC-ROC undefined: no positive-weighted labels")
    if total_neg <= 0:
        raise MetricError("AUC-ROC undefined: no negative-weighted labels")
    tp, fp = _grouped_cumweights(s, w)
    tpr = np.concatenate([[0.0], tp / total_pos])
    fpr = np.concatenate([[0.0], fp / total_neg])
    return float(np.trapezoid(tpr, fpr))


def auc_pr(scores, labels) -> float:
    """Average-precision-style area under the PR curve with weighted labels."""
    s, w = _validated(scores, labels)
    total_pos = float(w.sum())
    if total_pos <= 0:
        raise MetricError("AUC-PR undefined: no positive-weighted labels")
    tp, fp = _grouped_cumweights(s, w)
    recall = tp / total_pos
    precision = tp / (tp + fp)
    prev_recall = np.concatenate([[0.0], recall[:-1]])
    return float(np.sum((recall - prev_recall) * precision))


def smooth_labels(labels, width: int) -> np.ndarray:
    """Extend each anomaly segment by a linear ramp of ``width`` on each side.

    A position at offset t in [1, width] outside a segment gets
    max(existing, 1 - t/(width+1)); overlapping ramps take the pointwise
    maximum. ``width`` 0 returns the labels unchanged (as floats).
    """
    w = np.asarray(labels, dtype=np.float64).ravel()
    if not np.all((w == 0) | (w == 1)):
        raise MetricError("smooth_labels expects binary labels")
    if width < 0:
        raise ParameterError(f"buffer width must be >= 0, got {width}")
    out = w.copy()
    if width == 0:
        return out
    n = out.size
    flat = np.flatnonzero(np.diff(np.concatenate([[0.0], w, [0.0]])))
    starts, ends = flat[0::2], flat[1::2] - 1  # inclusive segment bounds
    for seg_start, seg_end in zip(starts.tolist(), ends.tolist()):
        for t in range(1, width + 1):
            value = 1.0 - t / (width + 1.0)
            left = seg_start - t
            if left >= 0:
                out[left] = max(out[left], value)
            right = seg_end + t
            if right < n:
                out[right] = max(out[right], value)
    return np.clip(out, 0.0, 1.0)


def _vus(metric, scores, labels, ell: int) -> float:
    if ell < 0:
        raise ParameterError(f"evaluation window must be >= 0, got {ell}")
    # Widths beyond the series length add no coverage (every ramp already
    # spans the whole array), so the average stops extending there.
    ell = min(int(ell), np.asarray(labels).size)
    terms = [metric(scores, smooth_labels(labels, w)) for w in range(ell + 1)]
    return float(np.mean(terms))


def vus_pr(scores, labels, ell: int) -> float:
    """Mean AUC-PR over buffer widths 0..ell of the ramped labels."""
    return _vus(auc_pr, scores, labels, ell)


def vus_roc(scores, labels, ell: int) -> float:
    """Mean AUC-ROC over buffer widths 0..ell of the ramped labels."""
    return _vus(auc_roc, scores, labels, ell)


def average_ranks_desc(values: np.ndarray) -> np.ndarray:
    """Rank values descending (rank 1 = largest); ties share the average rank."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(-values, kind="stable")
    ranks = np.empty(values.size)
    sorted_values = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_values[j + 1] == sorted_values[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


@dataclass
class MethodSummary:
    method: str
    mean_score: float
    mean_rank: float


def rank_table(per_dataset_scores: dict[str, dict[str, float]]) -> list[MethodSummary]:
    """Mean score and mean per-dataset rank for each method (lower rank = better).

    Every method must cover every dataset; a gap raises :class:`MetricError`
    naming the method and dataset.
    """
    methods = list(per_dataset_scores)
    if not methods:
        raise MetricError("rank_table needs at least one method")
    datasets = sorted({ds for scores in per_dataset_scores.values() for ds in scores})
    if not datasets:
        raise MetricError("rank_table needs at least one dataset")
    for method in methods:
        for ds in datasets:
            if ds not in per_dataset_scores[method]:
                raise MetricError(f"method {method!r} has no score for dataset {ds!r}")

    table = np.array(
        [[per_dataset_scores[m][ds] for m in methods] for ds in datasets]
    )
    rank_sum = np.zeros(len(methods))
    for row in table:
        rank_sum += average_ranks_desc(row)
    mean_ranks = rank_sum / len(datasets)
    mean_scores = table.mean(axis=0)
    return [
        MethodSummary(m, float(mean_scores[i]), float(mean_ranks[i]))
        for i, m in enumerate(methods)
    ]


@dataclass
class EvalReport:
    """Metric name -> value plus the window the range-aware metrics used."""

    metrics: dict[str, float] = field(default_factory=dict)
    eval_window: int = 0

    def to_text(self) -> str:
        lines = [f"{name} {format(value, '.17g')}" for name, value in self.metrics.items()]
        lines.append(f"eval_window {self.eval_window}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"metrics": dict(self.metrics), "eval_window": self.eval_window}
