"""Accuracy, paired significance testing, and agreement metrics.

The McNemar implementation works on the discordant counts of two
prediction vectors scored against the same gold labels: b = cases only
the first system got right, c = only the second. Large samples use the
continuity-corrected chi-square statistic; small samples an exact
two-sided binomial. The crossover count is configurable so either branch
can be forced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .dialogues import UsageError

ALPHA = 0.05  # significance threshold used when starring results
SMALL_SAMPLE_THRESHOLD = 25  # discordant-pair count below which the exact test runs


@dataclass(frozen=True)
class ContingencyTable:
    both_correct: int
    only_a_correct: int
    only_b_correct: int
    both_wrong: int

    def __post_init__(self):
        if min(self.both_correct, self.only_a_correct,
               self.only_b_correct, self.both_wrong) < 0:
            raise UsageError("negative cell in contingency table")

    @property
    def n(self) -> int:
        return (self.both_correct + self.only_a_correct
                + self.only_b_correct + self.both_wrong)

    @property
    def discordant(self) -> int:
        return self.only_a_correct + self.only_b_correct


def contingency(a_preds: Sequence, b_preds: Sequence,
                golds: Sequence) -> ContingencyTable:
    if not (len(a_preds) == len(b_preds) == len(golds)):
        raise UsageError(
            f"prediction/gold lengths differ: {len(a_preds)}, "
            f"{len(b_preds)}, {len(golds)}")
    cells = [0, 0, 0, 0]
    for a, b, g in zip(a_preds, b_preds, golds):
        ca, cb = a == g, b == g
        cells[0 if ca and cb else 1 if ca else 2 if cb else 3] += 1
    return ContingencyTable(*cells)


def accuracy(preds: Sequence, golds: Sequence) -> float:
    if len(preds) != len(golds):
        raise UsageError(
            f"prediction/gold lengths differ: {len(preds)} vs {len(golds)}")
    if not golds:
        raise UsageError("empty evaluation data")
    return sum(1 for p, g in zip(preds, golds) if p == g) / len(golds)


@dataclass(frozen=True)
class McNemarResult:
    statistic: float
    p_value: float
    method: str  # chi-square | exact-binomial | degenerate
    table: ContingencyTable

    @property
    def significant(self) -> bool:
        return self.p_value < ALPHA


def _binom_cdf_half(k: int, n: int) -> float:
    # P(X <= k) for X ~ Binomial(n, 1/2), exact integer arithmetic
    total = sum(math.comb(n, i) for i in range(k + 1))
    return total / 2 ** n


def mcnemar(a_preds: Sequence, b_preds: Sequence, golds: Sequence,
            small_sample_threshold: int = SMALL_SAMPLE_THRESHOLD) -> McNemarResult:
    table = contingency(a_preds, b_preds, golds)
    b, c = table.only_a_correct, table.only_b_correct
    n = b + c
    if n == 0:
        return McNemarResult(0.0, 1.0, "degenerate", table)
    stat = (abs(b - c) - 1) ** 2 / n
    if n >= small_sample_threshold:
        p = math.erfc(math.sqrt(stat / 2.0))
        method = "chi-square"
    else:
        p = min(1.0, 2.0 * _binom_cdf_half(min(b, c), n))
        method = "exact-binomial"
    return McNemarResult(stat, p, method, table)


def cohen_kappa(ann1: Sequence, ann2: Sequence) -> float:
    if len(ann1) != len(ann2):
        raise UsageError(
            f"annotation lengths differ: {len(ann1)} vs {len(ann2)}")
    if not ann1:
        raise UsageError("empty annotation data")
    n = len(ann1)
    p_o = sum(1 for a, b in zip(ann1, ann2) if a == b) / n
    labels = set(ann1) | set(ann2)
    counts1 = {lb: 0 for lb in labels}
    counts2 = {lb: 0 for lb in labels}
    for a in ann1:
        counts1[a] += 1
    for b in ann2:
        counts2[b] += 1
    p_e = sum(counts1[lb] * counts2[lb] for lb in labels) / (n * n)
    if p_e == 1.0:
        if p_o == 1.0:
            return 1.0
        raise UsageError("kappa undefined: expected agreement is 1")
    return (p_o - p_e) / (1.0 - p_e)


@dataclass
class PerClass:
    precision: float
    recall: float
    support: int


def per_class_scores(preds: Sequence, golds: Sequence) -> dict[str, PerClass]:
    if len(preds) != len(golds):
        raise UsageError(
            f"prediction/gold lengths differ: {len(preds)} vs {len(golds)}")
    labels = sorted(set(golds) | set(preds))
    out = {}
    for lb in labels:
        tp = sum(1 for p, g in zip(preds, golds) if p == lb and g == lb)
        fp = sum(1 for p, g in zip(preds, golds) if p == lb and g != lb)
        fn = sum(1 for p, g in zip(preds, golds) if p != lb and g == lb)
        out[lb] = PerClass(
            precision=tp / (tp + fp) if tp + fp else 0.0,
            recall=tp / (tp + fn) if tp + fn else 0.0,
            support=tp + fn)
    return out


@dataclass
class EvalReport:
    accuracy: float
    n: int
    per_class: dict[str, PerClass] = field(default_factory=dict)
    significance: Optional[McNemarResult] = None
    kappa: Optional[float] = None

    def to_json(self) -> dict:
        d = {"accuracy": self.accuracy, "n": self.n,
             "per_class": {lb: {"precision": s.precision, "recall": s.recall,
                                "support": s.support}
                           for lb, s in self.per_class.items()}}
        if self.significance is not None:
            d["significance"] = {
                "statistic": self.significance.statistic,
                "p_value": self.significance.p_value,
                "method": self.significance.method,
            }
        if self.kappa is not None:
            d["kappa"] = self.kappa
        return d


def evaluate(preds: Sequence, golds: Sequence) -> EvalReport:
    return EvalReport(accuracy=accuracy(preds, golds), n=len(golds),
                      per_class=per_class_scores(preds, golds))


def majority_baseline(train_labels: Sequence, test_golds: Sequence) -> float:
    """Accuracy of always predicting the most frequent training label."""
    if not train_labels:
        raise UsageError("no training labels")
    counts: dict = {}
    for lb in train_labels:
        counts[lb] = counts.get(lb, 0) + 1
    best = max(counts, key=lambda lb: (counts[lb],))
    return accuracy([best] * len(test_golds), test_golds)
