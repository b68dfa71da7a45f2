"""Precision/recall/F1 with defect as the positive class, plus bootstrap CIs.

Degenerate 0/0 ratios are reported as 0.0 with an explicit flag rather than
NaN, and the same convention applies inside bootstrap resamples.

Bootstrap protocol (fixed, so an independent resampler can reproduce it):
``rng = numpy.random.default_rng(seed)``; each of the ``iterations`` rounds
draws ``rng.integers(0, n, size=n)`` as resample indices; bounds are the
2.5th/97.5th percentiles with linear interpolation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyPredictions
from ..model import Label


@dataclass(frozen=True)
class Counts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    f1: float
    precision_degenerate: bool = False
    recall_degenerate: bool = False
    f1_degenerate: bool = False


@dataclass(frozen=True)
class CiBounds:
    p_lo: float
    p_hi: float
    r_lo: float
    r_hi: float
    f1_lo: float
    f1_hi: float


def count_outcomes(pairs: list[tuple[Label, Label]]) -> Counts:
    """Tally (gold, predicted) pairs into a confusion count."""
    tp = fp = fn = tn = 0
    for gold, predicted in pairs:
        if gold is Label.DEFECT:
            if predicted is Label.DEFECT:
                tp += 1
            else:
                fn += 1
        else:
            if predicted is Label.DEFECT:
                fp += 1
            else:
                tn += 1
    return Counts(tp=tp, fp=fp, fn=fn, tn=tn)


def compute_metrics(counts: Counts) -> Metrics:
    """P = tp/(tp+fp), R = tp/(tp+fn), F1 = 2PR/(P+R)."""
    p_den = counts.tp + counts.fp
    r_den = counts.tp + counts.fn
    precision = counts.tp / p_den if p_den else 0.0
    recall = counts.tp / r_den if r_den else 0.0
    f1_den = precision + recall
    f1 = 2 * precision * recall / f1_den if f1_den else 0.0
    return Metrics(
        precision=precision,
        recall=recall,
        f1=f1,
        precision_degenerate=p_den == 0,
        recall_degenerate=r_den == 0,
        f1_degenerate=f1_den == 0,
    )


def f1_from_pr(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall; 0.0 when both are zero."""
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def bootstrap_ci(
    pairs: list[tuple[Label, Label]],
    iterations: int = 10000,
    seed: int = 0,
) -> CiBounds:
    """95% percentile bootstrap over n-with-replacement resamples."""
    n = len(pairs)
    if n == 0:
        raise EmptyPredictions("bootstrap needs at least one prediction")
    gold = np.fromiter((g is Label.DEFECT for g, _ in pairs), dtype=bool, count=n)
    pred = np.fromiter((p is Label.DEFECT for _, p in pairs), dtype=bool, count=n)
    is_tp = gold & pred
    is_fp = ~gold & pred
    is_fn = gold & ~pred

    rng = np.random.default_rng(seed)
    ps = np.empty(iterations)
    rs = np.empty(iterations)
    f1s = np.empty(iterations)
    for i in range(iterations):
        idx = rng.integers(0, n, size=n)
        tp = int(is_tp[idx].sum())
        fp = int(is_fp[idx].sum())
        fn = int(is_fn[idx].sum())
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        ps[i] = p
        rs[i] = r
        f1s[i] = 2 * p * r / (p + r) if p + r else 0.0

    p_lo, p_hi = np.percentile(ps, [2.5, 97.5])
    r_lo, r_hi = np.percentile(rs, [2.5, 97.5])
    f1_lo, f1_hi = np.percentile(f1s, [2.5, 97.5])
    return CiBounds(
        p_lo=float(p_lo),
        p_hi=float(p_hi),
        r_lo=float(r_lo),
        r_hi=float(r_hi),
        f1_lo=float(f1_lo),
        f1_hi=float(f1_hi),
    )
