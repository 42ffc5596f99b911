"""Confusion-matrix metrics and the stratified cross-validation loop."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dataset import Dataset, split_by_fold, stratified_folds
from .fmdt import Hyperparameters, complexity, predict, train


class UndefinedRateError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """``counts[actual, predicted]``; binary figures are one-vs-rest on ``positive``."""

    counts: np.ndarray
    positive: int = 0

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def tp(self) -> int:
        return int(self.counts[self.positive, self.positive])

    @property
    def fn(self) -> int:
        return int(self.counts[self.positive].sum()) - self.tp

    @property
    def fp(self) -> int:
        return int(self.counts[:, self.positive].sum()) - self.tp

    @property
    def tn(self) -> int:
        return self.total - self.tp - self.fn - self.fp


def confusion(preds, labels, positive: int = 0, n_classes: Optional[int] = None) -> ConfusionMatrix:
    preds = np.asarray(preds, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if preds.shape != labels.shape:
        raise ValueError("predictions and labels differ in length")
    if preds.size == 0:
        raise ValueError("cannot build a confusion matrix from no examples")
    M = n_classes or max(int(preds.max()), int(labels.max()), positive, 1) + 1
    counts = np.zeros((M, M), dtype=np.int64)
    np.add.at(counts, (labels, preds), 1)
    return ConfusionMatrix(counts, positive)


def rates(cm: ConfusionMatrix) -> dict:
    """True/false positive/negative rates.

    The false rates are taken as complements of the true rates, which equals
    FN/(FN+TP) and FP/(FP+TN) and keeps each pair summing to exactly 1.
    """
    tp, fn, fp, tn = cm.tp, cm.fn, cm.fp, cm.tn
    if tp + fn == 0:
        raise UndefinedRateError(f"no examples of the positive class (index {cm.positive})")
    if tn + fp == 0:
        raise UndefinedRateError(f"no examples of the negative class (not index {cm.positive})")
    tp_rate = tp / (tp + fn)
    tn_rate = tn / (tn + fp)
    return {"tp_rate": tp_rate, "tn_rate": tn_rate,
            "fp_rate": 1.0 - tn_rate, "fn_rate": 1.0 - tp_rate}


def accuracy(cm: ConfusionMatrix) -> float:
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    return float(np.trace(cm.counts)) / cm.total


def auc(cm: ConfusionMatrix) -> float:
    """Single operating point AUC, (1 + TPR - FPR) / 2."""
    r = rates(cm)
    return (1.0 + r["tp_rate"] - r["fp_rate"]) / 2.0


def _mean_std(values) -> tuple[float, float]:
    a = np.asarray(values, dtype=np.float64)
    return float(a.mean()), float(a.std(ddof=1)) if a.size > 1 else 0.0


@dataclass
class EvaluationReport:
    folds: int
    accuracy: list[float]
    auc: Optional[list[float]]
    complexity: list[dict]
    timings: list[dict] = field(default_factory=list)

    def summary(self) -> dict:
        out = {"accuracy": _mean_std(self.accuracy)}
        if self.auc is not None:
            out["auc"] = _mean_std(self.auc)
        for key in ("leaf_count", "avg_depth", "avg_fuzzy_sets"):
            out[key] = _mean_std([c[key] for c in self.complexity])
        return out

    def to_dict(self, include_timings: bool = True) -> dict:
        s = self.summary()
        d = {
            "folds": self.folds,
            "per_fold": {"accuracy": self.accuracy, "auc": self.auc,
                         "complexity": self.complexity},
            "mean": {k: v[0] for k, v in s.items()},
            "std": {k: v[1] for k, v in s.items()},
        }
        if include_timings:
            d["timings"] = self.timings
        return d

    def to_json(self, include_timings: bool = True) -> str:
        return json.dumps(self.to_dict(include_timings), indent=1) + "\n"

    def format_table(self) -> str:
        s = self.summary()
        rows = [("Accuracy rate %", f"{100 * s['accuracy'][0]:.2f} ± {100 * s['accuracy'][1]:.2f}")]
        if "auc" in s:
            rows.append(("AUC", f"{s['auc'][0]:.4f} ± {s['auc'][1]:.4f}"))
        rows += [
            ("Number of leaves", f"{s['leaf_count'][0]:.1f} ± {s['leaf_count'][1]:.1f}"),
            ("Avg. depth", f"{s['avg_depth'][0]:.2f} ± {s['avg_depth'][1]:.2f}"),
            ("Avg. number of fuzzy sets", f"{s['avg_fuzzy_sets'][0]:.2f}"),
        ]
        if self.timings:
            for stage in ("partitioning", "learning", "total"):
                rows.append((f"{stage.capitalize()} time (s)",
                             f"{sum(t[stage] for t in self.timings):.2f}"))
        width = max(len(r[0]) for r in rows)
        return "\n".join(f"{name:<{width}}  {val}" for name, val in rows)


def cross_validate(ds: Dataset, hp: Optional[Hyperparameters] = None, k: int = 5, seed: int = 42,
                   positive: int = 0, workers: int = 1, backend: Optional[str] = None,
                   mode: Optional[str] = None) -> EvaluationReport:
    """Stratified k-fold evaluation: train on k-1 folds, test on the held-out one."""
    hp = hp or Hyperparameters()
    fa = stratified_folds(ds, k, seed)
    binary = ds.n_classes == 2
    accs, aucs, comps, times = [], [], [], []
    for fold in range(k):
        train_ds, test_ds = split_by_fold(ds, fa, fold)
        model = train(train_ds, hp, seed, workers=workers, backend=backend)
        t0 = time.perf_counter()
        pred, _ = predict(model, test_ds.X, mode)
        cm = confusion(pred, test_ds.y, positive, ds.n_classes)
        accs.append(accuracy(cm))
        if binary:
            aucs.append(auc(cm))
        comps.append(complexity(model))
        times.append(dict(model.timings, prediction=time.perf_counter() - t0))
    return EvaluationReport(k, accs, aucs if binary else None, comps, times)
