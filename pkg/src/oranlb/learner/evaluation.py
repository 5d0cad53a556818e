"""Scoring, stratified splitting and k-fold cross-validation."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..core import N_CLASSES


def confusion_matrix(y_true, y_pred, n_classes: int = N_CLASSES) -> np.ndarray:
    """Rows are true classes, columns predicted classes."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise ValueError("y_true and y_pred must have equal length")
    return np.bincount(y_true * n_classes + y_pred, minlength=n_classes ** 2).reshape(n_classes, n_classes)


def per_class_prf(cm: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Precision, recall and F1 per class; 0 where a ratio is undefined."""
    tp = np.diag(cm).astype(float)
    pred = cm.sum(axis=0).astype(float)
    true = cm.sum(axis=1).astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(pred > 0, tp / pred, 0.0)
        recall = np.where(true > 0, tp / true, 0.0)
        f1 = np.where(pred + true > 0, 2 * tp / (pred + true), 0.0)
    return precision, recall, f1


def f1_macro(y_true, y_pred) -> float:
    """Unweighted mean of per-class F1 over the fixed three categories.

    Convention: a class with neither support nor predictions is skipped;
    a class that has either but no true positives scores 0.
    """
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise ValueError("y_true and y_pred must have equal length")
    if y_true.size == 0:
        raise ValueError("need at least one prediction")
    cm = confusion_matrix(y_true, y_pred)
    _, _, f1 = per_class_prf(cm)
    seen = (cm.sum(axis=0) + cm.sum(axis=1)) > 0
    return float(f1[seen].mean())


@dataclass
class EvalReport:
    accuracy: float
    precision: list
    recall: list
    f1: list
    f1_macro: float
    confusion: list
    support: list
    cv_mean: Optional[float] = None
    cv_std: Optional[float] = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def evaluate(y_true, y_pred) -> EvalReport:
    cm = confusion_matrix(y_true, y_pred)
    p, r, f = per_class_prf(cm)
    return EvalReport(
        accuracy=float(np.trace(cm) / cm.sum()), precision=p.tolist(), recall=r.tolist(),
        f1=f.tolist(), f1_macro=f1_macro(y_true, y_pred), confusion=cm.tolist(),
        support=cm.sum(axis=1).tolist(),
    )


def _class_indices(labels: np.ndarray, rng: np.random.Generator):
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        yield c, idx[rng.permutation(idx.size)]


def stratified_split(labels, fractions=(0.70, 0.15, 0.15), seed: int = 0):
    """Per-class train/validation/test partition.

    Validation and test receive ``max(1, floor(frac * n_c))`` of each class,
    train keeps the remainder. Returned index arrays are sorted.
    """
    labels = np.asarray(labels)
    if len(fractions) != 3 or abs(sum(fractions) - 1.0) > 1e-9 or min(fractions) < 0:
        raise ValueError("fractions must be three non-negative values summing to 1")
    rng = np.random.default_rng(seed)
    parts = ([], [], [])
    for c, idx in _class_indices(labels, rng):
        if idx.size < 3:
            raise ValueError(f"class {c} has {idx.size} samples; need at least 3 to split")
        n_val = max(1, int(np.floor(fractions[1] * idx.size)))
        n_test = max(1, int(np.floor(fractions[2] * idx.size)))
        parts[1].append(idx[:n_val])
        parts[2].append(idx[n_val:n_val + n_test])
        parts[0].append(idx[n_val + n_test:])
    return tuple(np.sort(np.concatenate(p)) for p in parts)


def stratified_folds(labels, k: int = 5, seed: int = 0) -> list[np.ndarray]:
    """k disjoint folds; each class is dealt round-robin after a shuffle."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    folds = [[] for _ in range(k)]
    offset = 0
    for c, idx in _class_indices(labels, rng):
        if idx.size < k:
            raise ValueError(f"class {c} has {idx.size} samples; need at least k={k}")
        for j in range(k):
            folds[(j + offset) % k].append(idx[j::k])
        offset += idx.size % k
    return [np.sort(np.concatenate(f)) for f in folds]


def cross_validate(X, y, fit_predict: Callable, k: int = 5, seed: int = 0):
    """Stratified k-fold F1-macro.

    ``fit_predict(X_train, y_train, X_test) -> y_pred`` retrains per fold.
    Returns ``(mean, population std, fold scores)``.
    """
    X = np.asarray(X)
    y = np.asarray(y)
    folds = stratified_folds(y, k, seed)
    scores = []
    for test in folds:
        train = np.setdiff1d(np.arange(y.size), test, assume_unique=True)
        pred = fit_predict(X[train], y[train], X[test])
        scores.append(f1_macro(y[test], pred))
    scores = np.array(scores)
    return float(scores.mean()), float(scores.std()), scores.tolist()
