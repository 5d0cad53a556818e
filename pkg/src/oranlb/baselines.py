"""Non-learning comparators, scored through the same pipeline as the models.

Rule baselines read two columns of the feature matrix (``n_active`` and
``dl_prb_mean``), located through the feature schema.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

from .core import N_CLASSES, BalanceCategory
from .features import SCHEMA, FeatureSchema


class Strategy(str, enum.Enum):
    RANDOM_PRIOR = "random"
    ENERGY_FIRST = "energy-first"
    CONSERVATIVE_ALL = "conservative"
    MAJORITY_CLASS = "majority"
    RU_COUNT_RULE = "ru-count"
    LOAD_BASED_RULE = "load-based"

    @classmethod
    def parse(cls, name) -> "Strategy":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise ValueError(f"unknown baseline {name!r} (expected "
                             f"{'|'.join(s.value for s in cls)})") from None


@dataclass(frozen=True)
class FittedBaseline:
    strategy: Strategy
    prior: tuple = ()
    majority: int = int(BalanceCategory.IMBALANCED)
    count_labels: dict = field(default_factory=dict)
    cuts: tuple = ()
    interval_labels: tuple = ()

    def to_dict(self) -> dict:
        return {"strategy": self.strategy.value, "prior": list(self.prior),
                "majority": self.majority,
                "count_labels": {str(k): v for k, v in sorted(self.count_labels.items())},
                "cuts": list(self.cuts), "interval_labels": list(self.interval_labels)}


def _mode(y: np.ndarray) -> int:
    # ties go to the lowest (least balanced) code
    return int(np.argmax(np.bincount(y, minlength=N_CLASSES)))


def _fit_load_rule(load: np.ndarray, y: np.ndarray, grid_size: int):
    grid = np.unique(np.quantile(load, np.linspace(0, 1, grid_size)))
    best = None
    for lo, hi in itertools.combinations_with_replacement(grid, 2):
        interval = np.digitize(load, [lo, hi], right=True)
        labels, errors = [], 0
        for j in range(3):
            yj = y[interval == j]
            lab = _mode(yj) if yj.size else _mode(y)
            labels.append(lab)
            errors += int((yj != lab).sum())
        if best is None or errors < best[0]:
            best = (errors, (float(lo), float(hi)), tuple(labels))
    return best[1], best[2]


def fit_baseline(strategy, labels, features, schema: FeatureSchema = SCHEMA,
                 grid_size: int = 21) -> FittedBaseline:
    strategy = Strategy.parse(strategy)
    y = np.asarray(labels, dtype=np.int64)
    X = np.asarray(features, dtype=float)
    if y.size == 0:
        raise ValueError("baseline fitting needs non-empty training data")
    if X.ndim != 2 or X.shape[0] != y.size:
        raise ValueError("features must have one row per label")
    counts = np.bincount(y, minlength=N_CLASSES)
    majority = _mode(y)
    if strategy is Strategy.RANDOM_PRIOR:
        return FittedBaseline(strategy, prior=tuple((counts / counts.sum()).tolist()), majority=majority)
    if strategy is Strategy.RU_COUNT_RULE:
        n_on = X[:, schema.index("n_active")].astype(int)
        table = {int(k): _mode(y[n_on == k]) for k in np.unique(n_on)}
        return FittedBaseline(strategy, majority=majority, count_labels=table)
    if strategy is Strategy.LOAD_BASED_RULE:
        cuts, labs = _fit_load_rule(X[:, schema.index("dl_prb_mean")], y, grid_size)
        return FittedBaseline(strategy, majority=majority, cuts=cuts, interval_labels=labs)
    return FittedBaseline(strategy, majority=majority)


def predict_baseline(model: FittedBaseline, features, seed: int = 0,
                     schema: FeatureSchema = SCHEMA) -> np.ndarray:
    """Category codes for each feature row.

    ``seed`` feeds the random-prior draw only; the same seed reproduces the
    same predictions.
    """
    X = np.asarray(features, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    n = X.shape[0]
    s = model.strategy
    if s is Strategy.ENERGY_FIRST:
        return np.full(n, int(BalanceCategory.WELL_BALANCED))
    if s is Strategy.CONSERVATIVE_ALL:
        return np.full(n, int(BalanceCategory.IMBALANCED))
    if s is Strategy.MAJORITY_CLASS:
        return np.full(n, model.majority)
    if s is Strategy.RANDOM_PRIOR:
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0x6261]))
        return rng.choice(N_CLASSES, size=n, p=np.array(model.prior))
    if s is Strategy.RU_COUNT_RULE:
        n_on = X[:, schema.index("n_active")].astype(int)
        return np.array([model.count_labels.get(int(k), model.majority) for k in n_on], dtype=np.int64)
    interval = np.digitize(X[:, schema.index("dl_prb_mean")], model.cuts, right=True)
    return np.array(model.interval_labels, dtype=np.int64)[interval]
