"""Evaluation bundle: model and baseline scores plus the per-category tables."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .baselines import Strategy, fit_baseline, predict_baseline
from .core import BalanceCategory, NetworkState
from .dataio import NA, DataError, fmt
from .features import SCHEMA, extract_batch
from .learner import (ForestParams, LogRegParams, cross_validate, evaluate, feature_importance,
                      stratified_split, train_forest, train_logreg)
from .metrics import metrics

# display order of the per-category table: worst to best
TABLE2_ORDER = (BalanceCategory.IMBALANCED, BalanceCategory.MODERATELY_BALANCED,
                BalanceCategory.WELL_BALANCED)


def table2_report(qos, cv, power, labels) -> dict:
    """Mean QoS, load CV and power per category plus the Imbalanced-to-Well change.

    A category with no rows gets ``None`` means. Improvement entries are
    percentages relative to the Imbalanced mean.
    """
    qos, cv, power = (np.asarray(a, dtype=float) for a in (qos, cv, power))
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise DataError("cannot build category table from an empty dataset")
    rows = []
    for cat in TABLE2_ORDER:
        m = labels == int(cat)
        if m.any():
            rows.append({"category": cat.label, "count": int(m.sum()), "qos": float(qos[m].mean()),
                         "cv": float(cv[m].mean()), "power_w": float(power[m].mean())})
        else:
            rows.append({"category": cat.label, "count": 0, "qos": None, "cv": None, "power_w": None})
    worst, best = rows[0], rows[-1]

    def pct(key):
        if worst[key] is None or best[key] is None or worst[key] == 0:
            return None
        return 100.0 * (best[key] / worst[key] - 1.0)

    return {"rows": rows, "improvement_pct": {k: pct(k) for k in ("qos", "cv", "power_w")}}


def table2_from_states(states: Sequence[NetworkState], labels) -> dict:
    return table2_report([s.qos for s in states], [metrics(s).cv for s in states],
                         [s.power_w for s in states], labels)


def improvement_pct(score: float, reference: float) -> Optional[float]:
    """Relative gain in percent; 195 means the score is 2.95x the reference."""
    return None if reference <= 0 else 100.0 * (score / reference - 1.0)


@dataclass
class ReportBundle:
    policy: str
    seed: int
    split_sizes: dict
    models: dict = field(default_factory=dict)
    baselines: dict = field(default_factory=dict)
    feature_importance: list = field(default_factory=list)
    table2: dict = field(default_factory=dict)
    table2_predicted: dict = field(default_factory=dict)
    trained: dict = field(default_factory=dict, repr=False)

    def best_baseline(self) -> tuple[str, float]:
        name = max(sorted(self.baselines), key=lambda k: self.baselines[k]["report"]["f1_macro"])
        return name, self.baselines[name]["report"]["f1_macro"]

    def baseline_comparison(self, model: str = "forest") -> list[dict]:
        ref = self.models[model]["report"]["f1_macro"]
        return [{"strategy": name, "f1_macro": b["report"]["f1_macro"],
                 "model_improvement_pct": improvement_pct(ref, b["report"]["f1_macro"])}
                for name, b in sorted(self.baselines.items())]

    def to_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "trained"}
        if "forest" in self.models and self.baselines:
            name, score = self.best_baseline()
            d["forest_vs_best_baseline"] = {
                "baseline": name, "baseline_f1_macro": score,
                "forest_f1_macro": self.models["forest"]["report"]["f1_macro"],
                "improvement_pct": improvement_pct(self.models["forest"]["report"]["f1_macro"], score),
            }
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def run_evaluation(states: Sequence[NetworkState], labels, policy: str, seed: int,
                   forest_params: ForestParams = ForestParams(),
                   logreg_params: LogRegParams = LogRegParams(),
                   models: Optional[dict] = None, cv_folds: int = 5,
                   n_jobs: int = 1, X: Optional[np.ndarray] = None) -> ReportBundle:
    """Train (or take) models, score them and all six baselines on one test split.

    Everything is fitted on the training split; the test split is scored
    once. ``models`` may supply already trained ``{"forest": ..., "logreg": ...}``.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if X is None:
        X = extract_batch(states, n_jobs=n_jobs)
    train, val, test = stratified_split(labels, seed=seed)
    bundle = ReportBundle(policy, seed, {"train": int(train.size), "validation": int(val.size),
                                         "test": int(test.size)})

    def fit_forest(Xa, ya):
        return train_forest(Xa, ya, forest_params, seed=seed, schema_version=SCHEMA.version,
                            feature_names=SCHEMA.names, n_jobs=n_jobs)

    def fit_logreg(Xa, ya):
        return train_logreg(Xa, ya, logreg_params, seed=seed, schema_version=SCHEMA.version)

    fitters = {"forest": fit_forest, "logreg": fit_logreg}
    trained = dict(models or {})
    for name, fit in fitters.items():
        model = trained.get(name) or fit(X[train], labels[train])
        trained[name] = model
        rep = evaluate(labels[test], model.predict(X[test]))
        if cv_folds and cv_folds > 1:
            mean, std, _ = cross_validate(X[train], labels[train],
                                          lambda a, b, c, fit=fit: fit(a, b).predict(c),
                                          k=cv_folds, seed=seed)
            rep.cv_mean, rep.cv_std = mean, std
        bundle.models[name] = {"report": rep.to_dict()}
    bundle.feature_importance = [[n, v] for n, v in feature_importance(trained["forest"])]

    for strat in Strategy:
        fitted = fit_baseline(strat, labels[train], X[train])
        pred = predict_baseline(fitted, X[test], seed=seed)
        bundle.baselines[strat.value] = {"report": evaluate(labels[test], pred).to_dict(),
                                         "fitted": fitted.to_dict()}

    bundle.table2 = table2_from_states(states, labels)
    test_states = [states[i] for i in test]
    bundle.table2_predicted = table2_from_states(test_states, trained["forest"].predict(X[test]))
    bundle.trained = trained
    return bundle


def _cell(v):
    return NA if v is None else fmt(v) if isinstance(v, float) else str(v)


def _write(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(v) for v in r])


def write_report_tables(bundle: dict, out_dir) -> list[Path]:
    """Plot-ready CSVs from a serialised bundle; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []

    p = out / "model_performance.csv"
    _write(p, ["model", "policy", "accuracy", "f1_macro", "cv_mean", "cv_std"],
           [[m, bundle["policy"], r["report"]["accuracy"], r["report"]["f1_macro"],
             r["report"].get("cv_mean"), r["report"].get("cv_std")]
            for m, r in sorted(bundle["models"].items())])
    paths.append(p)

    p = out / "feature_importance.csv"
    _write(p, ["rank", "feature", "importance"],
           [[i + 1, n, float(v)] for i, (n, v) in enumerate(bundle["feature_importance"])])
    paths.append(p)

    ref = bundle["models"]["forest"]["report"]["f1_macro"]
    p = out / "baseline_comparison.csv"
    _write(p, ["strategy", "f1_macro", "forest_improvement_pct"],
           [["forest", ref, None]] +
           [[n, b["report"]["f1_macro"], improvement_pct(ref, b["report"]["f1_macro"])]
            for n, b in sorted(bundle["baselines"].items())])
    paths.append(p)

    for key, name in (("table2", "category_impact.csv"), ("table2_predicted", "category_impact_predicted.csv")):
        t = bundle[key]
        p = out / name
        imp = t["improvement_pct"]
        _write(p, ["category", "count", "qos", "cv", "power_w"],
               [[r["category"], r["count"], r["qos"], r["cv"], r["power_w"]] for r in t["rows"]] +
               [["improvement_pct", None, imp["qos"], imp["cv"], imp["power_w"]]])
        paths.append(p)
    return paths
