"""Random forest classifier built from scratch on numpy.

Split search is histogram based: every feature is discretised once into at
most ``max_bins`` ordered bins whose edges are midpoints between observed
values, and a node evaluates the Gini gain of every bin edge of its
candidate features with one ``bincount``. Bootstrap resampling is carried
as integer sample weights.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..core import N_CLASSES
from ..features import SCHEMA_VERSION, as_matrix

FOREST_FORMAT = "oranlb-forest-1"


class DegenerateLabelsError(ValueError):
    pass


def check_labels(y: np.ndarray, n_rows: int) -> np.ndarray:
    y = np.asarray(y, dtype=np.int64)
    if y.ndim != 1 or y.size != n_rows:
        raise ValueError("labels must be a vector with one entry per feature row")
    if y.size and (y.min() < 0 or y.max() >= N_CLASSES):
        raise ValueError(f"labels must be category codes in [0, {N_CLASSES})")
    if np.unique(y).size < 2:
        raise DegenerateLabelsError("degenerate label set: need at least two distinct labels")
    return y


@dataclass(frozen=True)
class Tree:
    """Flat array tree. ``feature == -1`` marks a leaf; ``x <= threshold`` goes left."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # (n_nodes, N_CLASSES) weighted class counts
    depth: int

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        for _ in range(self.depth):
            f = self.feature[node]
            internal = f >= 0
            if not internal.any():
                break
            go_left = X[rows, np.where(internal, f, 0)] <= self.threshold[node]
            node = np.where(internal, np.where(go_left, self.left[node], self.right[node]), node)
        return node

    def predict_counts(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_dict(self) -> dict:
        return {"feature": self.feature.tolist(), "threshold": self.threshold.tolist(),
                "left": self.left.tolist(), "right": self.right.tolist(),
                "value": self.value.tolist(), "depth": self.depth}

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(np.array(d["feature"], dtype=np.int64), np.array(d["threshold"], dtype=float),
                   np.array(d["left"], dtype=np.int64), np.array(d["right"], dtype=np.int64),
                   np.array(d["value"], dtype=float).reshape(-1, N_CLASSES), int(d["depth"]))


def make_bins(X: np.ndarray, max_bins: int = 256) -> tuple[np.ndarray, list[np.ndarray]]:
    """Per-feature split thresholds and the bin code of every value.

    Bin ``b`` of feature ``f`` holds values in ``(thr[b-1], thr[b]]``, so
    ``x <= thr[b]`` iff ``code <= b``.
    """
    n, d = X.shape
    codes = np.empty((n, d), dtype=np.int64)
    thresholds = []
    for f in range(d):
        uniq = np.unique(X[:, f])
        if uniq.size > max_bins:
            q = np.quantile(X[:, f], np.linspace(0, 1, max_bins + 1)[1:-1], method="lower")
            uniq = np.unique(np.append(q, uniq[-1]))
        thr = uniq[:-1] + (uniq[1:] - uniq[:-1]) / 2.0
        # midpoint can round up onto the next value; fall back to the lower one
        thr = np.where(thr >= uniq[1:], uniq[:-1], thr)
        codes[:, f] = np.searchsorted(thr, X[:, f], side="left")
        thresholds.append(thr)
    return codes, thresholds


def _gini(counts: np.ndarray) -> float:
    n = counts.sum()
    return 0.0 if n <= 0 else 1.0 - float(((counts / n) ** 2).sum())


def build_tree(codes: np.ndarray, thresholds: list[np.ndarray], y: np.ndarray,
               weight: np.ndarray, max_depth: int, max_features: int,
               rng: np.random.Generator) -> tuple[Tree, np.ndarray]:
    """Grow one tree; returns it with its per-feature weighted impurity decrease."""
    n_features = codes.shape[1]
    n_thr = np.array([t.size for t in thresholds])
    n_bins = int(n_thr.max()) + 1
    onehot = np.eye(N_CLASSES)[y] * weight[:, None]
    total_w = float(weight.sum())
    importance = np.zeros(n_features)

    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(counts):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(counts)
        return len(value) - 1

    root_idx = np.flatnonzero(weight > 0)
    stack = [(new_node(onehot[root_idx].sum(axis=0)), root_idx, 0)]
    max_seen = 0
    while stack:
        node, idx, depth = stack.pop()
        max_seen = max(max_seen, depth)
        counts = value[node]
        n_node = counts.sum()
        if depth >= max_depth or n_node < 2 or np.count_nonzero(counts) <= 1:
            continue

        order = rng.permutation(n_features)
        split = None
        # draw max_features candidates; keep drawing only while none can split
        for start in range(0, n_features, max_features):
            feats = order[start:start + max_features]
            feats = feats[n_thr[feats] > 0]
            if feats.size == 0:
                continue
            k = feats.size
            sub = codes[idx][:, feats] + (np.arange(k) * n_bins)[None, :]
            hist = np.stack([np.bincount(sub.ravel(), weights=np.repeat(onehot[idx, c], k),
                                         minlength=k * n_bins) for c in range(N_CLASSES)], axis=-1)
            cum = np.cumsum(hist.reshape(k, n_bins, N_CLASSES), axis=1)[:, :-1, :]
            n_left = cum.sum(axis=2)
            n_right = n_node - n_left
            valid = (n_left > 0) & (n_right > 0) & (np.arange(n_bins - 1)[None, :] < n_thr[feats][:, None])
            if not valid.any():
                continue
            with np.errstate(divide="ignore", invalid="ignore"):
                score = (cum ** 2).sum(axis=2) / n_left + ((counts - cum) ** 2).sum(axis=2) / n_right
            score = np.where(valid, score, -np.inf)
            flat = int(np.argmax(score))
            fi, b = divmod(flat, n_bins - 1)
            split = (int(feats[fi]), b, cum[fi, b])
            break
        if split is None:
            continue

        f, b, lcounts = split
        rcounts = counts - lcounts
        gain = n_node * _gini(counts) - lcounts.sum() * _gini(lcounts) - rcounts.sum() * _gini(rcounts)
        importance[f] += max(gain, 0.0) / total_w

        go_left = codes[idx, f] <= b
        li, ri = new_node(lcounts), new_node(rcounts)
        feature[node], threshold[node] = f, float(thresholds[f][b])
        left[node], right[node] = li, ri
        stack.append((ri, idx[~go_left], depth + 1))
        stack.append((li, idx[go_left], depth + 1))

    tree = Tree(np.array(feature, dtype=np.int64), np.array(threshold, dtype=float),
                np.array(left, dtype=np.int64), np.array(right, dtype=np.int64),
                np.array(value, dtype=float).reshape(-1, N_CLASSES), max_seen)
    return tree, importance


def _fit_tree(args):
    codes, thresholds, y, n_rows, max_depth, max_features, seed_seq = args
    rng = np.random.default_rng(seed_seq)
    weight = np.bincount(rng.integers(0, n_rows, n_rows), minlength=n_rows).astype(float)
    return build_tree(codes, thresholds, y, weight, max_depth, max_features, rng)


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int = 10
    max_features: int | None = None  # None -> ceil(sqrt(d))
    max_bins: int = 256

    def to_dict(self) -> dict:
        return {"n_trees": self.n_trees, "max_depth": self.max_depth,
                "max_features": self.max_features, "max_bins": self.max_bins}


@dataclass(frozen=True)
class ForestModel:
    trees: tuple
    params: ForestParams
    n_features: int
    schema_version: str
    feature_names: tuple = ()
    importances: np.ndarray = field(default=None, repr=False)

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def _check(self, X) -> np.ndarray:
        return as_matrix(X, self.schema_version, self.n_features)

    def predict_proba(self, X) -> np.ndarray:
        """Mean over trees of the leaf class frequencies."""
        X = self._check(X)
        acc = np.zeros((X.shape[0], N_CLASSES))
        for t in self.trees:
            c = t.predict_counts(X)
            acc += c / c.sum(axis=1, keepdims=True)
        return acc / len(self.trees)

    def predict(self, X) -> np.ndarray:
        """Majority vote of the trees.

        ``argmax`` returns the first maximum and codes are ordered
        Imbalanced < Moderately < Well, so ties (within a leaf and between
        trees) resolve to the less balanced category.
        """
        X = self._check(X)
        votes = np.zeros((X.shape[0], N_CLASSES), dtype=np.int64)
        rows = np.arange(X.shape[0])
        for t in self.trees:
            votes[rows, np.argmax(t.predict_counts(X), axis=1)] += 1
        return np.argmax(votes, axis=1)

    def to_dict(self) -> dict:
        return {"format": FOREST_FORMAT, "kind": "forest", "schema_version": self.schema_version,
                "params": self.params.to_dict(), "n_features": self.n_features,
                "feature_names": list(self.feature_names),
                "importances": None if self.importances is None else self.importances.tolist(),
                "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, d: dict) -> "ForestModel":
        if d.get("format") != FOREST_FORMAT:
            raise ValueError(f"unsupported forest format {d.get('format')!r}")
        imp = d.get("importances")
        return cls(tuple(Tree.from_dict(t) for t in d["trees"]), ForestParams(**d["params"]),
                   int(d["n_features"]), d["schema_version"], tuple(d.get("feature_names", ())),
                   None if imp is None else np.array(imp, dtype=float))


def train_forest(X, y, params: ForestParams = ForestParams(), seed: int = 0,
                 schema_version: str = SCHEMA_VERSION, feature_names=(), n_jobs: int = 1) -> ForestModel:
    """Bootstrap-aggregated Gini trees; identical output for any ``n_jobs``."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or not np.all(np.isfinite(X)):
        raise ValueError("features must be a finite 2-D matrix")
    y = check_labels(y, X.shape[0])
    n, d = X.shape
    k = params.max_features or math.ceil(math.sqrt(d))
    codes, thresholds = make_bins(X, params.max_bins)
    seeds = np.random.SeedSequence(seed).spawn(params.n_trees)
    jobs = [(codes, thresholds, y, n, params.max_depth, k, s) for s in seeds]
    if n_jobs == 1:
        fitted = [_fit_tree(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            fitted = list(pool.map(_fit_tree, jobs))
    trees = tuple(t for t, _ in fitted)
    per_tree = np.array([imp / imp.sum() if imp.sum() > 0 else imp for _, imp in fitted])
    imp = per_tree.mean(axis=0)
    if imp.sum() > 0:
        imp = imp / imp.sum()
    return ForestModel(trees, params, d, schema_version, tuple(feature_names), imp)


def feature_importance(model: ForestModel, names=None) -> list[tuple[str, float]]:
    """Mean impurity decrease per feature, normalised to 1, sorted descending."""
    names = list(names or model.feature_names or [f"f{i}" for i in range(model.n_features)])
    imp = model.importances if model.importances is not None else np.zeros(model.n_features)
    order = sorted(range(len(names)), key=lambda i: (-imp[i], i))
    return [(names[i], float(imp[i])) for i in order]
