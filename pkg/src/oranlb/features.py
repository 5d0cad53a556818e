"""Engineered per-snapshot features.

Only order-free statistics over RUs are used, so relabelling RU indices
never changes a feature vector. CV, Jain and LIF are deliberately left out:
they define the labels, and the model is expected to recover the ratio
structure from ``dl_prb_std``, ``dl_prb_mean`` and friends.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import DETACHED, NetworkState

SCHEMA_VERSION = "lbfeat-1"

LOAD = "load_distribution"
RESOURCE = "resource_utilization"
CONNECTION = "connection_patterns"
TRAFFIC = "traffic_characteristics"
PERFORMANCE = "performance_indicators"

FEATURES: tuple[tuple[str, str], ...] = (
    ("dl_prb_mean", LOAD),
    ("dl_prb_std", LOAD),
    ("dl_prb_min", LOAD),
    ("dl_prb_max", LOAD),
    ("dl_prb_p25", LOAD),
    ("dl_prb_p50", LOAD),
    ("dl_prb_p75", LOAD),
    ("ul_prb_mean", LOAD),
    ("ul_prb_std", LOAD),
    ("n_active", RESOURCE),
    ("active_ratio", RESOURCE),
    ("total_dl_prb", RESOURCE),
    ("util_per_active_ru", RESOURCE),
    ("active_ru_efficiency_ratio", RESOURCE),
    ("num_ues", CONNECTION),
    ("ues_per_ru_mean", CONNECTION),
    ("ues_per_ru_std", CONNECTION),
    ("ues_per_ru_max", CONNECTION),
    ("detached_ues", CONNECTION),
    ("dl_ul_asymmetry", TRAFFIC),
    ("demand_mean", TRAFFIC),
    ("demand_std", TRAFFIC),
    ("demand_max_to_mean", TRAFFIC),
    ("demand_dispersion", TRAFFIC),
    ("power_w", PERFORMANCE),
    ("power_per_active_ru", PERFORMANCE),
    ("dl_tput_total", PERFORMANCE),
    ("tput_per_active_ru", PERFORMANCE),
    ("tput_per_watt", PERFORMANCE),
    ("qos_score", PERFORMANCE),
)


@dataclass(frozen=True)
class FeatureSchema:
    version: str
    fields: tuple[tuple[str, str], ...]

    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.fields]

    def __len__(self):
        return len(self.fields)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def by_category(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {}
        for n, c in self.fields:
            out.setdefault(c, []).append(n)
        return out


SCHEMA = FeatureSchema(SCHEMA_VERSION, FEATURES)


class SchemaMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    schema_version: str = SCHEMA_VERSION

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or not np.isfinite(v).all():
            raise ValueError("feature vector must be a finite 1-D array")
        if self.schema_version == SCHEMA_VERSION and v.size != len(SCHEMA):
            raise SchemaMismatchError(f"expected {len(SCHEMA)} values, got {v.size}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def as_matrix(X, schema_version: str, n_features: int) -> np.ndarray:
    """2-D float view of a matrix, row or :class:`FeatureVector`, checked against a model.

    A FeatureVector carries its schema version, which must equal the
    model's; bare arrays are only checked for width.
    """
    if isinstance(X, FeatureVector):
        if schema_version and X.schema_version != schema_version:
            raise SchemaMismatchError(
                f"feature schema {X.schema_version!r} does not match model schema {schema_version!r}")
        X = X.values
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != n_features:
        raise SchemaMismatchError(f"feature width {X.shape[-1]} does not match model ({n_features})")
    return X


def require_schema(model, schema: FeatureSchema = SCHEMA) -> None:
    if model.schema_version != schema.version:
        raise SchemaMismatchError(
            f"model schema {model.schema_version!r} does not match {schema.version!r}")
    if model.n_features != len(schema):
        raise SchemaMismatchError(f"model expects {model.n_features} features, schema has {len(schema)}")


def _ratio(a: float, b: float) -> float:
    return a / b if b > 0 else 0.0


def _feature_values(state: NetworkState) -> list[float]:
    mask = state.config.mask
    dl = state.dl_prb[mask]
    ul = state.ul_prb[mask]
    k = dl.size
    cap = float(state.prb_per_ru)

    served = state.ue_attach != DETACHED
    counts = state.ue_counts[mask].astype(float)
    demand = state.ue_dl_demand if state.n_ues else np.zeros(1)
    d_mean = float(demand.mean())
    d_std = float(demand.std())
    dl_tput = float(state.ue_tput_dl.sum())
    ul_tput = float(state.ue_tput_ul.sum())
    p25, p50, p75 = np.percentile(dl, [25, 50, 75])

    return [
        dl.mean(), dl.std(), dl.min(), dl.max(), p25, p50, p75,
        ul.mean(), ul.std(),
        k, k / mask.size, dl.sum(), dl.sum() / (100.0 * k),
        _ratio(float(state.ue_alloc[served].sum()), cap * k),
        int(served.sum()), counts.mean(), counts.std(), counts.max(),
        int((~served).sum()),
        _ratio(float(dl.sum()), float(ul.sum())),
        d_mean, d_std, _ratio(float(demand.max()), d_mean),
        # placeholder for temporal variability: per-UE demand dispersion
        _ratio(d_std, d_mean),
        state.power_w, state.power_w / k, dl_tput, dl_tput / k,
        _ratio(dl_tput + ul_tput, state.power_w), state.qos,
    ]


def extract(state: NetworkState) -> FeatureVector:
    return FeatureVector(np.array(_feature_values(state), dtype=float))


def _extract_rows(states: Sequence[NetworkState]) -> np.ndarray:
    return np.array([_feature_values(s) for s in states], dtype=float).reshape(len(states), len(SCHEMA))


def extract_batch(snapshots: Sequence[NetworkState], n_jobs: int = 1,
                  chunk_size: int = 2000) -> np.ndarray:
    """Feature matrix, one row per snapshot, in input order."""
    snapshots = list(snapshots)
    if n_jobs == 1 or len(snapshots) <= chunk_size:
        return _extract_rows(snapshots)
    chunks = [snapshots[i:i + chunk_size] for i in range(0, len(snapshots), chunk_size)]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return np.vstack(list(pool.map(_extract_rows, chunks)))
