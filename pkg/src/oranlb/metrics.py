"""Downlink load-distribution metrics over the active RUs.

Standard deviation is the population form (divide by ``|A|``), which makes
``jain == 1 / (1 + cv**2)`` an exact identity. A zero-mean (idle) load
vector is treated as perfectly balanced.

Sums use ``math.fsum`` (correctly rounded), so results do not depend on
RU order. Load vectors hold at most eight values, where plain Python
beats numpy call overhead.
"""
from __future__ import annotations

import math

import numpy as np

from .core import BalanceMetrics, NetworkState


class NoActiveRuError(ValueError):
    pass


def _loads(active_loads) -> list[float]:
    if isinstance(active_loads, np.ndarray):
        if active_loads.ndim != 1:
            raise NoActiveRuError("load vector must be one-dimensional")
        active_loads = active_loads.tolist()
    p = [float(x) for x in active_loads]
    if not p:
        raise NoActiveRuError("no active RUs: load vector is empty")
    return p


def _summary(p: list[float]) -> tuple[float, float, float]:
    """(mean, population std, sum of squares)."""
    n = len(p)
    mu = math.fsum(p) / n
    # d * d is correctly rounded; ``d ** 2`` goes through libm pow, which need not be
    var = math.fsum((x - mu) * (x - mu) for x in p) / n
    return mu, math.sqrt(var), math.fsum(x * x for x in p)


def _cv(p, mu, sd) -> float:
    return 0.0 if mu == 0.0 else sd / mu


def _jain(p, sq) -> float:
    if sq == 0.0:
        return 1.0
    s = math.fsum(p)
    return s * s / (len(p) * sq)


def _lif(p, mu) -> float:
    # clamp float noise on all-equal vectors (max/mean can land 1 ulp below 1)
    return 0.0 if mu == 0.0 else max(max(p) / mu - 1.0, 0.0)


def coefficient_of_variation(active_loads) -> float:
    p = _loads(active_loads)
    mu, sd, _ = _summary(p)
    return _cv(p, mu, sd)


def jain_index(active_loads) -> float:
    p = _loads(active_loads)
    return _jain(p, math.fsum(x * x for x in p))


def load_imbalance_factor(active_loads) -> float:
    p = _loads(active_loads)
    return _lif(p, math.fsum(p) / len(p))


def balance_metrics(active_loads) -> BalanceMetrics:
    p = _loads(active_loads)
    mu, sd, sq = _summary(p)
    return BalanceMetrics(cv=_cv(p, mu, sd), jain=_jain(p, sq), lif=_lif(p, mu))


def metrics(state: NetworkState) -> BalanceMetrics:
    """Balance metrics of a network state, computed over active RUs only."""
    return balance_metrics(state.active_dl_prb)
