"""Threshold policies and the rule that turns balance metrics into labels."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .core import BalanceCategory, BalanceMetrics, NetworkState
from .metrics import metrics


class PolicyName(str, enum.Enum):
    CONSERVATIVE = "conservative"
    MODERATE = "moderate"
    AGGRESSIVE = "aggressive"

    @classmethod
    def parse(cls, name: "str | PolicyName") -> "PolicyName":
        if isinstance(name, PolicyName):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            valid = "|".join(p.value for p in cls)
            raise ValueError(f"unknown policy {name!r} (expected {valid})") from None


@dataclass(frozen=True)
class ThresholdPolicy:
    """Category boundaries.

    ``alpha``/``beta``/``gamma`` bound CV, Jain and LIF for Well Balanced;
    ``delta`` and ``epsilon`` bound CV and Jain for Moderately Balanced.
    """

    name: PolicyName
    alpha: float
    beta: float
    gamma: float
    delta: float
    epsilon: float

    def __post_init__(self):
        vals = (self.alpha, self.beta, self.gamma, self.delta, self.epsilon)
        if any(v < 0 for v in vals):
            raise ValueError("thresholds must be non-negative")
        if not self.alpha < self.delta:
            raise ValueError("alpha must be below delta")
        if not self.epsilon < self.beta:
            raise ValueError("epsilon must be below beta")


_BUILTIN = {
    PolicyName.CONSERVATIVE: (0.3, 0.8, 1.0, 0.5, 0.7),
    PolicyName.MODERATE: (0.5, 0.7, 1.5, 0.7, 0.6),
    PolicyName.AGGRESSIVE: (0.7, 0.6, 2.0, 0.9, 0.5),
}


def builtin_policy(name: "str | PolicyName") -> ThresholdPolicy:
    name = PolicyName.parse(name)
    return ThresholdPolicy(name, *_BUILTIN[name])


def classify(m: BalanceMetrics, policy: ThresholdPolicy) -> BalanceCategory:
    # The Moderate disjunction is taken literally: no extra CV guard on the
    # Jain branch, and LIF only matters for the Well Balanced test.
    if m.cv <= policy.alpha and m.jain >= policy.beta and m.lif <= policy.gamma:
        return BalanceCategory.WELL_BALANCED
    if policy.alpha < m.cv <= policy.delta or policy.epsilon <= m.jain < policy.beta:
        return BalanceCategory.MODERATELY_BALANCED
    return BalanceCategory.IMBALANCED


def label_state(state: NetworkState, policy: ThresholdPolicy) -> BalanceCategory:
    return classify(metrics(state), policy)


def label_dataset(snapshots: Iterable[NetworkState], policy: ThresholdPolicy) -> np.ndarray:
    """Integer category codes, one per snapshot, in input order."""
    return np.array([int(label_state(s, policy)) for s in snapshots], dtype=np.int64)
