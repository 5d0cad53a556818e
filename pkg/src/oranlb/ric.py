"""rApp policy selection and the xApp energy-saving configuration search.

The xApp evaluates each candidate RU configuration as a what-if: the
current UEs and demands are re-attached under the candidate mask by the
digital twin, and a classifier predicts the resulting balance category.
Among candidates predicted Well or Moderately Balanced it picks the one
with the largest power saving.
"""
from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Protocol, Sequence, Union

import numpy as np

from .core import N_CLASSES, BalanceCategory, NetworkState, RuConfig, Scenario, n_active
from .features import extract_batch, require_schema
from .labeler import PolicyName, ThresholdPolicy, builtin_policy, classify
from .metrics import metrics
from .twin import TwinParams, simulate

# savings closer than this (watts) count as equal for tie-breaking
SAVINGS_RESOLUTION = 1e-9


class LocationType(str, enum.Enum):
    CRITICAL = "critical"
    STANDARD = "standard"
    ENERGY_PRIORITY = "energy_priority"


class TrafficLevel(str, enum.Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


@dataclass(frozen=True)
class OperationalContext:
    location_type: LocationType
    hour_of_day: int = 12
    traffic_level: TrafficLevel = TrafficLevel.MEDIUM

    def __post_init__(self):
        object.__setattr__(self, "location_type", LocationType(self.location_type))
        object.__setattr__(self, "traffic_level", TrafficLevel(self.traffic_level))
        if not 0 <= int(self.hour_of_day) <= 23:
            raise ValueError("hour_of_day must be in 0..23")


_DEFAULT_POLICY = {
    LocationType.CRITICAL: PolicyName.CONSERVATIVE,
    LocationType.STANDARD: PolicyName.MODERATE,
    LocationType.ENERGY_PRIORITY: PolicyName.AGGRESSIVE,
}


@dataclass(frozen=True)
class PolicyRule:
    policy: PolicyName
    location_type: LocationType | None = None
    hours: tuple[int, int] | None = None  # [start, end), may wrap past midnight
    traffic_level: TrafficLevel | None = None

    def matches(self, ctx: OperationalContext) -> bool:
        if self.location_type is not None and ctx.location_type != self.location_type:
            return False
        if self.traffic_level is not None and ctx.traffic_level != self.traffic_level:
            return False
        if self.hours is not None:
            start, end = self.hours
            h = ctx.hour_of_day
            inside = start <= h < end if start <= end else (h >= start or h < end)
            if not inside:
                return False
        return True


def parse_rules(data) -> tuple[PolicyRule, ...]:
    """Validate a rule table (list of dicts, or ``{"rules": [...]}``)."""
    if isinstance(data, dict):
        data = data.get("rules")
    if not isinstance(data, list):
        raise ValueError("rule table must be a list of rules")
    rules = []
    allowed = {"policy", "location_type", "hours", "traffic_level"}
    for i, r in enumerate(data):
        if not isinstance(r, dict) or "policy" not in r:
            raise ValueError(f"rule {i}: expected an object with a 'policy' key")
        if set(r) - allowed:
            raise ValueError(f"rule {i}: unknown keys {sorted(set(r) - allowed)}")
        try:
            hours = r.get("hours")
            if hours is not None:
                if len(hours) != 2 or not all(isinstance(h, int) and 0 <= h <= 24 for h in hours):
                    raise ValueError("hours must be [start, end] with integers in 0..24")
                hours = (int(hours[0]), int(hours[1]))
            rules.append(PolicyRule(
                policy=PolicyName.parse(r["policy"]),
                location_type=None if r.get("location_type") is None else LocationType(r["location_type"]),
                hours=hours,
                traffic_level=None if r.get("traffic_level") is None else TrafficLevel(r["traffic_level"]),
            ))
        except (ValueError, TypeError) as exc:
            raise ValueError(f"rule {i}: {exc}") from None
    return tuple(rules)


def load_rules(path) -> tuple[PolicyRule, ...]:
    return parse_rules(json.loads(Path(path).read_text()))


def select_policy(ctx: OperationalContext, rules: Sequence[PolicyRule] = ()) -> ThresholdPolicy:
    """First matching override rule wins, else the location-type default."""
    for rule in rules:
        if rule.matches(ctx):
            return builtin_policy(rule.policy)
    return builtin_policy(_DEFAULT_POLICY[ctx.location_type])


class Classifier(Protocol):
    def classify_states(self, states: Sequence[NetworkState]) -> tuple[np.ndarray, np.ndarray]:
        """Category codes and class-probability rows for each state."""


@dataclass(frozen=True)
class ModelClassifier:
    """Feature extraction followed by a trained model."""

    model: object

    def __post_init__(self):
        require_schema(self.model)

    def classify_states(self, states):
        X = extract_batch(states)
        return self.model.predict(X), self.model.predict_proba(X)


@dataclass(frozen=True)
class OracleClassifier:
    """Ground-truth threshold labeller applied to the simulated metrics."""

    policy: ThresholdPolicy

    def classify_states(self, states):
        codes = np.array([int(classify(metrics(s), self.policy)) for s in states], dtype=np.int64)
        return codes, np.eye(N_CLASSES)[codes]


@dataclass(frozen=True)
class CandidateOutcome:
    config: RuConfig
    predicted_category: BalanceCategory
    probabilities: tuple
    energy_savings_w: float
    predicted_state: NetworkState = field(repr=False)

    @property
    def acceptable(self) -> bool:
        return self.predicted_category != BalanceCategory.IMBALANCED


def enumerate_candidates(current: NetworkState | RuConfig, mode: str = "single") -> list[RuConfig]:
    """Candidate masks, ordered by ascending mask value.

    ``single``: switch off exactly one active RU (never the last one).
    ``exhaustive``: every non-empty mask with no more active RUs than now.
    """
    config = current.config if isinstance(current, NetworkState) else current
    n = config.n_rus
    if mode == "single":
        out = []
        if n_active(config) >= 2:
            for i in np.flatnonzero(config.mask):
                m = config.mask.copy()
                m[i] = False
                out.append(RuConfig(m))
    elif mode == "exhaustive":
        k = n_active(config)
        out = [RuConfig(np.array(bits, dtype=bool))
               for bits in itertools.product([False, True], repeat=n)
               if 0 < sum(bits) <= k]
    else:
        raise ValueError(f"unknown candidate mode {mode!r} (expected single|exhaustive)")
    return sorted(out, key=lambda c: c.value)


def _outcomes(current, candidates, twin, scenario, classifier) -> list[CandidateOutcome]:
    states = [current if c == current.config else simulate(current, c, twin, scenario)
              for c in candidates]
    if not states:
        return []
    codes, proba = classifier.classify_states(states)
    return [CandidateOutcome(c, BalanceCategory(int(code)), tuple(float(p) for p in pr),
                             current.power_w - s.power_w, s)
            for c, s, code, pr in zip(candidates, states, codes, proba)]


def evaluate_candidate(current: NetworkState, candidate: RuConfig, twin: TwinParams,
                       classifier: Classifier, scenario: Scenario) -> CandidateOutcome:
    return _outcomes(current, [candidate], twin, scenario, classifier)[0]


def selection_key(outcome: CandidateOutcome):
    """Larger is better: savings, then more active RUs, then lower mask value."""
    return (round(outcome.energy_savings_w / SAVINGS_RESOLUTION),
            n_active(outcome.config), -outcome.config.value)


@dataclass
class Decision:
    config: RuConfig
    policy: ThresholdPolicy
    current: NetworkState
    candidates: list
    chosen: CandidateOutcome | None

    @property
    def energy_savings_w(self) -> float:
        return 0.0 if self.chosen is None else self.chosen.energy_savings_w

    @property
    def changed(self) -> bool:
        return self.chosen is not None

    def records(self) -> list[dict]:
        recs = [{"record": "decision", "policy": self.policy.name.value,
                 "current_mask": self.current.config.bits, "current_power_w": self.current.power_w,
                 "selected_mask": self.config.bits, "energy_savings_w": self.energy_savings_w,
                 "changed": self.changed}]
        for o in self.candidates:
            recs.append({"record": "candidate", "mask": o.config.bits,
                         "predicted_category": o.predicted_category.label,
                         "probabilities": dict(zip((c.label for c in BalanceCategory), o.probabilities)),
                         "energy_savings_w": o.energy_savings_w,
                         "chosen": self.chosen is not None and o.config == self.chosen.config})
        return recs

    def to_text(self) -> str:
        """One JSON object per line: a decision header, then every candidate."""
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records())


ClassifierSource = Union[Classifier, Mapping[PolicyName, Classifier]]


def optimize(current: NetworkState, ctx: OperationalContext | ThresholdPolicy, twin: TwinParams,
             classifier: ClassifierSource, scenario: Scenario, mode: str = "single",
             rules: Sequence[PolicyRule] = (), accept_moderate: bool = True) -> Decision:
    """Pick the most energy-saving acceptable configuration.

    ``ctx`` is either an operational context (the policy is then chosen by
    :func:`select_policy`) or a policy directly. ``classifier`` may map
    policy names to per-policy classifiers. With ``accept_moderate=False``
    only Well Balanced predictions are acceptable.
    """
    policy = ctx if isinstance(ctx, ThresholdPolicy) else select_policy(ctx, rules)
    if isinstance(classifier, Mapping):
        classifier = classifier[policy.name]
    outcomes = _outcomes(current, enumerate_candidates(current, mode), twin, scenario, classifier)
    accepted = [o for o in outcomes
                if o.predicted_category == BalanceCategory.WELL_BALANCED
                or (accept_moderate and o.predicted_category == BalanceCategory.MODERATELY_BALANCED)]
    best = max(accepted, key=selection_key, default=None)
    if best is None or selection_key(best)[0] <= 0:
        return Decision(current.config, policy, current, outcomes, None)
    return Decision(best.config, policy, current, outcomes, best)
