"""Load-balance classification and energy-saving RU selection for O-RAN cells."""
from .core import (DETACHED, MAX_RUS, BalanceCategory, BalanceMetrics, NetworkState, RuConfig,
                   Scenario, n_active)
from .features import SCHEMA, FeatureVector, SchemaMismatchError, extract, extract_batch
from .labeler import PolicyName, ThresholdPolicy, builtin_policy, classify, label_dataset, label_state
from .metrics import (NoActiveRuError, balance_metrics, coefficient_of_variation, jain_index,
                      load_imbalance_factor)
from .ric import (Decision, LocationType, ModelClassifier, OperationalContext, OracleClassifier,
                  PolicyRule, TrafficLevel, optimize, select_policy)
from .twin import TwinParams, generate_dataset, generate_snapshot, simulate

__version__ = "0.1.0"
