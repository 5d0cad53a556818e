"""
Choosing RUs to switch off
==========================

Start from a fully active 6-RU cell at light and at heavy traffic, search
the deactivation candidates with the twin, keep those predicted balanced
and pick the one saving the most power. The threshold labeller stands in
for the model first, then a trained forest makes the same call.
"""
import numpy as np

from oranlb.core import RuConfig, Scenario
from oranlb.features import SCHEMA, extract_batch
from oranlb.labeler import builtin_policy, label_dataset
from oranlb.learner import ForestParams, train_forest
from oranlb.ric import ModelClassifier, OperationalContext, OracleClassifier, optimize, select_policy
from oranlb.twin import TwinParams, generate_dataset, generate_snapshot, simulate

scenario = Scenario(n_rus=6, seed=11)
twin = TwinParams()

# same UE drop, two traffic levels, everything switched on
states = {}
for name, load in (("light", 0.15), ("heavy", 0.6)):
    per_ue = load * scenario.prb_per_ru * scenario.n_rus / scenario.n_ues
    snap = generate_snapshot(scenario, TwinParams(demand_mean=per_ue), 11, 0)
    states[name] = simulate(snap, RuConfig.all_on(6), twin, scenario)

# The balance metrics only look at active RUs, so a lone survivor always
# scores as perfectly balanced. With an exact labeller the exhaustive search
# therefore tends to collapse onto one RU; QoS shows what that costs.

for location in ("critical", "standard", "energy_priority"):
    ctx = OperationalContext(location, hour_of_day=3)
    pol = select_policy(ctx)
    for name, s in states.items():
        d = optimize(s, ctx, twin, OracleClassifier(pol), scenario, mode="exhaustive")
        after = d.chosen.predicted_state if d.changed else s
        print(f"{location:>16} ({pol.name.value}) {name} traffic, mean load "
              f"{np.mean(s.dl_prb):5.1f}%: {s.config.bits} -> {d.config.bits}, "
              f"saves {d.energy_savings_w:5.2f} of {s.power_w:5.2f} W, QoS {s.qos:5.1f} -> {after.qos:5.1f}")

# single-RU mode only ever switches one RU off per decision
print()
for name, s in states.items():
    d = optimize(s, builtin_policy("conservative"), twin, OracleClassifier(builtin_policy("conservative")),
                 scenario, mode="single")
    print(f"single-step, conservative, {name} traffic: {s.config.bits} -> {d.config.bits}")

# a trained forest in place of the labeller
train = list(generate_dataset(scenario, twin, 6000, seed=12))
X = extract_batch(train)
y = label_dataset(train, builtin_policy("aggressive"))
forest = train_forest(X, y, ForestParams(n_trees=20), seed=12, feature_names=SCHEMA.names)

d = optimize(states["light"], OperationalContext("energy_priority"), twin, ModelClassifier(forest),
             scenario, mode="single")
print("\nforest-driven decision report (one JSON record per line)")
print(d.to_text())
