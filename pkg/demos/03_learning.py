"""
Learning the load-balance category
==================================

Train the random forest and the logistic regression on featurised
snapshots, compare them with the rule baselines and list the most useful
features. A smaller forest and dataset keep this under a minute.
"""
from oranlb.baselines import Strategy, fit_baseline, predict_baseline
from oranlb.core import Scenario
from oranlb.features import SCHEMA, extract_batch
from oranlb.labeler import builtin_policy, label_dataset
from oranlb.learner import (ForestParams, evaluate, feature_importance, stratified_split,
                            train_forest, train_logreg)
from oranlb.twin import TwinParams, generate_dataset

states = list(generate_dataset(Scenario(n_rus=6, seed=3), TwinParams(), 10000, seed=3))
X = extract_batch(states)
y = label_dataset(states, builtin_policy("aggressive"))
train, val, test = stratified_split(y, seed=3)
print("split sizes", len(train), len(val), len(test))

forest = train_forest(X[train], y[train], ForestParams(n_trees=30, max_depth=10), seed=3,
                      feature_names=SCHEMA.names)
logreg = train_logreg(X[train], y[train], seed=3)

print("\nheld-out F1-macro")
for name, model in (("forest", forest), ("logreg", logreg)):
    print(f"  {name:>14}  {evaluate(y[test], model.predict(X[test])).f1_macro:.4f}")
for s in Strategy:
    fitted = fit_baseline(s, y[train], X[train])
    score = evaluate(y[test], predict_baseline(fitted, X[test], seed=3)).f1_macro
    print(f"  {s.value:>14}  {score:.4f}")

print("\nconfusion matrix (rows: true Imbalanced, Moderate, Well)")
print(evaluate(y[test], forest.predict(X[test])).confusion)

print("\ntop forest features")
for name, value in feature_importance(forest)[:8]:
    print(f"  {name:<28} {value:.3f}")
