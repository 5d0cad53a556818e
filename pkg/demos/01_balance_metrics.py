"""
Load-balance metrics and threshold policies
===========================================

Three numbers summarise how evenly downlink PRB load is spread over the
active RUs: the coefficient of variation, Jain's fairness index and the
load imbalance factor. A threshold policy turns them into a category.
"""
import numpy as np

from oranlb.core import BalanceMetrics
from oranlb.labeler import PolicyName, builtin_policy, classify
from oranlb.metrics import balance_metrics

spacer = "_" * 60

# three small load vectors, in percent of PRB capacity
for loads in ([50, 50, 50], [20, 40, 60], [90, 5, 5]):
    m = balance_metrics(loads)
    print(f"loads {loads}: cv={m.cv:.6f} jain={m.jain:.6f} lif={m.lif:.6f}")

print(spacer)

# with population sigma, Jain and CV carry the same information
rng = np.random.default_rng(0)
p = rng.uniform(0, 100, 6)
m = balance_metrics(p)
print("jain             ", m.jain)
print("1 / (1 + cv**2)  ", 1 / (1 + m.cv**2))

print(spacer)

# the same state can be Well Balanced under one policy and not another
m = BalanceMetrics(0.408248, 0.857143, 0.5)
for name in PolicyName:
    print(f"{name.value:>12}: {classify(m, builtin_policy(name)).label}")

print(spacer)

# category counts over random metric triples; Aggressive is the loosest
cv = rng.uniform(0, 2, 20000)
jain = 1 / (1 + cv**2)
lif = rng.uniform(0, 3, 20000)
for name in PolicyName:
    pol = builtin_policy(name)
    codes = [int(classify(BalanceMetrics(c, j, l), pol)) for c, j, l in zip(cv, jain, lif)]
    print(f"{name.value:>12}: Imbalanced/Moderate/Well =", np.bincount(codes, minlength=3))
