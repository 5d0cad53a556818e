"""
Snapshots from the digital twin
===============================

Generate network snapshots for a 6-RU cell, label them, and look at how
QoS, load spread and power differ by category.
"""
import numpy as np

from oranlb.core import Scenario
from oranlb.labeler import builtin_policy, label_dataset
from oranlb.metrics import metrics
from oranlb.reports import table2_from_states
from oranlb.twin import TwinParams, generate_dataset

scenario = Scenario(n_rus=6, n_ues=30, seed=7)
twin = TwinParams()
states = list(generate_dataset(scenario, twin, 5000, seed=7))

s = states[0]
print("first snapshot")
print("  mask        ", s.config.bits)
print("  DL PRB %    ", np.round(s.dl_prb, 1))
print("  UEs per RU  ", s.ue_counts)
print("  QoS         ", round(s.qos, 2))
print("  power W     ", round(s.power_w, 2))
print("  metrics     ", metrics(s))

# every activation level is sampled equally often
counts = np.bincount([int(x.config.mask.sum()) for x in states], minlength=7)[1:]
print("\nsnapshots per active-RU count 1..6:", counts)

labels = label_dataset(states, builtin_policy("moderate"))
table = table2_from_states(states, labels)
print("\nper-category means (Moderate policy)")
print(f"{'category':>20} {'count':>6} {'QoS':>7} {'CV':>6} {'power':>7}")
for r in table["rows"]:
    print(f"{r['category']:>20} {r['count']:>6} {r['qos']:7.2f} {r['cv']:6.3f} {r['power_w']:7.2f}")
imp = table["improvement_pct"]
print(f"{'Well vs Imbalanced':>20} {'':>6} {imp['qos']:+6.1f}% {imp['cv']:+5.1f}% {imp['power_w']:+6.1f}%")
