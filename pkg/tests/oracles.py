"""Independent reference implementations used by the tests."""
import numpy as np

from oranlb.core import RuConfig
from oranlb.labeler import classify
from oranlb.metrics import metrics
from oranlb.twin import simulate


def brute_force_optimize(state, policy, twin, scenario, accept_moderate=True):
    """Scan every mask by integer value and keep the best acceptable one.

    Best means: larger savings (compared at 1e-9 W), then more active RUs,
    then the lower mask value. Returns the current mask when nothing
    acceptable saves energy.
    """
    n = state.config.n_rus
    k = int(state.config.mask.sum())
    ok = {2, 1} if accept_moderate else {2}
    best = None
    for v in range(1, 2**n):
        bits = [(v >> i) & 1 == 1 for i in range(n)]
        if sum(bits) > k:
            continue
        cfg = RuConfig(np.array(bits))
        s = simulate(state, cfg, twin, scenario)
        if int(classify(metrics(s), policy)) not in ok:
            continue
        saving = round((state.power_w - s.power_w) * 1e9)
        cand = (saving, sum(bits), -v)
        if best is None or cand > best[0]:
            best = (cand, cfg)
    if best is None or best[0][0] <= 0:
        return state.config
    return best[1]
