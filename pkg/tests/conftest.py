import numpy as np
import pytest

from oranlb.core import NetworkState, RuConfig, Scenario
from oranlb.twin import TwinParams, attach, load_and_qos


def bare_state(mask, dl_prb, ul_prb=None, n_ues=0, qos=100.0, power=0.0):
    """A state with given per-RU loads and (by default) no UEs."""
    cfg = RuConfig(np.array(mask, dtype=bool))
    n = cfg.n_rus
    z = np.zeros(n_ues)
    return NetworkState(
        config=cfg, dl_prb=np.array(dl_prb, float),
        ul_prb=np.zeros(n) if ul_prb is None else np.array(ul_prb, float),
        ue_attach=np.full(n_ues, int(np.flatnonzero(cfg.mask)[0])), ue_dl_demand=z, ue_alloc=z,
        ue_tput_dl=z, ue_tput_ul=z, qos=qos, power_w=power,
        ue_positions=np.zeros((n_ues, 2)), ru_positions=np.zeros((n, 2)))


def twin_state(ue_pos, ru_pos, demands, mask, params=None, prb=100):
    """Resolve a hand-built instance through the twin."""
    params = params or TwinParams()
    ru_pos = np.asarray(ru_pos, float)
    ue_pos = np.asarray(ue_pos, float)
    sc = Scenario(n_rus=len(ru_pos), n_ues=len(ue_pos), prb_per_ru=prb)
    cfg = RuConfig(np.array(mask, dtype=bool))
    att = attach(ue_pos, ru_pos, cfg, params.coverage_radius)
    return load_and_qos(ue_pos, ru_pos, att, np.asarray(demands, float), cfg, params, sc), sc


@pytest.fixture
def state_factory():
    return bare_state
