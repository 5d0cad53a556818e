import numpy as np
import pytest

from oranlb.core import (CATEGORIES, BalanceCategory, NetworkState, RuConfig, Scenario,
                         n_active)
from conftest import bare_state, twin_state


def test_n_active_examples():
    assert n_active(RuConfig(np.array([1, 1, 1, 1]))) == 4
    assert n_active(RuConfig(np.array([1, 0, 1, 0, 1, 0]))) == 3


def test_all_off_mask_rejected():
    with pytest.raises(ValueError, match="inactive"):
        RuConfig(np.array([0, 0, 0, 0]))


def test_category_codes_are_stable():
    assert [int(c) for c in CATEGORIES] == [0, 1, 2]
    assert BalanceCategory(2).label == "Well Balanced"
    assert BalanceCategory.IMBALANCED < BalanceCategory.MODERATELY_BALANCED < BalanceCategory.WELL_BALANCED


def test_config_bits_and_value():
    c = RuConfig.from_bits("1101")
    assert c.bits == "1101"
    assert c.value == 0b1011
    assert c == RuConfig(np.array([True, True, False, True]))
    assert hash(c) == hash(RuConfig.from_bits("1101"))
    with pytest.raises(ValueError):
        RuConfig.from_bits("10x1")


def test_config_is_read_only():
    c = RuConfig.all_on(4)
    with pytest.raises(ValueError):
        c.mask[0] = False


@pytest.mark.parametrize("kw", [dict(n_rus=1), dict(n_rus=9), dict(n_ues=0),
                                dict(dl_fraction=1.0), dict(prb_per_ru=0), dict(area_side=0)])
def test_scenario_validation(kw):
    with pytest.raises(ValueError):
        Scenario(**kw)


def test_state_rejects_load_on_inactive_ru():
    with pytest.raises(ValueError, match="inactive"):
        bare_state([1, 0], [10, 5])


def test_state_rejects_out_of_range_load():
    with pytest.raises(ValueError):
        bare_state([1, 1], [10, 101])


def _fields(s, **over):
    names = ("config", "dl_prb", "ul_prb", "ue_attach", "ue_dl_demand", "ue_alloc", "ue_tput_dl",
             "ue_tput_ul", "qos", "power_w", "ue_positions", "ru_positions")
    return {**{k: getattr(s, k) for k in names}, **over}


def _two_ue_state():
    s, _ = twin_state([[0, 0], [1000, 0]], [[0, 0], [500, 0], [1000, 0]], [10.0, 10.0], [1, 0, 1])
    return s


def test_state_rejects_attachment_to_inactive_ru():
    s = _two_ue_state()
    with pytest.raises(ValueError, match="inactive"):
        NetworkState(**_fields(s, ue_attach=np.array([0, 1])))


def test_load_must_match_attached_demand():
    s = _two_ue_state()
    NetworkState(**_fields(s))
    with pytest.raises(ValueError, match="demand"):
        NetworkState(**_fields(s, dl_prb=np.array([10.0, 0.0, 0.0])))
    with pytest.raises(ValueError, match="demand"):
        NetworkState(**_fields(s, ue_dl_demand=np.array([10.0, 0.0])))


def test_state_arrays_are_immutable():
    s = bare_state([1, 1], [10, 20])
    with pytest.raises(ValueError):
        s.dl_prb[0] = 3.0
