"""Snapshot-level digital twin of a small O-RAN deployment.

RUs sit on a fixed grid, UEs are dropped uniformly, each UE draws a
lognormal PRB demand and attaches to the closest active RU. Loads, a
composite QoS score and a load-proportional power figure follow from the
attachment. Every snapshot uses its own generator derived from
``(seed, snapshot_index)``, so serial and parallel runs agree bit for bit.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .core import DETACHED, NetworkState, RuConfig, Scenario
from .metrics import jain_index


@dataclass(frozen=True)
class TwinParams:
    pathloss_exponent: float = 3.5
    ru_positions: Optional[tuple] = None
    # arithmetic mean of per-UE PRB demand; None -> derived from target_load
    demand_mean: Optional[float] = None
    demand_sigma: float = 2.0
    # mean offered load per active RU when demand_mean is None
    target_load: float = 0.6
    p_base: float = 4.0
    p_slope: float = 2.0
    qos_weights: tuple = (0.5, 0.3, 0.2)
    prb_rate_mbps: float = 0.5
    coverage_radius: float = math.inf

    def __post_init__(self):
        w = tuple(float(x) for x in self.qos_weights)
        if len(w) != 3 or min(w) < 0 or abs(sum(w) - 1.0) > 1e-9:
            raise ValueError("qos_weights must be three non-negative values summing to 1")
        object.__setattr__(self, "qos_weights", w)
        if self.p_base < 0 or self.p_slope < 0:
            raise ValueError("power coefficients must be non-negative")
        if self.demand_sigma < 0 or self.target_load < 0 or (
                self.demand_mean is not None and self.demand_mean < 0):
            raise ValueError("demand parameters must be non-negative")
        if self.pathloss_exponent <= 0 or self.coverage_radius <= 0 or self.prb_rate_mbps <= 0:
            raise ValueError("pathloss exponent, coverage radius and PRB rate must be positive")
        if self.ru_positions is not None:
            pos = tuple((float(x), float(y)) for x, y in self.ru_positions)
            object.__setattr__(self, "ru_positions", pos)

    def mean_demand(self, scenario: Scenario, n_on: Optional[int] = None) -> float:
        """Mean per-UE PRB demand.

        Without an explicit ``demand_mean`` the offered traffic follows the
        number of active RUs (``n_on``, default all): RUs are only put to
        sleep when traffic is low enough for the rest to carry it, so every
        activation level sits near ``target_load`` per active RU.
        """
        if self.demand_mean is not None:
            return float(self.demand_mean)
        k = scenario.n_rus if n_on is None else n_on
        return self.target_load * scenario.prb_per_ru * k / scenario.n_ues

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["qos_weights"] = list(self.qos_weights)
        d["ru_positions"] = None if self.ru_positions is None else [list(p) for p in self.ru_positions]
        d["coverage_radius"] = None if math.isinf(self.coverage_radius) else self.coverage_radius
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TwinParams":
        d = dict(d)
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown twin parameters: {sorted(unknown)}")
        if d.get("coverage_radius", 0) is None:
            d["coverage_radius"] = math.inf
        if d.get("qos_weights") is not None:
            d["qos_weights"] = tuple(d["qos_weights"])
        return cls(**d)


def grid_positions(n_rus: int, area_side: float) -> np.ndarray:
    """Deterministic near-square grid of RU sites; a short last row is centred."""
    cols = math.ceil(math.sqrt(n_rus))
    rows = math.ceil(n_rus / cols)
    dy = area_side / rows
    pos = []
    for r in range(rows):
        in_row = min(cols, n_rus - r * cols)
        dx = area_side / in_row
        for c in range(in_row):
            pos.append(((c + 0.5) * dx, (r + 0.5) * dy))
    return np.array(pos)


def snapshot_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def place(scenario: Scenario, rng: np.random.Generator,
          params: TwinParams = TwinParams()) -> tuple[np.ndarray, np.ndarray]:
    """RU sites and i.i.d. uniform UE drops over the square area."""
    if params.ru_positions is not None:
        ru = np.array(params.ru_positions, dtype=float)
        if ru.shape != (scenario.n_rus, 2):
            raise ValueError("ru_positions must list one (x, y) pair per RU")
    else:
        ru = grid_positions(scenario.n_rus, scenario.area_side)
    ue = rng.uniform(0.0, scenario.area_side, size=(scenario.n_ues, 2))
    return ru, ue


def attach(ue_positions, ru_positions, config: RuConfig,
           coverage_radius: float = math.inf) -> np.ndarray:
    """Serving RU per UE: the closest active RU, lowest index on ties.

    Minimum distance is minimum pathloss under any distance-power law.
    UEs with no active RU within ``coverage_radius`` get ``DETACHED``.
    """
    ue = np.asarray(ue_positions, dtype=float)
    ru = np.asarray(ru_positions, dtype=float)
    d = np.sqrt(((ue[:, None, :] - ru[None, :, :]) ** 2).sum(axis=2))
    d[:, ~config.mask] = np.inf
    best = np.argmin(d, axis=1)
    out = best.astype(np.int64)
    out[d[np.arange(len(ue)), best] > coverage_radius] = DETACHED
    return out


def draw_demands(scenario: Scenario, params: TwinParams, rng: np.random.Generator,
                 n_on: Optional[int] = None) -> np.ndarray:
    """Lognormal per-UE PRB demand with arithmetic mean ``params.mean_demand``."""
    mean = params.mean_demand(scenario, n_on)
    if mean == 0.0:
        return np.zeros(scenario.n_ues)
    sigma = params.demand_sigma
    return rng.lognormal(math.log(mean) - 0.5 * sigma**2, sigma, size=scenario.n_ues)


def load_and_qos(ue_positions, ru_positions, attachment, demands, config: RuConfig,
                 params: TwinParams, scenario: Scenario, snapshot_id: int = 0) -> NetworkState:
    """Resolve loads, PRB grants, throughput, QoS and power for one snapshot."""
    n = config.n_rus
    mask = config.mask
    attachment = np.asarray(attachment, dtype=np.int64)
    demands = np.asarray(demands, dtype=float)
    cap = float(scenario.prb_per_ru)
    f = scenario.dl_fraction

    # attachment validity is checked by NetworkState
    served = attachment != DETACHED
    all_served = served.all()
    att = attachment if all_served else attachment[served]
    offered = np.bincount(att, weights=demands if all_served else demands[served], minlength=n)
    scale = np.minimum(1.0, cap / np.maximum(offered, 1e-300))
    alloc = demands * scale[attachment] if all_served else np.where(served, demands * scale[attachment], 0.0)

    dl_prb = np.minimum(100.0, (100.0 / cap) * offered)
    ul_prb = np.minimum(100.0, (100.0 * (1.0 - f) / f / cap) * offered)
    dl_prb[~mask] = 0.0
    ul_prb[~mask] = 0.0

    tput = alloc * params.prb_rate_mbps
    tput_dl, tput_ul = tput * f, tput * (1.0 - f)

    u = demands.size
    nz = demands > 0
    satisfied = np.where(nz, np.minimum(1.0, alloc / np.where(nz, demands, 1.0)), 1.0)
    t_sat = float(satisfied.sum()) / u if u else 1.0
    overload = np.maximum(0.0, offered[mask] / cap - 1.0)
    l_sat = float(np.maximum(0.0, 1.0 - overload).sum()) / int(mask.sum())
    fairness = jain_index(tput) if u else 1.0
    w_t, w_l, w_f = params.qos_weights
    qos = min(100.0, max(0.0, 100.0 * (w_t * t_sat + w_l * l_sat + w_f * fairness)))

    power = float(np.sum(params.p_base + params.p_slope * dl_prb[mask] / 100.0))

    return NetworkState(
        config=config, dl_prb=dl_prb, ul_prb=ul_prb, ue_attach=attachment,
        ue_dl_demand=demands, ue_alloc=alloc, ue_tput_dl=tput_dl, ue_tput_ul=tput_ul,
        qos=qos, power_w=power, ue_positions=ue_positions, ru_positions=ru_positions,
        prb_per_ru=scenario.prb_per_ru, snapshot_id=snapshot_id,
    )


def simulate(state: NetworkState, config: RuConfig, params: TwinParams,
             scenario: Scenario) -> NetworkState:
    """What-if: the same UEs and demands served under another RU configuration."""
    att = attach(state.ue_positions, state.ru_positions, config, params.coverage_radius)
    return load_and_qos(state.ue_positions, state.ru_positions, att, state.ue_dl_demand,
                        config, params, scenario, snapshot_id=state.snapshot_id)


def random_config(n_rus: int, rng: np.random.Generator) -> RuConfig:
    """Uniform over active counts 1..N, then uniform over masks of that count."""
    k = int(rng.integers(1, n_rus + 1))
    on = rng.choice(n_rus, size=k, replace=False)
    mask = np.zeros(n_rus, dtype=bool)
    mask[on] = True
    return RuConfig(mask)


def generate_snapshot(scenario: Scenario, params: TwinParams, seed: int, index: int) -> NetworkState:
    rng = snapshot_rng(seed, index)
    ru, ue = place(scenario, rng, params)
    config = random_config(scenario.n_rus, rng)
    demands = draw_demands(scenario, params, rng, int(config.mask.sum()))
    att = attach(ue, ru, config, params.coverage_radius)
    return load_and_qos(ue, ru, att, demands, config, params, scenario, snapshot_id=index)


def _generate_chunk(args) -> list[NetworkState]:
    scenario, params, seed, start, stop = args
    return [generate_snapshot(scenario, params, seed, i) for i in range(start, stop)]


def generate_dataset(scenario: Scenario, params: TwinParams, n_snapshots: int,
                     seed: Optional[int] = None, n_jobs: int = 1,
                     chunk_size: int = 2000) -> Iterator[NetworkState]:
    """Yield ``n_snapshots`` snapshots in index order.

    ``seed`` defaults to ``scenario.seed``. With ``n_jobs > 1`` chunks are
    produced in worker processes and merged back in index order.
    """
    if n_snapshots < 1:
        raise ValueError("n_snapshots must be >= 1")
    seed = scenario.seed if seed is None else seed
    chunks = [(scenario, params, seed, s, min(s + chunk_size, n_snapshots))
              for s in range(0, n_snapshots, chunk_size)]
    if n_jobs == 1:
        for c in chunks:
            yield from _generate_chunk(c)
        return
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        for part in pool.map(_generate_chunk, chunks):
            yield from part
