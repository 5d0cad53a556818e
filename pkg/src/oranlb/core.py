"""Domain types shared across the package.

All types are frozen dataclasses holding read-only numpy arrays, so a
constructed instance can be shared between threads without copying.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

MAX_RUS = 8
DETACHED = -1


class BalanceCategory(enum.IntEnum):
    """Load-balance quality. Integer codes are the serialization format."""

    IMBALANCED = 0
    MODERATELY_BALANCED = 1
    WELL_BALANCED = 2

    @property
    def label(self) -> str:
        return _CATEGORY_LABELS[self]


_CATEGORY_LABELS = {
    BalanceCategory.IMBALANCED: "Imbalanced",
    BalanceCategory.MODERATELY_BALANCED: "Moderately Balanced",
    BalanceCategory.WELL_BALANCED: "Well Balanced",
}

CATEGORIES = tuple(BalanceCategory)
N_CLASSES = len(CATEGORIES)


def _frozen(a, dtype) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Scenario:
    n_rus: int = 4
    n_ues: int = 30
    dl_fraction: float = 0.7
    area_side: float = 1000.0
    prb_per_ru: int = 100
    seed: int = 0

    def __post_init__(self):
        if not 2 <= self.n_rus <= MAX_RUS:
            raise ValueError(f"n_rus must be in [2, {MAX_RUS}], got {self.n_rus}")
        if self.n_ues < 1:
            raise ValueError("n_ues must be >= 1")
        if not 0.0 < self.dl_fraction < 1.0:
            raise ValueError("dl_fraction must lie strictly between 0 and 1")
        if self.prb_per_ru < 1:
            raise ValueError("prb_per_ru must be >= 1")
        if self.area_side <= 0:
            raise ValueError("area_side must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class RuConfig:
    """On/off state of every RU. At least one RU must be active."""

    mask: np.ndarray

    def __post_init__(self):
        mask = _frozen(self.mask, bool)
        if mask.ndim != 1 or mask.size == 0:
            raise ValueError("mask must be a non-empty 1-D vector")
        if not mask.any():
            raise ValueError("invalid RU configuration: all RUs inactive")
        object.__setattr__(self, "mask", mask)

    @classmethod
    def from_bits(cls, bits: str) -> "RuConfig":
        """Parse a bitstring such as ``"1101"`` (character i is RU i)."""
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"malformed mask bitstring {bits!r}")
        return cls(np.array([c == "1" for c in bits]))

    @classmethod
    def all_on(cls, n: int) -> "RuConfig":
        return cls(np.ones(n, dtype=bool))

    @property
    def n_rus(self) -> int:
        return self.mask.size

    @property
    def bits(self) -> str:
        return "".join("1" if s else "0" for s in self.mask)

    @property
    def value(self) -> int:
        """Integer with bit i set when RU i is active."""
        return int(sum(1 << i for i, s in enumerate(self.mask) if s))

    def __eq__(self, other):
        if not isinstance(other, RuConfig):
            return NotImplemented
        return np.array_equal(self.mask, other.mask)

    def __hash__(self):
        return hash(self.bits)

    def __repr__(self):
        return f"RuConfig({self.bits!r})"


def n_active(config: RuConfig) -> int:
    """Number of active RUs."""
    return int(np.count_nonzero(config.mask))


@dataclass(frozen=True, eq=False)
class NetworkState:
    """One aggregated observation window of the RAN.

    ``dl_prb``/``ul_prb`` are per-RU PRB utilisation percentages,
    ``ue_attach`` holds the serving RU index of each UE (``DETACHED`` if
    none), ``ue_alloc`` the PRBs actually granted to each UE. UE and RU
    positions are kept so that what-if configurations can be re-simulated.
    """

    config: RuConfig
    dl_prb: np.ndarray
    ul_prb: np.ndarray
    ue_attach: np.ndarray
    ue_dl_demand: np.ndarray
    ue_alloc: np.ndarray
    ue_tput_dl: np.ndarray
    ue_tput_ul: np.ndarray
    qos: float
    power_w: float
    ue_positions: np.ndarray
    ru_positions: np.ndarray
    prb_per_ru: int = 100
    snapshot_id: int = 0
    scenario_n_rus: int = field(init=False)

    def __post_init__(self):
        n = self.config.n_rus
        for name, dtype in (("dl_prb", float), ("ul_prb", float), ("ue_attach", np.int64),
                            ("ue_dl_demand", float), ("ue_alloc", float),
                            ("ue_tput_dl", float), ("ue_tput_ul", float),
                            ("ue_positions", float), ("ru_positions", float)):
            object.__setattr__(self, name, _frozen(getattr(self, name), dtype))
        object.__setattr__(self, "scenario_n_rus", n)
        object.__setattr__(self, "qos", float(self.qos))
        object.__setattr__(self, "power_w", float(self.power_w))

        if self.dl_prb.shape != (n,) or self.ul_prb.shape != (n,):
            raise ValueError("per-RU load vectors must have length n_rus")
        if self.ru_positions.shape != (n, 2):
            raise ValueError("ru_positions must have shape (n_rus, 2)")
        u = self.ue_attach.size
        for name in ("ue_dl_demand", "ue_alloc", "ue_tput_dl", "ue_tput_ul"):
            if getattr(self, name).shape != (u,):
                raise ValueError(f"{name} must have one entry per UE")
        if self.ue_positions.shape != (u, 2):
            raise ValueError("ue_positions must have shape (n_ues, 2)")
        for loads in (self.dl_prb, self.ul_prb):
            if not (np.isfinite(loads).all() and loads.min() >= 0.0 and loads.max() <= 100.0):
                raise ValueError("PRB utilisation must lie in [0, 100]")
        inactive = ~self.config.mask
        if self.dl_prb[inactive].any() or self.ul_prb[inactive].any():
            raise ValueError("inactive RUs must carry zero load")
        served = self.ue_attach != DETACHED
        attached = self.ue_attach[served]
        if attached.size:
            if attached.min() < 0 or attached.max() >= n:
                raise ValueError("UE attachment index out of range")
            if not self.config.mask[attached].all():
                raise ValueError("UE attached to an inactive RU")
            # with per-UE detail present, an RU is idle exactly when nothing is demanded of it
            offered = np.bincount(attached, weights=self.ue_dl_demand[served], minlength=n)
            if not np.array_equal(self.dl_prb > 0, offered > 0):
                raise ValueError("RU load must be zero exactly when no demand is attached")
        if not 0.0 <= self.qos <= 100.0:
            raise ValueError(f"qos must lie in [0, 100], got {self.qos}")
        if not self.power_w >= 0.0:
            raise ValueError("power must be non-negative")

    @property
    def n_ues(self) -> int:
        return self.ue_attach.size

    @property
    def active_dl_prb(self) -> np.ndarray:
        return self.dl_prb[self.config.mask]

    @property
    def ue_counts(self) -> np.ndarray:
        """Number of UEs served by each RU."""
        attached = self.ue_attach[self.ue_attach != DETACHED]
        return np.bincount(attached, minlength=self.config.n_rus)

    def allclose(self, other: "NetworkState", atol: float = 1e-9) -> bool:
        """Field-wise equality up to ``atol`` on numeric fields."""
        if self.config != other.config or self.prb_per_ru != other.prb_per_ru:
            return False
        if self.snapshot_id != other.snapshot_id:
            return False
        if not np.array_equal(self.ue_attach, other.ue_attach):
            return False
        arrays = ("dl_prb", "ul_prb", "ue_dl_demand", "ue_alloc", "ue_tput_dl",
                  "ue_tput_ul", "ue_positions", "ru_positions")
        for name in arrays:
            a, b = getattr(self, name), getattr(other, name)
            if a.shape != b.shape or not np.allclose(a, b, rtol=0.0, atol=atol):
                return False
        return abs(self.qos - other.qos) <= atol and abs(self.power_w - other.power_w) <= atol


@dataclass(frozen=True)
class BalanceMetrics:
    cv: float
    jain: float
    lif: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.cv, self.jain, self.lif)
