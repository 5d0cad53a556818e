"""Snapshot CSV files and their JSON metadata sidecar.

The CSV is wide: per-RU columns are padded to ``MAX_RUS`` with ``NA``.
Per-UE vectors (attachment, demand, grants, throughput, positions) are
stored as space-separated lists so a row round-trips to the exact
``NetworkState``. Floats are written with ``repr`` (shortest exact form),
which keeps files byte-stable across runs and platforms.
"""
from __future__ import annotations

import csv
import json
from dataclasses import asdict
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import MAX_RUS, NetworkState, RuConfig, Scenario
from .features import SCHEMA, FeatureSchema
from .labeler import PolicyName
from .twin import TwinParams

SNAPSHOT_FORMAT = "oranlb-snapshots-1"
NA = "NA"

RU_FIELDS = ("dl_prb", "ul_prb", "ue_count")
UE_FIELDS = ("ue_attach", "ue_dl_demand", "ue_alloc", "ue_tput_dl", "ue_tput_ul", "ue_x", "ue_y")
BASE_COLUMNS = (
    ["snapshot_id", "scenario_n_rus", "mask"]
    + [f"ru{i}_{f}" for f in RU_FIELDS for i in range(MAX_RUS)]
    + ["n_active", "qos", "power_w", "dl_tput", "ul_tput", "prb_per_ru"]
    + list(UE_FIELDS) + ["ru_x", "ru_y"]
)
LABEL_COLUMNS = tuple(f"label_{p.value}" for p in PolicyName)


class DataError(ValueError):
    """Malformed or incompatible data file."""


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _vec(a) -> str:
    return " ".join(fmt(v) for v in a)


def snapshot_row(s: NetworkState) -> list[str]:
    n = s.config.n_rus
    counts = s.ue_counts
    row = [str(s.snapshot_id), str(n), s.config.bits]
    for vals in (s.dl_prb, s.ul_prb, counts):
        row += [fmt(vals[i]) if i < n else NA for i in range(MAX_RUS)]
    row += [str(int(s.config.mask.sum())), fmt(s.qos), fmt(s.power_w),
            fmt(float(s.ue_tput_dl.sum())), fmt(float(s.ue_tput_ul.sum())), str(s.prb_per_ru)]
    row += [_vec(s.ue_attach), _vec(s.ue_dl_demand), _vec(s.ue_alloc), _vec(s.ue_tput_dl),
            _vec(s.ue_tput_ul), _vec(s.ue_positions[:, 0]), _vec(s.ue_positions[:, 1]),
            _vec(s.ru_positions[:, 0]), _vec(s.ru_positions[:, 1])]
    return row


def _floats(text: str) -> np.ndarray:
    return np.array([float(v) for v in text.split()], dtype=float) if text else np.zeros(0)


def parse_row(rec: dict) -> NetworkState:
    n = int(rec["scenario_n_rus"])
    if not 2 <= n <= MAX_RUS:
        raise ValueError(f"scenario_n_rus {n} out of range")
    config = RuConfig.from_bits(rec["mask"])
    if config.n_rus != n:
        raise ValueError("mask length does not match scenario_n_rus")
    for i in range(n, MAX_RUS):
        if any(rec[f"ru{i}_{f}"] != NA for f in RU_FIELDS):
            raise ValueError(f"RU column ru{i} must hold {NA} for a {n}-RU scenario")
    dl = np.array([float(rec[f"ru{i}_dl_prb"]) for i in range(n)])
    ul = np.array([float(rec[f"ru{i}_ul_prb"]) for i in range(n)])
    attach = np.array([int(v) for v in rec["ue_attach"].split()], dtype=np.int64)
    return NetworkState(
        config=config, dl_prb=dl, ul_prb=ul, ue_attach=attach,
        ue_dl_demand=_floats(rec["ue_dl_demand"]), ue_alloc=_floats(rec["ue_alloc"]),
        ue_tput_dl=_floats(rec["ue_tput_dl"]), ue_tput_ul=_floats(rec["ue_tput_ul"]),
        qos=float(rec["qos"]), power_w=float(rec["power_w"]),
        ue_positions=np.column_stack([_floats(rec["ue_x"]), _floats(rec["ue_y"])]).reshape(-1, 2),
        ru_positions=np.column_stack([_floats(rec["ru_x"]), _floats(rec["ru_y"])]).reshape(-1, 2),
        prb_per_ru=int(rec["prb_per_ru"]), snapshot_id=int(rec["snapshot_id"]),
    )


def write_snapshot_csv(path, snapshots: Iterable[NetworkState],
                       labels: Optional[dict] = None) -> int:
    """Write snapshots (and optional ``{column: codes}`` labels); returns the row count."""
    labels = labels or {}
    for col in labels:
        if col not in LABEL_COLUMNS:
            raise DataError(f"unknown label column {col!r}")
    label_cols = [c for c in LABEL_COLUMNS if c in labels]
    n = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BASE_COLUMNS + label_cols)
        for j, s in enumerate(snapshots):
            w.writerow(snapshot_row(s) + [str(int(labels[c][j])) for c in label_cols])
            n += 1
    return n


def read_snapshot_csv(path) -> tuple[list[NetworkState], dict[str, np.ndarray]]:
    """Snapshots and any label columns found in the file."""
    states, labels = [], {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if header[: len(BASE_COLUMNS)] != BASE_COLUMNS:
            raise DataError(f"{path}: header does not match snapshot schema {SNAPSHOT_FORMAT}")
        extra = header[len(BASE_COLUMNS):]
        bad = [c for c in extra if c not in LABEL_COLUMNS]
        if bad:
            raise DataError(f"{path}: unexpected columns {bad}")
        lab_lists = {c: [] for c in extra}
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            rec = dict(zip(header, row))
            try:
                states.append(parse_row(rec))
                for c in extra:
                    code = int(rec[c])
                    if code not in (0, 1, 2):
                        raise ValueError(f"label {code} not a category code")
                    lab_lists[c].append(code)
            except (ValueError, KeyError) as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
    labels = {c: np.array(v, dtype=np.int64) for c, v in lab_lists.items()}
    return states, labels


def meta_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.name + ".meta.json")


def write_dataset_meta(path, scenario: Scenario, twin: TwinParams, seed: int,
                       n_snapshots: int, extra: Optional[dict] = None) -> None:
    meta = {
        "format": SNAPSHOT_FORMAT,
        "feature_schema_version": SCHEMA.version,
        "scenario": asdict(scenario),
        "twin": twin.to_dict(),
        "seed": seed,
        "n_snapshots": n_snapshots,
    }
    meta.update(extra or {})
    Path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def read_dataset_meta(path) -> dict:
    try:
        meta = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise DataError(f"{path}: metadata sidecar not found") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from None
    if meta.get("format") != SNAPSHOT_FORMAT:
        raise DataError(f"{path}: unsupported format {meta.get('format')!r}")
    return meta


def scenario_from_meta(meta: dict) -> Scenario:
    return Scenario(**meta["scenario"])


def twin_from_meta(meta: dict) -> TwinParams:
    return TwinParams.from_dict(meta["twin"])


def write_feature_csv(path, X: np.ndarray, ids: Sequence[int], labels: Optional[dict] = None,
                      schema: FeatureSchema = SCHEMA) -> None:
    labels = labels or {}
    cols = [c for c in LABEL_COLUMNS if c in labels]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["snapshot_id"] + schema.names + cols)
        for j, (sid, row) in enumerate(zip(ids, X)):
            w.writerow([str(int(sid))] + [fmt(v) for v in row] + [str(int(labels[c][j])) for c in cols])


def read_feature_csv(path, schema: FeatureSchema = SCHEMA):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[1: 1 + len(schema)] != schema.names:
            raise DataError(f"{path}: header does not match feature schema {schema.version}")
        cols = header[1 + len(schema):]
        ids, rows, labs = [], [], {c: [] for c in cols}
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                ids.append(int(row[0]))
                rows.append([float(v) for v in row[1: 1 + len(schema)]])
                for c, v in zip(cols, row[1 + len(schema):]):
                    labs[c].append(int(v))
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
    X = np.array(rows, dtype=float).reshape(len(rows), len(schema))
    return np.array(ids, dtype=np.int64), X, {c: np.array(v, dtype=np.int64) for c, v in labs.items()}


def state_to_dict(s: NetworkState, scenario: Optional[Scenario] = None) -> dict:
    """JSON-friendly form of one state, used as the ``optimize`` input file."""
    rec = dict(zip(BASE_COLUMNS, snapshot_row(s)))
    out = {"state": rec}
    if scenario is not None:
        out["scenario"] = asdict(scenario)
    return out


def state_from_dict(d: dict) -> NetworkState:
    try:
        return parse_row(d["state"])
    except (KeyError, ValueError, TypeError) as exc:
        raise DataError(f"invalid state record: {exc}") from None
