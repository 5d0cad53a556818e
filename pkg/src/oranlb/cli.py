"""Command-line pipeline: generate, label, featurize, train, evaluate, optimize, report.

Exit codes: 0 success, 1 usage error, 2 data or validation error.
``ORANLB_LOG`` sets log verbosity (DEBUG, INFO, WARNING...).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import dataio
from .core import Scenario
from .dataio import DataError
from .features import SCHEMA, extract_batch, require_schema
from .labeler import PolicyName, builtin_policy, label_dataset
from .learner import (DegenerateLabelsError, ForestParams, LogRegParams, evaluate, load_model,
                      save_model, stratified_split, train_forest, train_logreg)
from .reports import run_evaluation, write_report_tables
from .ric import (LocationType, ModelClassifier, OperationalContext, OracleClassifier, TrafficLevel,
                  load_rules, optimize)
from .twin import TwinParams, generate_dataset

log = logging.getLogger("oranlb")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        cfg = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from None
    allowed = {"scenario", "twin", "policy", "forest", "logreg", "seed", "n_jobs", "cv_folds"}
    unknown = set(cfg) - allowed
    if unknown:
        raise DataError(f"{path}: unknown config keys {sorted(unknown)}")
    return cfg


def _pick(args, cfg, name, default=None):
    """CLI flag beats config file beats default."""
    v = getattr(args, name, None)
    if v is not None:
        return v
    return cfg.get(name, default)


def _require_seed(args, cfg) -> int:
    seed = _pick(args, cfg, "seed")
    if seed is None:
        raise UsageError("a --seed (or config 'seed') is required")
    return int(seed)


def _policy(args, cfg) -> PolicyName:
    name = _pick(args, cfg, "policy")
    if name is None:
        raise UsageError("a --policy is required")
    try:
        return PolicyName.parse(name)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _read(path):
    states, labels = dataio.read_snapshot_csv(path)
    if not states:
        raise DataError(f"{path}: dataset has no snapshots")
    return states, labels


def _labels_for(states, labels, policy: PolicyName) -> np.ndarray:
    col = f"label_{policy.value}"
    if col in labels:
        return labels[col]
    log.info("no %s column; labelling on the fly", col)
    return label_dataset(states, builtin_policy(policy))


def cmd_generate(args, cfg) -> int:
    seed = _require_seed(args, cfg)
    sc = dict(cfg.get("scenario", {}))
    for flag, key in (("scenario", "n_rus"), ("ues", "n_ues"), ("dl_fraction", "dl_fraction"),
                      ("area", "area_side"), ("prb", "prb_per_ru")):
        if getattr(args, flag) is not None:
            sc[key] = getattr(args, flag)
    sc["seed"] = seed
    scenario = Scenario(**sc)
    twin = TwinParams.from_dict(cfg.get("twin", {}))
    n = args.snapshots
    if n < 1:
        raise UsageError("--snapshots must be >= 1")
    jobs = int(_pick(args, cfg, "n_jobs", 1))
    count = dataio.write_snapshot_csv(args.out, generate_dataset(scenario, twin, n, seed, n_jobs=jobs))
    dataio.write_dataset_meta(dataio.meta_path(args.out), scenario, twin, seed, count)
    log.info("wrote %d snapshots to %s", count, args.out)
    return 0


def cmd_label(args, cfg) -> int:
    states, labels = _read(args.data)
    policies = list(PolicyName) if args.policy == "all" else [_policy(args, cfg)]
    for p in policies:
        labels[f"label_{p.value}"] = label_dataset(states, builtin_policy(p))
    dataio.write_snapshot_csv(args.out or args.data, states, labels)
    return 0


def cmd_featurize(args, cfg) -> int:
    states, labels = _read(args.data)
    X = extract_batch(states, n_jobs=int(_pick(args, cfg, "n_jobs", 1)))
    dataio.write_feature_csv(args.out, X, [s.snapshot_id for s in states], labels)
    return 0


def _forest_params(cfg) -> ForestParams:
    return ForestParams(**cfg.get("forest", {}))


def _logreg_params(cfg) -> LogRegParams:
    return LogRegParams(**cfg.get("logreg", {}))


def cmd_train(args, cfg) -> int:
    seed = _require_seed(args, cfg)
    policy = _policy(args, cfg)
    states, labels = _read(args.data)
    y = _labels_for(states, labels, policy)
    X = extract_batch(states, n_jobs=int(_pick(args, cfg, "n_jobs", 1)))
    train, val, test = stratified_split(y, seed=seed)
    if args.model == "forest":
        model = train_forest(X[train], y[train], _forest_params(cfg), seed=seed,
                             schema_version=SCHEMA.version, feature_names=SCHEMA.names,
                             n_jobs=int(_pick(args, cfg, "n_jobs", 1)))
    else:
        model = train_logreg(X[train], y[train], _logreg_params(cfg), seed=seed,
                             schema_version=SCHEMA.version)
    save_model(model, args.model_out)
    report = {"model": args.model, "policy": policy.value, "seed": seed,
              "validation": evaluate(y[val], model.predict(X[val])).to_dict(),
              "test": evaluate(y[test], model.predict(X[test])).to_dict()}
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_evaluate(args, cfg) -> int:
    seed = _require_seed(args, cfg)
    policy = _policy(args, cfg)
    states, labels = _read(args.data)
    y = _labels_for(states, labels, policy)
    models = {}
    for path in args.models or []:
        m = load_model(path)
        require_schema(m)
        models["forest" if m.to_dict()["kind"] == "forest" else "logreg"] = m
    bundle = run_evaluation(states, y, policy.value, seed, _forest_params(cfg), _logreg_params(cfg),
                            models=models, cv_folds=int(_pick(args, cfg, "cv_folds", 5)),
                            n_jobs=int(_pick(args, cfg, "n_jobs", 1)))
    Path(args.out).write_text(bundle.to_json())
    return 0


def _classifiers(specs) -> dict:
    """``PATH`` applies to every policy; ``POLICY=PATH`` to one; ``oracle`` uses the thresholds."""
    out, loaded = {}, {}
    for spec in specs:
        pol, sep, path = spec.partition("=")
        targets = [PolicyName.parse(pol)] if sep else list(PolicyName)
        src = path if sep else spec
        for p in targets:
            if src == "oracle":
                out[p] = OracleClassifier(builtin_policy(p))
            else:
                if src not in loaded:
                    loaded[src] = ModelClassifier(load_model(src))
                out[p] = loaded[src]
    return out


def cmd_optimize(args, cfg) -> int:
    if (args.state is None) == (args.data is None):
        raise UsageError("give exactly one of --state or --data")
    if args.state:
        try:
            doc = json.loads(Path(args.state).read_text())
        except json.JSONDecodeError as exc:
            raise DataError(f"{args.state}: invalid JSON ({exc})") from None
        state = dataio.state_from_dict(doc)
        scenario = Scenario(**doc["scenario"]) if "scenario" in doc else Scenario(
            n_rus=state.config.n_rus, n_ues=state.n_ues, prb_per_ru=state.prb_per_ru)
        twin = TwinParams.from_dict(doc.get("twin", cfg.get("twin", {})))
    else:
        states, _ = _read(args.data)
        meta = dataio.read_dataset_meta(dataio.meta_path(args.data))
        scenario, twin = dataio.scenario_from_meta(meta), dataio.twin_from_meta(meta)
        match = [s for s in states if s.snapshot_id == args.snapshot_id]
        if not match:
            raise DataError(f"snapshot {args.snapshot_id} not in {args.data}")
        state = match[0]
    if args.hour is not None and not 0 <= args.hour <= 23:
        raise UsageError("--hour must be in 0..23")
    ctx = OperationalContext(LocationType(args.location), args.hour, TrafficLevel(args.traffic))
    rules = load_rules(args.rules) if args.rules else ()
    classifiers = _classifiers(args.model)
    decision = optimize(state, ctx, twin, classifiers, scenario, mode=args.mode,
                        rules=rules, accept_moderate=not args.well_only)
    text = decision.to_text()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_report(args, cfg) -> int:
    try:
        bundle = json.loads(Path(args.bundle).read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{args.bundle}: invalid JSON ({exc})") from None
    for p in write_report_tables(bundle, args.out_dir):
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="oranlb", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON run configuration; flags override its keys")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    g = sub.add_parser("generate", help="simulate snapshots into a CSV + metadata sidecar")
    g.add_argument("--scenario", type=int, help="number of RUs (N)")
    g.add_argument("--ues", type=int)
    g.add_argument("--dl-fraction", type=float)
    g.add_argument("--area", type=float)
    g.add_argument("--prb", type=int, help="PRBs per RU")
    g.add_argument("--snapshots", type=int, required=True)
    g.add_argument("--seed", type=int)
    g.add_argument("--n-jobs", type=int)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    lab = sub.add_parser("label", help="append label columns for a policy (or all)")
    lab.add_argument("--data", required=True)
    lab.add_argument("--policy", required=True, help="conservative|moderate|aggressive|all")
    lab.add_argument("--out", help="write here instead of rewriting --data")
    lab.set_defaults(func=cmd_label)

    f = sub.add_parser("featurize", help="write the feature matrix CSV")
    f.add_argument("--data", required=True)
    f.add_argument("--out", required=True)
    f.add_argument("--n-jobs", type=int)
    f.set_defaults(func=cmd_featurize)

    t = sub.add_parser("train", help="train one model on the 70%% split")
    t.add_argument("--data", required=True)
    t.add_argument("--policy")
    t.add_argument("--model", choices=("forest", "logreg"), default="forest")
    t.add_argument("--model-out", required=True)
    t.add_argument("--report", help="EvalReport JSON path (default stdout)")
    t.add_argument("--seed", type=int)
    t.add_argument("--n-jobs", type=int)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("evaluate", help="score models and all baselines into a report bundle")
    e.add_argument("--data", required=True)
    e.add_argument("--policy")
    e.add_argument("--models", nargs="*", help="trained model files (default: train both)")
    e.add_argument("--cv-folds", type=int)
    e.add_argument("--seed", type=int)
    e.add_argument("--n-jobs", type=int)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_evaluate)

    o = sub.add_parser("optimize", help="xApp decision for one network state")
    o.add_argument("--state", help="state JSON file")
    o.add_argument("--data", help="snapshot CSV (with sidecar) to take the state from")
    o.add_argument("--snapshot-id", type=int, default=0)
    o.add_argument("--model", nargs="+", required=True,
                   help="model file, POLICY=FILE pairs, or 'oracle'")
    o.add_argument("--location", choices=[v.value for v in LocationType], default="standard")
    o.add_argument("--hour", type=int, default=12)
    o.add_argument("--traffic", choices=[v.value for v in TrafficLevel], default="medium")
    o.add_argument("--rules", help="JSON policy rule table")
    o.add_argument("--mode", choices=("single", "exhaustive"), default="single")
    o.add_argument("--well-only", action="store_true", help="accept only Well Balanced candidates")
    o.add_argument("--out")
    o.set_defaults(func=cmd_optimize)

    r = sub.add_parser("report", help="write plot-ready CSV tables from a bundle")
    r.add_argument("--bundle", required=True)
    r.add_argument("--out-dir", required=True)
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("ORANLB_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config)
        return args.func(args, cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"oranlb: error: {exc}", file=sys.stderr)
        return 1
    except (DataError, DegenerateLabelsError, ValueError, KeyError, TypeError) as exc:
        print(f"oranlb: data error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"oranlb: data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
