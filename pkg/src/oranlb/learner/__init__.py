"""Supervised learners, scoring and model persistence."""
import json
from pathlib import Path

from .evaluation import (EvalReport, confusion_matrix, cross_validate, evaluate, f1_macro,
                         stratified_folds, stratified_split)
from .forest import (DegenerateLabelsError, ForestModel, ForestParams, feature_importance,
                     train_forest)
from .logreg import LogRegModel, LogRegParams, train_logreg

__all__ = [
    "EvalReport", "confusion_matrix", "cross_validate", "evaluate", "f1_macro",
    "stratified_folds", "stratified_split", "DegenerateLabelsError", "ForestModel",
    "ForestParams", "feature_importance", "train_forest", "LogRegModel", "LogRegParams",
    "train_logreg", "save_model", "load_model", "model_from_dict",
]


def model_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "forest":
        return ForestModel.from_dict(d)
    if kind == "logreg":
        return LogRegModel.from_dict(d)
    raise ValueError(f"unknown model kind {kind!r}")


def save_model(model, path) -> None:
    Path(path).write_text(json.dumps(model.to_dict()))


def load_model(path):
    return model_from_dict(json.loads(Path(path).read_text()))
