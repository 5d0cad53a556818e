"""Multinomial logistic regression trained by full-batch gradient descent.

Objective (mean form of the usual ``C``-weighted loss)::

    J(W, b) = sum_i s_i * CE_i / n + ||W||^2 / (2 C n)

with balanced class weights ``s_i = n / (K * n_class(y_i))``. Each step
tries a Barzilai-Borwein step length and backtracks until the Armijo
condition holds, so ``J`` never increases between iterations.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import N_CLASSES
from ..features import SCHEMA_VERSION, as_matrix
from .forest import check_labels

LOGREG_FORMAT = "oranlb-logreg-1"


@dataclass(frozen=True)
class LogRegParams:
    C: float = 1.0
    balanced: bool = True
    max_iter: int = 3000
    tol: float = 1e-6

    def to_dict(self) -> dict:
        return {"C": self.C, "balanced": self.balanced, "max_iter": self.max_iter, "tol": self.tol}


@dataclass(frozen=True)
class LogRegModel:
    weights: np.ndarray  # (K, d), on standardised features
    bias: np.ndarray
    mean: np.ndarray
    scale: np.ndarray
    params: LogRegParams
    schema_version: str = ""
    n_iter: int = 0
    grad_norm: float = float("nan")
    loss_history: tuple = field(default=(), repr=False)

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]

    def decision_function(self, X) -> np.ndarray:
        X = as_matrix(X, self.schema_version, self.n_features)
        return ((X - self.mean) / self.scale) @ self.weights.T + self.bias

    def predict_proba(self, X) -> np.ndarray:
        return _softmax(self.decision_function(X))

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.decision_function(X), axis=1)

    def to_dict(self) -> dict:
        return {"format": LOGREG_FORMAT, "kind": "logreg", "schema_version": self.schema_version,
                "params": self.params.to_dict(), "weights": self.weights.tolist(),
                "bias": self.bias.tolist(), "mean": self.mean.tolist(), "scale": self.scale.tolist(),
                "n_iter": self.n_iter, "grad_norm": self.grad_norm}

    @classmethod
    def from_dict(cls, d: dict) -> "LogRegModel":
        if d.get("format") != LOGREG_FORMAT:
            raise ValueError(f"unsupported logreg format {d.get('format')!r}")
        return cls(np.array(d["weights"], dtype=float), np.array(d["bias"], dtype=float),
                   np.array(d["mean"], dtype=float), np.array(d["scale"], dtype=float),
                   LogRegParams(**d["params"]), d["schema_version"], int(d["n_iter"]),
                   float(d["grad_norm"]))


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def fit_scaler(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """z-score statistics; constant columns get unit scale."""
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    return mean, scale


def _objective(theta, Z, Y, s, lam, n, d):
    W = theta[: N_CLASSES * d].reshape(N_CLASSES, d)
    b = theta[N_CLASSES * d:]
    logits = Z @ W.T + b
    logits -= logits.max(axis=1, keepdims=True)
    logp = logits - np.log(np.exp(logits).sum(axis=1, keepdims=True))
    loss = -(s * (Y * logp).sum(axis=1)).sum() / n + 0.5 * lam * (W ** 2).sum()
    R = (np.exp(logp) - Y) * s[:, None] / n
    gW = R.T @ Z + lam * W
    gb = R.sum(axis=0)
    return loss, np.concatenate([gW.ravel(), gb])


def train_logreg(X, y, params: LogRegParams = LogRegParams(), seed: int = 0,
                 schema_version: str = SCHEMA_VERSION) -> LogRegModel:
    """Fit on ``X``; the scaler sees only these rows.

    ``seed`` is accepted for interface symmetry; the solver starts from
    zero weights and is deterministic.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or not np.all(np.isfinite(X)):
        raise ValueError("features must be a finite 2-D matrix")
    y = check_labels(y, X.shape[0])
    n, d = X.shape
    mean, scale = fit_scaler(X)
    Z = (X - mean) / scale
    Y = np.eye(N_CLASSES)[y]
    if params.balanced:
        counts = np.bincount(y, minlength=N_CLASSES).astype(float)
        present = counts > 0
        cw = np.zeros(N_CLASSES)
        cw[present] = n / (present.sum() * counts[present])
        s = cw[y]
    else:
        s = np.ones(n)
    lam = 1.0 / (params.C * n)

    theta = np.zeros(N_CLASSES * d + N_CLASSES)
    loss, g = _objective(theta, Z, Y, s, lam, n, d)
    history = [loss]
    step = 1.0
    it = 0
    for it in range(1, params.max_iter + 1):
        if np.linalg.norm(g) <= params.tol:
            it -= 1
            break
        t = step
        while True:
            cand = theta - t * g
            c_loss, c_g = _objective(cand, Z, Y, s, lam, n, d)
            if c_loss <= loss - 1e-4 * t * float(g @ g) or t < 1e-12:
                break
            t *= 0.5
        if c_loss > loss:
            break
        dtheta, dg = cand - theta, c_g - g
        theta, loss, g = cand, c_loss, c_g
        history.append(loss)
        denom = float(dtheta @ dg)
        step = float(dtheta @ dtheta) / denom if denom > 0 else t
    W = theta[: N_CLASSES * d].reshape(N_CLASSES, d)
    return LogRegModel(W, theta[N_CLASSES * d:].copy(), mean, scale, params, schema_version,
                       it, float(np.linalg.norm(g)), tuple(history))
