"""Applying a trained model to new coupling points.

The decision value of a state psi is <w, Phi(psi)> with
w = sum_c alpha_c Psi_c, which collapses to a kernel sum over the
training states:

    <w, Phi(psi)> = (1/m) sum_j v_j K(psi_j, psi),   v = sum_c alpha_c c.y

Like training, deployment only ever sees inner products, so the final
value goes through the estimation oracle (one call per classified
point); labels use sign with ties resolved to +1.
"""

from __future__ import annotations

import numpy as np

from .dataset import Dataset
from .oracle import InnerProductOracle
from .trainer import Model


def _combined_weights(model: Model, train_ds: Dataset) -> np.ndarray:
    if model.constraints.shape[1] != train_ds.m:
        raise ValueError(
            f"model was trained on m = {model.constraints.shape[1]} samples, "
            f"got a training set with m = {train_ds.m}"
        )
    u = model.constraints.astype(float) * train_ds.labels[None, :]
    return model.alpha @ u


def exact_decision_values(model: Model, train_ds: Dataset, psi_block: np.ndarray) -> np.ndarray:
    """Noise-free <w, Phi(psi)> for each row of psi_block."""
    v = _combined_weights(model, train_ds)
    psi_block = np.atleast_2d(np.asarray(psi_block, dtype=float))
    overlaps = train_ds.psi_matrix @ psi_block.T
    kx = 0.5 * (1.0 + overlaps * overlaps)
    return (v @ kx) / train_ds.m


def decision_value(
    model: Model,
    train_ds: Dataset,
    psi: np.ndarray,
    orc: InnerProductOracle,
    eps: float,
    delta: float,
) -> float:
    """One oracle estimate of the decision value for a single state."""
    exact = exact_decision_values(model, train_ds, psi)[0]
    return orc.estimate(exact, eps, delta)


def predict(
    model: Model,
    train_ds: Dataset,
    psi: np.ndarray,
    orc: InnerProductOracle,
    eps: float,
    delta: float,
) -> int:
    return 1 if decision_value(model, train_ds, psi, orc, eps, delta) >= 0.0 else -1


def predict_many(
    model: Model,
    train_ds: Dataset,
    psi_block: np.ndarray,
    orc: InnerProductOracle,
    eps: float,
    delta: float,
) -> np.ndarray:
    values = orc.estimate_many(exact_decision_values(model, train_ds, psi_block), eps, delta)
    return np.where(values >= 0.0, 1, -1).astype(np.int64)


def evaluate(
    model: Model,
    test_ds: Dataset,
    train_ds: Dataset,
    orc: InnerProductOracle,
    eps: float,
    delta: float,
) -> float:
    """Fraction of test labels reproduced by oracle-estimated decisions."""
    if test_ds.m == 0:
        raise ValueError("cannot evaluate on an empty test set")
    preds = predict_many(model, train_ds, test_ds.psi_matrix, orc, eps, delta)
    return float(np.mean(preds == test_ds.labels))
