"""Deterministic classifiers for pseudo-labeling and evaluation.

Ties in distance are broken by lowest class id, then lowest training index,
so predictions are reproducible and independent of training-sample order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import UNLABELED

CLASSIFIER_KINDS = ("one_nn", "nearest_centroid")


@dataclass(frozen=True)
class ClassifierModel:
    kind: str
    points: np.ndarray  # (dim, k): training samples or class centroids
    labels: np.ndarray  # (k,): class id per column


def train(kind: str, z: np.ndarray, y: np.ndarray) -> ClassifierModel:
    """Fit a classifier on columns of ``z`` with labels ``y``."""
    if kind not in CLASSIFIER_KINDS:
        raise ValueError(f"unknown classifier kind {kind!r}")
    z = np.asarray(z, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if z.ndim != 2 or z.shape[1] != y.shape[0]:
        raise ValueError("z must be (dim, n) with one label per column")
    if y.shape[0] == 0:
        raise ValueError("empty training set")
    if np.any(y == UNLABELED):
        raise ValueError("training labels must all be assigned")

    if kind == "one_nn":
        # canonical order (class id, then arrival) so argmin tie-breaking
        # follows the documented rule
        order = np.lexsort((np.arange(y.shape[0]), y))
        return ClassifierModel(kind=kind, points=z[:, order].copy(),
                               labels=y[order].copy())

    classes = np.unique(y)
    centroids = np.column_stack([z[:, y == c].mean(axis=1) for c in classes])
    return ClassifierModel(kind=kind, points=centroids, labels=classes)


def predict(model: ClassifierModel, z_query: np.ndarray) -> np.ndarray:
    """Predict a class id for each column of ``z_query``."""
    z_query = np.asarray(z_query, dtype=np.float64)
    if z_query.ndim != 2 or z_query.shape[0] != model.points.shape[0]:
        raise ValueError(
            f"query dimension {z_query.shape} does not match training "
            f"dimension {model.points.shape[0]}")
    # squared Euclidean distances, queries x stored points
    d2 = (np.sum(z_query ** 2, axis=0)[:, None]
          + np.sum(model.points ** 2, axis=0)[None, :]
          - 2.0 * z_query.T @ model.points)
    out = np.empty(z_query.shape[1], dtype=np.int64)
    for q in range(d2.shape[0]):
        row = d2[q]
        best = row.min()
        # exact ties resolved by the canonical (class, index) ordering of
        # the stored points
        idx = int(np.flatnonzero(row == best)[0])
        out[q] = model.labels[idx]
    return out


def accuracy(predicted: np.ndarray, truth: np.ndarray) -> float:
    """Fraction of exact label matches."""
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape:
        raise ValueError("prediction and truth lengths differ")
    if np.any(truth == UNLABELED):
        raise ValueError("truth labels must all be assigned")
    if predicted.size == 0:
        raise ValueError("empty label vectors")
    return float(np.mean(predicted == truth))
