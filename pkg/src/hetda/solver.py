"""Assembly of the overall objective and the iterative subspace refinement.

Each iteration rebuilds the label-dependent terms from the current pseudo
labels, solves the generalized eigenproblem for the stacked projection
W = [A; B], projects both domains and re-predicts the unlabeled target
samples.  Labeled target samples keep their true labels throughout.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import classify
from .data import UNLABELED, HeteroDataset, validate_dataset
from .linalg import EigenPairs, assemble_block_diag, gen_eig_smallest
from .terms import MmdSet, correlation_matrix, mmd_set, structure_set

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class HyperParams:
    """Weights and sizes of the adaptation objective.

    alpha weighs the Laplacian (local structure), beta the paired-sample
    correlation, lam the scatter terms (global structure).  ``m`` is the
    shared subspace dimension, clamped to d_s + d_t at fit time.
    """

    alpha: float = 1.0
    beta: float = 1.0
    lam: float = 1.0
    m: int = 100
    t_iters: int = 5
    k_neighbors: int = 10
    ridge: float = 0.0
    eig_select: str = "smallest_algebraic"

    def validate(self) -> None:
        if min(self.alpha, self.beta, self.lam) < 0.0:
            raise ValueError("alpha, beta and lam must be >= 0")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.t_iters < 1:
            raise ValueError("t_iters must be >= 1")
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")
        if self.ridge < 0.0:
            raise ValueError("ridge must be >= 0")


@dataclass(frozen=True)
class SharedProjection:
    """Stacked transform W = [A; B] with the selected eigenvalues."""

    a: np.ndarray  # (d_s, m)
    b: np.ndarray  # (d_t, m)
    eigenvalues: np.ndarray  # (m,)

    @property
    def stacked(self) -> np.ndarray:
        return np.vstack([self.a, self.b])


@dataclass
class IterationDiagnostics:
    objective: float
    pseudo_label_changes: int
    target_accuracy: float | None = None  # against truth, when available


@dataclass
class SubspaceModel:
    """Fitted result: projection, final pseudo labels and per-iteration log."""

    projection: SharedProjection
    params: HyperParams
    pseudo_labels: np.ndarray  # full target label vector (n_t,)
    diagnostics: list[IterationDiagnostics] = field(default_factory=list)
    preprocessing: str = "none"


def assemble_lhs(x_block: np.ndarray, mmd: MmdSet, lap: np.ndarray,
                 s_w: np.ndarray, alpha: float, lam: float) -> np.ndarray:
    """X (M_0 + sum_c M_c + alpha L) X^T + lam S_w, symmetrized."""
    d = x_block.shape[0]
    n = x_block.shape[1]
    if mmd.m0.shape != (n, n) or lap.shape != (n, n):
        raise ValueError("sample-space matrices must be n x n")
    if s_w.shape != (d, d):
        raise ValueError("S_w must match the stacked feature dimension")
    middle = mmd.combined + alpha * lap
    lhs = x_block @ middle @ x_block.T + lam * s_w
    return 0.5 * (lhs + lhs.T)


def assemble_rhs(c_matrix: np.ndarray, s_b: np.ndarray, beta: float,
                 lam: float) -> np.ndarray:
    """beta C + lam S_b, symmetrized."""
    if c_matrix.shape != s_b.shape:
        raise ValueError("C and S_b must have identical shapes")
    rhs = beta * c_matrix + lam * s_b
    return 0.5 * (rhs + rhs.T)


def solve_projection(lhs: np.ndarray, rhs: np.ndarray, params: HyperParams,
                     d_s: int, d_t: int) -> SharedProjection:
    """Solve for the m smallest eigenpairs and split W row-wise into A, B.

    A zero rhs (beta = lam = 0) degenerates the constraint; the identity is
    substituted so the problem reduces to a plain trace minimization over
    orthonormal directions.
    """
    d = d_s + d_t
    if lhs.shape != (d, d) or rhs.shape != (d, d):
        raise ValueError("lhs/rhs must be (d_s + d_t) square")
    m = params.m
    if m > d:
        log.warning("subspace dimension %d clamped to d_s + d_t = %d", m, d)
        m = d
    if np.abs(rhs).max() == 0.0:
        rhs = np.eye(d)
    pairs: EigenPairs = gen_eig_smallest(lhs, rhs, m, ridge=params.ridge,
                                         select=params.eig_select)
    w = pairs.vectors
    return SharedProjection(a=w[:d_s].copy(), b=w[d_s:].copy(),
                            eigenvalues=pairs.values)


def project(projection: SharedProjection, x_s: np.ndarray,
            x_t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map both domains into the shared subspace: (A^T x_s, B^T x_t)."""
    if x_s.shape[0] != projection.a.shape[0]:
        raise ValueError("source feature dimension does not match A")
    if x_t.shape[0] != projection.b.shape[0]:
        raise ValueError("target feature dimension does not match B")
    return projection.a.T @ x_s, projection.b.T @ x_t


def fit(dataset: HeteroDataset, params: HyperParams,
        classifier_kind: str = "one_nn") -> SubspaceModel:
    """Run the full iterative adaptation on a validated dataset.

    The source must be fully labeled; target labels are taken as ground
    truth where present (the paired samples) and pseudo-labeled elsewhere.
    """
    params.validate()
    validate_dataset(dataset)
    src, tgt = dataset.source, dataset.target
    if np.any(src.labels == UNLABELED):
        raise ValueError("source domain must be fully labeled")
    labeled_t = tgt.labels != UNLABELED
    if not np.any(labeled_t):
        raise ValueError("target domain needs at least one labeled sample")
    present = np.unique(tgt.labels[labeled_t])
    if present.size < dataset.class_count:
        log.warning("only %d of %d classes labeled in the target; missing "
                    "classes can only enter via source-trained iterations",
                    present.size, dataset.class_count)

    x_s, x_t = src.features, tgt.features
    d_s, d_t = src.dim, tgt.dim
    x_block = assemble_block_diag([x_s, x_t])

    # label-independent terms
    s_idx = np.array([p[0] for p in dataset.pairs], dtype=np.intp)
    t_idx = np.array([p[1] for p in dataset.pairs], dtype=np.intp)
    c_matrix = correlation_matrix(x_s[:, s_idx], x_t[:, t_idx])
    truth = dataset.target_truth

    # step 0: pseudo labels from a classifier on the labeled target samples
    init = classify.train(classifier_kind, x_t[:, labeled_t],
                          tgt.labels[labeled_t])
    pseudo = tgt.labels.copy()
    pseudo[~labeled_t] = classify.predict(init, x_t[:, ~labeled_t])

    projection = None
    diagnostics: list[IterationDiagnostics] = []
    for _ in range(params.t_iters):
        mmd = mmd_set(src.labels, pseudo, dataset.class_count)
        structure = structure_set(x_s, x_t, src.labels, pseudo,
                                  params.k_neighbors)
        lhs = assemble_lhs(x_block, mmd, structure.laplacian, structure.sw,
                           params.alpha, params.lam)
        rhs = assemble_rhs(c_matrix, structure.sb, params.beta, params.lam)
        projection = solve_projection(lhs, rhs, params, d_s, d_t)

        z_s, z_t = project(projection, x_s, x_t)
        train_z = np.hstack([z_s, z_t[:, labeled_t]])
        train_y = np.concatenate([src.labels, tgt.labels[labeled_t]])
        model = classify.train(classifier_kind, train_z, train_y)
        new_pseudo = pseudo.copy()
        new_pseudo[~labeled_t] = classify.predict(model, z_t[:, ~labeled_t])

        w = projection.stacked
        objective = float(np.trace(w.T @ lhs @ w) - np.trace(w.T @ rhs @ w))
        changes = int(np.sum(new_pseudo != pseudo))
        acc = None
        if truth is not None and np.any(~labeled_t):
            acc = classify.accuracy(new_pseudo[~labeled_t],
                                    np.asarray(truth)[~labeled_t])
        diagnostics.append(IterationDiagnostics(
            objective=objective, pseudo_label_changes=changes,
            target_accuracy=acc))
        pseudo = new_pseudo

    return SubspaceModel(projection=projection, params=params,
                         pseudo_labels=pseudo, diagnostics=diagnostics)
