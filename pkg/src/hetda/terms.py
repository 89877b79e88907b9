"""Builders for every matrix term of the adaptation objective: marginal and
per-class distribution-matching matrices, the paired-sample correlation
matrix, the discriminative graph Laplacian and the class scatter blocks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import UNLABELED, DomainData
from .linalg import assemble_block_diag, centering_matrix


@dataclass(frozen=True)
class MmdSet:
    """Marginal matrix plus one conditional matrix per class (all n x n)."""

    m0: np.ndarray
    per_class: list[np.ndarray]
    class_counts: list[tuple[int, int]]  # (n_s^c, n_t^c) per class

    @property
    def combined(self) -> np.ndarray:
        total = self.m0.copy()
        for mc in self.per_class:
            total += mc
        return total


@dataclass(frozen=True)
class StructureSet:
    """Graph structure (adjacency + Laplacian) and stacked scatter blocks."""

    adjacency: np.ndarray  # (n, n)
    laplacian: np.ndarray  # (n, n)
    sw: np.ndarray  # (d_s + d_t)^2
    sb: np.ndarray  # (d_s + d_t)^2


def mmd_marginal(n_s: int, n_t: int) -> np.ndarray:
    """Matrix whose quadratic form with X W gives the squared distance of
    the two projected domain means (source columns first)."""
    if n_s < 1 or n_t < 1:
        raise ValueError("both domains need at least one sample")
    e = np.concatenate([np.full(n_s, 1.0 / n_s), np.full(n_t, -1.0 / n_t)])
    return np.outer(e, e)


def mmd_conditional(source_labels: np.ndarray, target_labels: np.ndarray,
                    cls: int) -> np.ndarray:
    """Class-conditional analogue of mmd_marginal, restricted to members of
    ``cls``.  Zero matrix when either domain lacks the class."""
    ys = np.asarray(source_labels)
    yt = np.asarray(target_labels)
    n = ys.shape[0] + yt.shape[0]
    in_s = ys == cls
    in_t = yt == cls
    ns_c = int(in_s.sum())
    nt_c = int(in_t.sum())
    if ns_c == 0 or nt_c == 0:
        return np.zeros((n, n))
    e = np.zeros(n)
    e[:ys.shape[0]][in_s] = 1.0 / ns_c
    e[ys.shape[0]:][in_t] = -1.0 / nt_c
    return np.outer(e, e)


def mmd_set(source_labels: np.ndarray, target_labels: np.ndarray,
            class_count: int) -> MmdSet:
    """All distribution-matching matrices for the current label assignment."""
    ys = np.asarray(source_labels)
    yt = np.asarray(target_labels)
    m0 = mmd_marginal(ys.shape[0], yt.shape[0])
    per_class = []
    counts = []
    for cls in range(1, class_count + 1):
        per_class.append(mmd_conditional(ys, yt, cls))
        counts.append((int((ys == cls).sum()), int((yt == cls).sum())))
    return MmdSet(m0=m0, per_class=per_class, class_counts=counts)


def correlation_matrix(x_sp: np.ndarray, x_tp: np.ndarray) -> np.ndarray:
    """Block matrix whose quadratic form equals twice the summed centered
    cross-covariance between projected paired samples."""
    x_sp = np.asarray(x_sp, dtype=np.float64)
    x_tp = np.asarray(x_tp, dtype=np.float64)
    if x_sp.shape[1] != x_tp.shape[1]:
        raise ValueError(
            f"paired sample counts differ: {x_sp.shape[1]} vs {x_tp.shape[1]}")
    n_p = x_sp.shape[1]
    if n_p < 1:
        raise ValueError("at least one paired sample required")
    h = centering_matrix(n_p)
    cross = x_sp @ h @ x_tp.T
    d_s, d_t = x_sp.shape[0], x_tp.shape[0]
    c = np.zeros((d_s + d_t, d_s + d_t))
    c[:d_s, d_s:] = cross
    c[d_s:, :d_s] = cross.T
    return c


def _domain_adjacency(x: np.ndarray, y: np.ndarray, k: int) -> np.ndarray:
    """Within-domain discriminative cosine adjacency.

    For each sample, edges go to its k most cosine-similar neighbors among
    same-class samples of the same domain; negative similarities are clipped
    so the resulting Laplacian stays PSD.  Zero-norm samples get no edges.
    """
    n = x.shape[1]
    w = np.zeros((n, n))
    norms = np.linalg.norm(x, axis=0)
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        if idx.size < 2:
            continue
        ok = idx[norms[idx] > 0.0]
        if ok.size < 2:
            continue
        sub = x[:, ok] / norms[ok]
        sim = sub.T @ sub
        np.fill_diagonal(sim, -np.inf)
        kk = min(k, ok.size - 1)
        for a in range(ok.size):
            nbrs = np.argsort(-sim[a], kind="stable")[:kk]
            for b in nbrs:
                w[ok[a], ok[b]] = max(0.0, sim[a, b])
    return np.maximum(w, w.T)


def build_adjacency(x_s: np.ndarray, x_t: np.ndarray, y_s: np.ndarray,
                    y_t: np.ndarray, k: int) -> np.ndarray:
    """Block-diagonal adjacency over the stacked sample set; cross-domain
    entries are zero (the domains live in different feature spaces)."""
    if np.any(np.asarray(y_s) == UNLABELED) or \
            np.any(np.asarray(y_t) == UNLABELED):
        raise ValueError("adjacency requires fully assigned labels")
    if k < 1:
        raise ValueError("k must be >= 1")
    ws = _domain_adjacency(np.asarray(x_s, dtype=np.float64),
                           np.asarray(y_s), k)
    wt = _domain_adjacency(np.asarray(x_t, dtype=np.float64),
                           np.asarray(y_t), k)
    return assemble_block_diag([ws, wt])


def laplacian(adjacency: np.ndarray) -> np.ndarray:
    """Graph Laplacian D - W of a symmetric nonnegative adjacency."""
    w = np.asarray(adjacency, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError("adjacency must be square")
    scale = np.abs(w).max() if w.size else 0.0
    if scale > 0.0 and np.abs(w - w.T).max() > 1e-12 * scale:
        raise ValueError("adjacency must be symmetric")
    lap = np.diag(w.sum(axis=1)) - w
    return lap


def scatter_matrices(data: DomainData) -> tuple[np.ndarray, np.ndarray]:
    """Within-class and between-class scatter of a fully labeled domain.

    Satisfies s_within + s_between = total scatter about the global mean.
    """
    y = data.labels
    if np.any(y == UNLABELED):
        raise ValueError("scatter matrices require fully labeled data")
    x = data.features
    d = data.dim
    mu = x.mean(axis=1, keepdims=True)
    sw = np.zeros((d, d))
    sb = np.zeros((d, d))
    for cls in np.unique(y):
        xc = x[:, y == cls]
        mc = xc.shape[1]
        mu_c = xc.mean(axis=1, keepdims=True)
        centered = xc - mu_c
        sw += centered @ centered.T
        diff = mu_c - mu
        sb += mc * (diff @ diff.T)
    return sw, sb


def assemble_scatter_blocks(source_scatters: tuple[np.ndarray, np.ndarray],
                            target_scatters: tuple[np.ndarray, np.ndarray],
                            ) -> tuple[np.ndarray, np.ndarray]:
    """Stack per-domain scatter pairs into (d_s+d_t)-sized block diagonals.

    Returns (S_w, S_b).
    """
    s_sw, s_sb = source_scatters
    s_tw, s_tb = target_scatters
    sw = assemble_block_diag([s_sw, s_tw])
    sb = assemble_block_diag([s_sb, s_tb])
    return sw, sb


def structure_set(x_s: np.ndarray, x_t: np.ndarray, y_s: np.ndarray,
                  y_t: np.ndarray, k: int) -> StructureSet:
    """Adjacency, Laplacian and stacked scatter blocks in one pass."""
    adj = build_adjacency(x_s, x_t, y_s, y_t, k)
    lap = laplacian(adj)
    src = scatter_matrices(DomainData(features=x_s, labels=y_s))
    tgt = scatter_matrices(DomainData(features=x_t, labels=y_t))
    sw, sb = assemble_scatter_blocks(src, tgt)
    return StructureSet(adjacency=adj, laplacian=lap, sw=sw, sb=sb)
