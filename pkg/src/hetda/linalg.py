"""Dense symmetric linear algebra used by the adaptation pipeline.

The eigensolvers are implemented in-repo (Householder tridiagonalization
followed by implicit-shift QL iteration, plus a Cholesky-based reduction for
the generalized problem) so that results are deterministic for a given input
on a given platform.  The hot loops are compiled with numba.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit


class NumericError(RuntimeError):
    """Raised when a factorization or eigen iteration cannot complete."""


class ReducedRankError(NumericError):
    """Raised when fewer eigenpairs than requested are available.

    ``achievable`` carries the number of usable eigenpairs.
    """

    def __init__(self, message: str, achievable: int):
        super().__init__(message)
        self.achievable = achievable


@dataclass(frozen=True)
class EigenPairs:
    """Eigenvalues in ascending order with unit-norm eigenvector columns."""

    values: np.ndarray  # shape (m,)
    vectors: np.ndarray  # shape (d, m), column j pairs with values[j]


# ---------------------------------------------------------------------------
# compiled kernels
# ---------------------------------------------------------------------------

@njit(cache=True)
def _tred2(v):
    """Householder reduction of a symmetric matrix to tridiagonal form.

    ``v`` is overwritten with the accumulated orthogonal transform.
    Returns the diagonal ``d`` and off-diagonal ``e`` of the tridiagonal.
    """
    n = v.shape[0]
    d = np.empty(n)
    e = np.empty(n)
    for j in range(n):
        d[j] = v[n - 1, j]

    for i in range(n - 1, 0, -1):
        scale = 0.0
        h = 0.0
        for k in range(i):
            scale += abs(d[k])
        if scale == 0.0:
            e[i] = d[i - 1]
            for j in range(i):
                d[j] = v[i - 1, j]
                v[i, j] = 0.0
                v[j, i] = 0.0
        else:
            for k in range(i):
                d[k] /= scale
                h += d[k] * d[k]
            f = d[i - 1]
            g = math.sqrt(h)
            if f > 0.0:
                g = -g
            e[i] = scale * g
            h -= f * g
            d[i - 1] = f - g
            for j in range(i):
                e[j] = 0.0
            for j in range(i):
                f = d[j]
                v[j, i] = f
                g = e[j] + v[j, j] * f
                for k in range(j + 1, i):
                    g += v[k, j] * d[k]
                    e[k] += v[k, j] * f
                e[j] = g
            f = 0.0
            for j in range(i):
                e[j] /= h
                f += e[j] * d[j]
            hh = f / (h + h)
            for j in range(i):
                e[j] -= hh * d[j]
            for j in range(i):
                f = d[j]
                g = e[j]
                for k in range(j, i):
                    v[k, j] -= f * e[k] + g * d[k]
                d[j] = v[i - 1, j]
                v[i, j] = 0.0
        d[i] = h

    for i in range(n - 1):
        v[n - 1, i] = v[i, i]
        v[i, i] = 1.0
        h = d[i + 1]
        if h != 0.0:
            for k in range(i + 1):
                d[k] = v[k, i + 1] / h
            for j in range(i + 1):
                g = 0.0
                for k in range(i + 1):
                    g += v[k, i + 1] * v[k, j]
                for k in range(i + 1):
                    v[k, j] -= g * d[k]
        for k in range(i + 1):
            v[k, i + 1] = 0.0
    for j in range(n):
        d[j] = v[n - 1, j]
        v[n - 1, j] = 0.0
    v[n - 1, n - 1] = 1.0
    e[0] = 0.0
    return d, e


@njit(cache=True)
def _tql2(d, e, v):
    """Implicit-shift QL iteration on a symmetric tridiagonal matrix.

    Eigenvalues accumulate in ``d`` and the rotations are applied to the
    columns of ``v``.  Returns False on non-convergence.
    """
    n = d.shape[0]
    for i in range(1, n):
        e[i - 1] = e[i]
    e[n - 1] = 0.0

    f = 0.0
    tst1 = 0.0
    eps = 2.0 ** -52
    for l in range(n):
        a = abs(d[l]) + abs(e[l])
        if a > tst1:
            tst1 = a
        m = l
        while m < n:
            if abs(e[m]) <= eps * tst1:
                break
            m += 1
        if m > l:
            it = 0
            while True:
                it += 1
                if it > 100:
                    return False
                g = d[l]
                p = (d[l + 1] - g) / (2.0 * e[l])
                r = math.hypot(p, 1.0)
                if p < 0.0:
                    r = -r
                d[l] = e[l] / (p + r)
                d[l + 1] = e[l] * (p + r)
                dl1 = d[l + 1]
                h = g - d[l]
                for i in range(l + 2, n):
                    d[i] -= h
                f += h

                p = d[m]
                c = 1.0
                c2 = c
                c3 = c
                el1 = e[l + 1]
                s = 0.0
                s2 = 0.0
                for i in range(m - 1, l - 1, -1):
                    c3 = c2
                    c2 = c
                    s2 = s
                    g = c * e[i]
                    h = c * p
                    r = math.hypot(p, e[i])
                    e[i + 1] = s * r
                    s = e[i] / r
                    c = p / r
                    p = c * d[i] - s * g
                    d[i + 1] = h + s * (c * g + s * d[i])
                    for k in range(n):
                        h = v[k, i + 1]
                        v[k, i + 1] = s * v[k, i] + c * h
                        v[k, i] = c * v[k, i] - s * h
                p = -s * s2 * c3 * el1 * e[l] / dl1
                e[l] = s * p
                d[l] = c * p
                if abs(e[l]) <= eps * tst1:
                    break
        d[l] = d[l] + f
        e[l] = 0.0
    return True


@njit(cache=True)
def _cholesky_lower(a):
    """Lower Cholesky factor of ``a``; second value is False if not SPD."""
    n = a.shape[0]
    low = np.zeros((n, n))
    for j in range(n):
        s = a[j, j]
        for k in range(j):
            s -= low[j, k] * low[j, k]
        if s <= 0.0 or not np.isfinite(s):
            return low, False
        low[j, j] = math.sqrt(s)
        for i in range(j + 1, n):
            t = a[i, j]
            for k in range(j):
                t -= low[i, k] * low[j, k]
            low[i, j] = t / low[j, j]
    return low, True


@njit(cache=True)
def _forward_solve_matrix(low, b):
    """Solve low @ Y = b for Y (low lower-triangular, b a matrix)."""
    n = low.shape[0]
    m = b.shape[1]
    y = np.empty((n, m))
    for j in range(m):
        for i in range(n):
            t = b[i, j]
            for k in range(i):
                t -= low[i, k] * y[k, j]
            y[i, j] = t / low[i, i]
    return y


@njit(cache=True)
def _back_solve_transposed(low, b):
    """Solve low.T @ X = b for X (low lower-triangular, b a matrix)."""
    n = low.shape[0]
    m = b.shape[1]
    x = np.empty((n, m))
    for j in range(m):
        for i in range(n - 1, -1, -1):
            t = b[i, j]
            for k in range(i + 1, n):
                t -= low[k, i] * x[k, j]
            x[i, j] = t / low[i, i]
    return x


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def _require_finite(mat: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(mat)):
        raise ValueError(f"{name} contains non-finite entries")


def _require_symmetric(mat: np.ndarray, name: str, rel_tol: float = 1e-10) -> None:
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"{name} must be square, got shape {mat.shape}")
    scale = np.abs(mat).max() if mat.size else 0.0
    if scale > 0.0 and np.abs(mat - mat.T).max() > rel_tol * scale:
        raise ValueError(f"{name} is not symmetric within tolerance")


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    # deterministic sign convention: largest-magnitude entry positive
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        i = int(np.argmax(np.abs(col)))
        if col[i] < 0.0:
            vectors[:, j] = -col
    return vectors


def centering_matrix(n: int) -> np.ndarray:
    """I_n - (1/n) 1 1^T: subtracts the column mean when right-multiplied."""
    if n < 1:
        raise ValueError("centering_matrix requires n >= 1")
    return np.eye(n) - np.full((n, n), 1.0 / n)


def sym_eig(mat: np.ndarray) -> EigenPairs:
    """Full eigendecomposition of a symmetric matrix.

    Returns all eigenvalues in ascending order with orthonormal eigenvectors.
    """
    mat = np.ascontiguousarray(mat, dtype=np.float64)
    _require_finite(mat, "matrix")
    _require_symmetric(mat, "matrix")
    n = mat.shape[0]
    v = 0.5 * (mat + mat.T)
    d, e = _tred2(v)
    if not _tql2(d, e, v):
        raise NumericError("eigen iteration did not converge")
    order = np.argsort(d, kind="stable")
    values = d[order]
    vectors = _fix_signs(v[:, order])
    return EigenPairs(values=values, vectors=vectors)


def assemble_block_diag(blocks: list[np.ndarray]) -> np.ndarray:
    """Place matrices on the diagonal of a larger matrix, zeros elsewhere."""
    if not blocks:
        raise ValueError("assemble_block_diag requires at least one block")
    arrays = [np.asarray(b, dtype=np.float64) for b in blocks]
    for b in arrays:
        if b.ndim != 2:
            raise ValueError("blocks must be 2-D")
    rows = sum(b.shape[0] for b in arrays)
    cols = sum(b.shape[1] for b in arrays)
    out = np.zeros((rows, cols))
    r = c = 0
    for b in arrays:
        out[r:r + b.shape[0], c:c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


def _solve_definite(lhs: np.ndarray, low: np.ndarray) -> EigenPairs:
    """Eigenpairs of lhs w = phi B w given B = low low^T via reduction."""
    y = _forward_solve_matrix(low, lhs)
    c = _forward_solve_matrix(low, np.ascontiguousarray(y.T))
    c = 0.5 * (c + c.T)
    d, e = _tred2(c)
    if not _tql2(d, e, c):
        raise NumericError("eigen iteration did not converge")
    w = _back_solve_transposed(low, c)
    order = np.argsort(d, kind="stable")
    return EigenPairs(values=d[order], vectors=w[:, order])


def _select(values: np.ndarray, vectors: np.ndarray, m: int,
            select: str) -> EigenPairs:
    if select == "smallest_algebraic":
        keep = np.arange(values.shape[0])
    elif select == "smallest_positive":
        tol = 1e-10 * max(1.0, float(np.abs(values).max(initial=0.0)))
        keep = np.flatnonzero(values > -tol)
    else:
        raise ValueError(f"unknown selection mode {select!r}")
    if keep.shape[0] < m:
        raise ReducedRankError(
            f"only {keep.shape[0]} usable eigenvalues available, {m} requested",
            achievable=int(keep.shape[0]))
    keep = keep[:m]
    vecs = vectors[:, keep].copy()
    norms = np.linalg.norm(vecs, axis=0)
    if np.any(norms == 0.0):
        raise NumericError("zero-norm eigenvector produced")
    vecs /= norms
    return EigenPairs(values=values[keep].copy(), vectors=_fix_signs(vecs))


def _ridge_schedule(rhs: np.ndarray, ridge: float) -> list[float]:
    if ridge > 0.0:
        return [ridge]
    d = rhs.shape[0]
    scale = float(np.trace(rhs)) / d
    if scale <= 0.0:
        # zero/negative trace (e.g. a pure cross-correlation block matrix):
        # fall back to a Frobenius-based magnitude
        scale = float(np.linalg.norm(rhs)) / math.sqrt(d)
    if scale <= 0.0:
        return [0.0]
    return [0.0] + [scale * 10.0 ** k for k in range(-6, -1)]


def gen_eig_smallest(lhs: np.ndarray, rhs: np.ndarray, m: int,
                     ridge: float = 0.0,
                     select: str = "smallest_algebraic") -> EigenPairs:
    """m smallest eigenpairs of the symmetric pencil lhs w = phi (rhs + r I) w.

    If ``ridge`` is 0 and rhs is not positive definite, a default ridge of
    1e-6 * trace(rhs)/d is applied and escalated tenfold up to 1e-2 * trace/d.
    When rhs cannot be made definite within that budget but lhs can, the
    reversed pencil rhs w = (1/phi) lhs w is solved instead and eigenvalues
    with 1/phi numerically zero (phi infinite) are dropped; if fewer than m
    finite real eigenvalues remain a ReducedRankError reports the achievable
    count.
    """
    lhs = np.ascontiguousarray(lhs, dtype=np.float64)
    rhs = np.ascontiguousarray(rhs, dtype=np.float64)
    _require_finite(lhs, "lhs")
    _require_finite(rhs, "rhs")
    _require_symmetric(lhs, "lhs")
    _require_symmetric(rhs, "rhs")
    if rhs.shape != lhs.shape:
        raise ValueError("lhs and rhs must have identical shapes")
    d = lhs.shape[0]
    if not 1 <= m <= d:
        raise ValueError(f"m must lie in [1, {d}], got {m}")
    if ridge < 0.0:
        raise ValueError("ridge must be >= 0")

    lhs = 0.5 * (lhs + lhs.T)
    rhs = 0.5 * (rhs + rhs.T)
    eye = np.eye(d)

    for r in _ridge_schedule(rhs, ridge):
        low, ok = _cholesky_lower(rhs + r * eye)
        if ok:
            pairs = _solve_definite(lhs, low)
            return _select(pairs.values, pairs.vectors, m, select)

    # rhs stays indefinite: solve the reversed pencil against a definite lhs
    rhs_reg = rhs + ridge * eye
    lhs_scale = float(np.trace(lhs)) / d
    if lhs_scale <= 0.0:
        lhs_scale = float(np.linalg.norm(lhs)) / math.sqrt(d)
    for r in [0.0] + [lhs_scale * 10.0 ** k for k in range(-10, -3)]:
        low, ok = _cholesky_lower(lhs + r * eye)
        if ok:
            pairs = _solve_definite(rhs_reg, low)
            theta = pairs.values
            theta_tol = 1e-12 * max(1.0, float(np.abs(theta).max(initial=0.0)))
            finite = np.abs(theta) > theta_tol
            if int(finite.sum()) < m:
                raise ReducedRankError(
                    f"only {int(finite.sum())} finite eigenvalues available, "
                    f"{m} requested", achievable=int(finite.sum()))
            phi = 1.0 / theta[finite]
            vecs = pairs.vectors[:, finite]
            order = np.argsort(phi, kind="stable")
            return _select(phi[order], vecs[:, order], m, select)

    raise NumericError(
        "neither rhs nor lhs could be factorized within the ridge budget")
