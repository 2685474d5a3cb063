"""Sparse symmetric solvers: Jacobi-preconditioned CG and banded LDL^T.

The LDL^T factorization doubles as a positive-definiteness certificate: it
fails with :class:`NotPositiveDefiniteError` at the first nonpositive pivot.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import reverse_cuthill_mckee

from .errors import ConvergenceError, NotPositiveDefiniteError


def symmetry_defect(A):
    """``max |A - A^T| / max |A|`` (0 for the zero matrix)."""
    A = sp.csr_matrix(A)
    scale = abs(A).max() if A.nnz else 0.0
    if scale == 0:
        return 0.0
    diff = A - A.T
    return float(abs(diff).max() / scale) if diff.nnz else 0.0


@dataclass
class CGInfo:
    iterations: int
    residual: float


def pcg(A, rhs, tol=1e-12, x0=None, maxiter=None, symmetry_tol=1e-10):
    """Jacobi-preconditioned conjugate gradients.

    Returns ``(x, CGInfo)``; ``info.residual`` is ``|rhs - A x| / |rhs|``.
    Raises :class:`NotPositiveDefiniteError` for a nonpositive diagonal or a
    direction of nonpositive curvature, :class:`ConvergenceError` when the
    ``10 n`` iteration cap is hit or the iteration stagnates.
    """
    A = sp.csr_matrix(A)
    b = np.asarray(rhs, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or b.shape != (n,):
        raise ValueError("shape mismatch between matrix and right-hand side")
    if symmetry_defect(A) > symmetry_tol:
        raise ValueError("matrix is not symmetric")
    diag = A.diagonal()
    if np.any(diag <= 0):
        i = int(np.flatnonzero(diag <= 0)[0])
        raise NotPositiveDefiniteError(f"nonpositive diagonal entry at {i}", i, float(diag[i]))
    maxiter = 10 * n if maxiter is None else maxiter

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n), CGInfo(0, 0.0)
    r = b - A @ x
    rnorm = np.linalg.norm(r)
    if rnorm <= tol * bnorm:
        return x, CGInfo(0, rnorm / bnorm)

    inv_diag = 1.0 / diag
    z = inv_diag * r
    p = z.copy()
    rz = r @ z
    best, since_best = rnorm, 0
    for k in range(1, maxiter + 1):
        Ap = A @ p
        curvature = p @ Ap
        if curvature <= 0:
            raise NotPositiveDefiniteError(f"nonpositive curvature {curvature:.3e} at CG step {k}")
        step = rz / curvature
        x += step * p
        r -= step * Ap
        rnorm = np.linalg.norm(r)
        if rnorm <= tol * bnorm:
            # guard against drift of the recursive residual
            true = np.linalg.norm(b - A @ x)
            if true <= tol * bnorm:
                return x, CGInfo(k, true / bnorm)
            r = b - A @ x
            rnorm = true
        if rnorm < 0.5 * best:
            best, since_best = rnorm, 0
        else:
            since_best += 1
            if since_best > max(50, n):
                raise ConvergenceError(f"CG stagnated at relative residual {rnorm / bnorm:.3e} after {k} steps")
        z = inv_diag * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise ConvergenceError(f"CG did not reach tolerance {tol:g} in {maxiter} steps (residual {rnorm / bnorm:.3e})")


def cg_solve(A, rhs, tol=1e-12, x0=None):
    """Solve the SPD system ``A x = rhs`` to relative residual ``tol``."""
    return pcg(A, rhs, tol=tol, x0=x0)[0]


@dataclass
class LDLFactor:
    """``P A P^T = L D L^T`` with unit lower-triangular banded ``L``.

    ``lower[j, k]`` stores ``L[j + 1 + k, j]`` in permuted numbering.
    """

    perm: np.ndarray
    lower: np.ndarray
    diag: np.ndarray

    @property
    def bandwidth(self):
        return self.lower.shape[1]

    def solve(self, rhs):
        b = np.asarray(rhs, dtype=float)
        n, w = self.lower.shape
        y = np.zeros(n + w)
        y[:n] = b[self.perm]
        for j in range(n):
            y[j + 1 : j + 1 + w] -= self.lower[j] * y[j]
        y[:n] /= self.diag
        for j in range(n - 1, -1, -1):
            y[j] -= self.lower[j] @ y[j + 1 : j + 1 + w]
        x = np.empty(n)
        x[self.perm] = y[:n]
        return x


def ldl_factor(A, pivot_tol=1e-14, symmetry_tol=1e-10):
    """Banded LDL^T of a symmetric sparse matrix after reverse Cuthill-McKee.

    A pivot ``d_j <= pivot_tol * max|diag(A)|`` raises
    :class:`NotPositiveDefiniteError`; success certifies positive definiteness.
    """
    A = sp.csr_matrix(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    if symmetry_defect(A) > symmetry_tol:
        raise ValueError("matrix is not symmetric")
    if n == 0:
        return LDLFactor(np.zeros(0, dtype=int), np.zeros((0, 0)), np.zeros(0))
    perm = np.asarray(reverse_cuthill_mckee(A, symmetric_mode=True), dtype=np.int64)
    B = A[perm][:, perm].tocoo()
    lower_part = B.row >= B.col
    rows, cols, vals = B.row[lower_part], B.col[lower_part], B.data[lower_part]
    w = int((rows - cols).max()) if rows.size else 0

    # band[i, k] = B[i, i - k], padded with identity rows beyond n
    band = np.zeros((n + w + 1, w + 1))
    band[n:, 0] = 1.0
    np.add.at(band, (rows, rows - cols), vals)
    scale = max(float(np.abs(band[:n, 0]).max()), np.finfo(float).tiny)

    # rolling dense window W = current trailing block B[j:j+w+1, j:j+w+1]
    window = np.zeros((w + 1, w + 1))
    for i in range(w + 1):
        window[i, : i + 1] = band[i, i::-1]
    window = np.tril(window) + np.tril(window, -1).T

    lower = np.zeros((n, w))
    diag = np.empty(n)
    for j in range(n):
        d = window[0, 0]
        if not d > pivot_tol * scale:
            raise NotPositiveDefiniteError(
                f"nonpositive pivot {d:.3e} at step {j} (original row {perm[j]})", int(perm[j]), float(d)
            )
        col = window[1:, 0] / d
        diag[j] = d
        lower[j] = col
        trailing = window[1:, 1:] - d * np.outer(col, col)
        window[:-1, :-1] = trailing
        new = band[j + w + 1, ::-1]
        window[-1, :] = new
        window[:, -1] = new
    return LDLFactor(perm, lower, diag)


def cholesky_solve(A, rhs):
    """Solve ``A x = rhs`` through :func:`ldl_factor`."""
    return ldl_factor(A).solve(rhs)


def is_positive_definite(A):
    try:
        ldl_factor(A)
    except NotPositiveDefiniteError:
        return False
    return True
