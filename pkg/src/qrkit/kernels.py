"""Factorization kernels: Cholesky, triangular solve, Householder QR, Jacobi SVD."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.linalg import blas

from .errors import (
    BreakdownError,
    DimensionMismatch,
    NonConvergenceWarning,
    SingularMatrix,
    SingularTriangular,
)
from .matrix import as_dense, column_norms

__all__ = [
    "QrResult",
    "SvdResult",
    "cholesky",
    "right_tri_solve",
    "householder_qr",
    "jacobi_svd",
    "condition_number",
]

#: Diagonal entries of a triangular factor below this are treated as zero.
TINY_PIVOT = 1e-300


@dataclass
class QrResult:
    """Factors of ``X ~= Q @ R`` and how they were obtained.

    ``stage_q`` keeps the orthogonal factor produced by every pass of a
    multi-pass algorithm (the last entry is ``Q``).
    """

    Q: np.ndarray
    R: np.ndarray
    shift_info: object | None = None
    stages_completed: int = 1
    algorithm: str = ""
    stage_q: list = field(default_factory=list, repr=False)


@dataclass
class SvdResult:
    singular_values: np.ndarray
    sweeps: int = 0
    converged: bool = True

    @property
    def sigma_max(self) -> float:
        return float(self.singular_values[0])

    @property
    def sigma_min(self) -> float:
        return float(self.singular_values[-1])


def cholesky(B) -> np.ndarray:
    """Upper-triangular ``R`` with ``R.T @ R == B`` (up to rounding).

    Left-looking: row ``j`` of ``R`` is formed from ``B[j, j:]`` minus the
    contributions of rows ``0..j-1``, then divided by the square root of the
    pivot.  Only the upper triangle of ``B`` is read.

    Raises
    ------
    BreakdownError
        As soon as a pivot is ``<= 0`` or not finite.  No tolerance is
        applied.
    """
    B = as_dense(B, name="B")
    n = B.shape[0]
    if B.shape[1] != n:
        raise DimensionMismatch(f"cholesky expects a square matrix, got {B.shape}")
    R = np.zeros((n, n), order="F")
    for j in range(n):
        row = B[j, j:] - R[:j, j] @ R[:j, j:]
        pivot = row[0]
        if not (pivot > 0.0 and math.isfinite(pivot)):
            raise BreakdownError(j, pivot)
        d = math.sqrt(pivot)
        R[j, j] = d
        R[j, j + 1 :] = row[1:] / d
    return R


def right_tri_solve(X, R) -> np.ndarray:
    """Solve ``Q @ R = X`` for ``Q`` without forming ``R^{-1}``.

    Every row of ``Q`` is obtained by substitution against ``R.T`` (BLAS
    TRSM, right side, upper, no transpose).  Neither argument is modified.
    """
    X = as_dense(X)
    R = as_dense(R, name="R")
    n = R.shape[0]
    if R.shape[1] != n or X.shape[1] != n:
        raise DimensionMismatch(f"cannot solve with X{X.shape} and R{R.shape}")
    d = np.abs(np.diag(R))
    bad = np.flatnonzero(d < TINY_PIVOT)
    if bad.size:
        raise SingularTriangular(f"R has a zero or tiny diagonal entry at index {bad[0]}")
    return blas.dtrsm(1.0, R, X, side=1, lower=0, trans_a=0, diag=0, overwrite_b=0)


def householder_qr(X) -> QrResult:
    """Unblocked Householder QR with an explicit thin ``Q``.

    Reflectors are applied one column at a time (rank-one updates), the
    textbook formulation used as the stability reference.  Signs are fixed
    so that ``diag(R) >= 0``.  A zero trailing column yields a zero pivot
    row in ``R`` rather than an error.
    """
    A = np.array(as_dense(X), order="F", copy=True)
    m, n = A.shape
    if m < n:
        raise DimensionMismatch(f"householder_qr expects m >= n, got {A.shape}")
    vs: list[np.ndarray | None] = []
    taus = np.zeros(n)
    for k in range(n):
        x = A[k:, k]
        normx = float(np.linalg.norm(x))
        if normx == 0.0:
            vs.append(None)
            continue
        x0 = x[0]
        beta = -math.copysign(normx, x0)
        v = x / (x0 - beta)
        v[0] = 1.0
        tau = (beta - x0) / beta
        if k + 1 < n:
            sub = A[k:, k + 1 :]
            sub -= tau * np.outer(v, v @ sub)
        A[k, k] = beta
        A[k + 1 :, k] = 0.0
        vs.append(v)
        taus[k] = tau

    R = np.triu(A[:n, :])
    Q = np.zeros((m, n), order="F")
    Q[:n, :n] = np.eye(n)
    for k in range(n - 1, -1, -1):
        v = vs[k]
        if v is None:
            continue
        sub = Q[k:, k:]
        sub -= taus[k] * np.outer(v, v @ sub)

    signs = np.where(np.diag(R) < 0.0, -1.0, 1.0)
    R = np.asfortranarray(R * signs[:, None])
    Q = np.asfortranarray(Q * signs)
    return QrResult(Q=Q, R=R, stages_completed=1, algorithm="hhqr", stage_q=[Q])


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairings covering every column pair once per sweep, n/2 disjoint pairs per step."""
    size = n + (n % 2)
    players = list(range(size))
    steps = []
    for _ in range(size - 1):
        left, right = [], []
        for i in range(size // 2):
            a, b = players[i], players[size - 1 - i]
            if a < n and b < n:
                left.append(min(a, b))
                right.append(max(a, b))
        steps.append((np.array(left, dtype=np.intp), np.array(right, dtype=np.intp)))
        players = [players[0], players[-1]] + players[1:-1]
    return steps


def jacobi_svd(X, tol: float = 1e-14, max_sweeps: int = 30) -> SvdResult:
    """Singular values by one-sided Jacobi.

    ``X`` is first reduced by column-pivoted QR, and ``R.T`` by a second,
    unpivoted QR to ``R1``; the two preconditioning steps leave a triangle
    with strongly diagonal structure.  Jacobi rotations are then applied to
    the columns of ``R1.T`` in a parallel round-robin order until every
    pair has cosine below ``tol``.  Small singular values come out to
    high relative accuracy, unlike eigenvalues of the Gram matrix.

    If ``max_sweeps`` is exhausted the best values so far are returned with
    ``converged=False`` and a :class:`NonConvergenceWarning`.
    """
    X = as_dense(X)
    m, n = X.shape
    if m < n:
        raise DimensionMismatch(f"jacobi_svd expects m >= n, got {X.shape}")
    R = scipy.linalg.qr(X, mode="r", pivoting=True, check_finite=False)[0][:n, :]
    R1 = scipy.linalg.qr(np.triu(R).T, mode="r", check_finite=False)[0]
    W = np.asfortranarray(np.triu(R1).T)
    if n == 1:
        return SvdResult(column_norms(W), 0, True)

    steps = _round_robin(n)
    converged = False
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        rotated = 0
        for p, q in steps:
            ap = W[:, p]
            aq = W[:, q]
            alpha = np.einsum("ij,ij->j", ap, ap)
            beta = np.einsum("ij,ij->j", aq, aq)
            gamma = np.einsum("ij,ij->j", ap, aq)
            active = np.abs(gamma) > tol * np.sqrt(alpha) * np.sqrt(beta)
            if not active.any():
                continue
            rotated += int(active.sum())
            p, q = p[active], q[active]
            ap, aq = ap[:, active], aq[:, active]
            zeta = (beta[active] - alpha[active]) / (2.0 * gamma[active])
            t = np.where(zeta >= 0.0, 1.0, -1.0) / (np.abs(zeta) + np.hypot(1.0, zeta))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = c * t
            W[:, p] = c * ap - s * aq
            W[:, q] = s * ap + c * aq
        if rotated == 0:
            converged = True
            break
    if not converged:
        warnings.warn(
            f"one-sided Jacobi did not converge in {max_sweeps} sweeps",
            NonConvergenceWarning,
            stacklevel=2,
        )
    sv = np.sort(column_norms(W))[::-1]
    return SvdResult(sv, sweeps, converged)


def condition_number(X) -> float:
    """sigma_max / sigma_min from :func:`jacobi_svd`."""
    sv = jacobi_svd(X).singular_values
    if sv[-1] == 0.0:
        raise SingularMatrix("smallest computed singular value is zero")
    return float(sv[0] / sv[-1])
