"""Dense matrix helpers, norms and the column measure [X]_g.

Matrices are plain ``numpy.ndarray`` objects of dtype float64 in Fortran
(column-major) order.  :func:`as_dense` is the single entry point that
validates and normalises user input; everything downstream assumes its
guarantees (2-D, nonempty, finite, float64, column-major).
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.linalg import blas

from .errors import DimensionMismatch, NonConvergence, NonFiniteError, ZeroMatrix

__all__ = [
    "UNIT_ROUNDOFF",
    "as_dense",
    "column_norms",
    "GMeasure",
    "g_measure",
    "frobenius_norm",
    "spectral_norm_estimate",
    "PValue",
    "p_value",
    "gram",
    "matmul",
    "transpose",
    "upper",
    "triu_matmul",
]

#: Unit roundoff of IEEE double precision, 2**-53.
UNIT_ROUNDOFF = 2.0**-53


def as_dense(x, *, name: str = "X") -> np.ndarray:
    """Return ``x`` as a validated column-major float64 matrix.

    A copy is made only when the dtype or memory layout has to change.
    """
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {a.shape}")
    if a.size == 0:
        raise DimensionMismatch(f"{name} must be nonempty, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise NonFiniteError(f"{name} contains NaN or Inf")
    return np.asfortranarray(a)


def _pow2_scale(amax: np.ndarray) -> np.ndarray:
    # Power-of-two scale factors so the rescaling itself is exact.
    _, exp = np.frexp(amax)
    return np.ldexp(1.0, exp)


def column_norms(X) -> np.ndarray:
    """Euclidean norm of every column, safe against overflow and underflow.

    Each column is divided by a power of two close to its largest entry
    before squaring, so the result equals the naive formula whenever the
    naive formula does not overflow.
    """
    X = as_dense(X)
    amax = np.abs(X).max(axis=0)
    scale = _pow2_scale(amax)
    scale[amax == 0.0] = 1.0
    Y = X / scale
    return scale * np.sqrt(np.einsum("ij,ij->j", Y, Y))


class GMeasure(NamedTuple):
    value: float
    argmax_col: int


def g_measure(X) -> GMeasure:
    """Largest column norm of ``X`` and the (lowest) column attaining it."""
    norms = column_norms(X)
    j = int(np.argmax(norms))
    return GMeasure(float(norms[j]), j)


def frobenius_norm(X) -> float:
    X = as_dense(X)
    amax = float(np.abs(X).max())
    if amax == 0.0:
        return 0.0
    scale = math.ldexp(1.0, math.frexp(amax)[1])
    Y = X / scale
    return scale * math.sqrt(float(np.einsum("ij,ij->", Y, Y)))


def spectral_norm_estimate(X, rel_tol: float = 1e-6, max_iters: int = 200) -> float:
    """Power-iteration estimate of the largest singular value of ``X``.

    Iterates ``v <- X.T @ (X @ v)`` starting from the unit vector that picks
    the largest-norm column, and returns ``||X v|| / ||v||``, which never
    exceeds ``||X||_2``.  Stops once two successive estimates agree to
    ``rel_tol``.

    Raises
    ------
    NonConvergence
        If ``max_iters`` iterations do not reach ``rel_tol``.  The last
        estimate is attached as ``exc.estimate``.
    """
    if not 0.0 < rel_tol < 1.0:
        raise ValueError("rel_tol must lie in (0, 1)")
    X = as_dense(X)
    g = g_measure(X)
    if g.value == 0.0:
        raise ZeroMatrix("spectral norm estimate of a zero matrix")
    v = np.zeros(X.shape[1])
    v[g.argmax_col] = 1.0
    w = X[:, g.argmax_col].copy()
    est = g.value
    for it in range(1, max_iters + 1):
        v = X.T @ w
        vnorm = float(np.linalg.norm(v))
        if vnorm == 0.0:
            return est
        v /= vnorm
        w = X @ v
        new = float(np.linalg.norm(w))
        if abs(new - est) <= rel_tol * new:
            return new
        est = new
    raise NonConvergence(
        f"power iteration did not reach rel_tol={rel_tol} in {max_iters} iterations",
        estimate=est,
        iterations=max_iters,
    )


class PValue(NamedTuple):
    """Ratio [X]_g / sigma1 plus a flag raised when it leaves [1/sqrt(n), 1]."""

    value: float
    out_of_range: bool


def p_value(X, sigma1: float) -> PValue:
    X = as_dense(X)
    if not sigma1 > 0.0:
        raise ValueError("sigma1 must be positive")
    g = g_measure(X).value
    if g == 0.0:
        raise ZeroMatrix("p-value of a zero matrix")
    p = g / sigma1
    n = X.shape[1]
    out = p > 1.0 + 1e-12 or p < 1.0 / math.sqrt(n) - 1e-12
    return PValue(p, out)


def gram(X) -> np.ndarray:
    """``X.T @ X`` via SYRK on the upper triangle, mirrored to exact symmetry."""
    X = as_dense(X)
    if X.shape[0] < X.shape[1]:
        raise DimensionMismatch(f"gram expects m >= n, got shape {X.shape}")
    C = blas.dsyrk(1.0, X, trans=1, lower=0)
    return upper_to_symmetric(C)


def upper_to_symmetric(C: np.ndarray) -> np.ndarray:
    U = np.triu(C)
    return np.asfortranarray(U + np.triu(U, 1).T)


def matmul(A, B) -> np.ndarray:
    A = as_dense(A, name="A")
    B = as_dense(B, name="B")
    if A.shape[1] != B.shape[0]:
        raise DimensionMismatch(f"cannot multiply {A.shape} by {B.shape}")
    return np.asfortranarray(A @ B)


def transpose(A) -> np.ndarray:
    return np.asfortranarray(as_dense(A, name="A").T)


def upper(A) -> np.ndarray:
    """Upper-triangular part of ``A`` (square), zeros below the diagonal."""
    A = as_dense(A, name="A")
    if A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got {A.shape}")
    return np.asfortranarray(np.triu(A))


def triu_matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Product of two upper-triangular matrices via TRMM; result upper triangular."""
    if A.shape[1] != B.shape[0]:
        raise DimensionMismatch(f"cannot multiply {A.shape} by {B.shape}")
    C = blas.dtrmm(1.0, A, np.asfortranarray(B), side=0, lower=0)
    return np.asfortranarray(np.triu(C))
