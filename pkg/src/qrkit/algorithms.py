"""CholeskyQR-family factorizations and shift selection.

All algorithms take a tall-skinny ``X`` (m >= n) and return a
:class:`~qrkit.kernels.QrResult`.  Cholesky breakdown is reported by
raising :class:`~qrkit.errors.BreakdownError` with the failing stage,
the number of completed stages and, for shifted variants, the shift that
was used.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import BreakdownError, DimensionMismatch, NonConvergence, Stage, UnknownAlgorithm, ZeroMatrix
from .kernels import QrResult, cholesky, householder_qr, right_tri_solve
from .matrix import UNIT_ROUNDOFF, as_dense, frobenius_norm, g_measure, gram, spectral_norm_estimate, triu_matmul

__all__ = [
    "ShiftKind",
    "ShiftStrategy",
    "ShiftInfo",
    "SizeReport",
    "check_size_conditions",
    "shift_original",
    "shift_improved",
    "resolve_shift",
    "cholesky_qr",
    "cholesky_qr2",
    "shifted_cholesky_qr",
    "shifted_cholesky_qr3",
    "ALGORITHMS",
    "algo_dispatch",
]

#: Safety factor applied to the rounding-error terms of the Gram matrix.
SHIFT_FACTOR = 11.0


class ShiftKind(enum.Enum):
    NONE = "none"
    ORIGINAL = "original"
    IMPROVED = "improved"
    FIXED = "fixed"


@dataclass(frozen=True)
class ShiftStrategy:
    kind: ShiftKind
    value: float | None = None

    def __post_init__(self):
        if self.kind is ShiftKind.FIXED:
            if self.value is None or not self.value > 0.0 or not math.isfinite(self.value):
                raise ValueError("a fixed shift must be a positive finite number")
        elif self.value is not None:
            raise ValueError(f"{self.kind.value} shift takes no value")

    @classmethod
    def parse(cls, text: str) -> "ShiftStrategy":
        """Parse ``none``, ``original``, ``improved`` or ``fixed:<value>``."""
        text = text.strip().lower()
        if text.startswith("fixed:"):
            return cls(ShiftKind.FIXED, float(text.split(":", 1)[1]))
        try:
            return cls(ShiftKind(text))
        except ValueError:
            raise ValueError(f"unknown shift strategy {text!r}") from None

    def __str__(self) -> str:
        if self.kind is ShiftKind.FIXED:
            return f"fixed:{self.value!r}"
        return self.kind.value


NO_SHIFT = ShiftStrategy(ShiftKind.NONE)
ORIGINAL_SPECTRAL = ShiftStrategy(ShiftKind.ORIGINAL)
IMPROVED_COLUMN = ShiftStrategy(ShiftKind.IMPROVED)


@dataclass(frozen=True)
class ShiftInfo:
    """The shift actually used and the quantities it was derived from.

    ``basis`` is the norm the shift is proportional to (a spectral-norm
    estimate or [X]_g).  ``t`` is ``s / sigma1**2`` when a sigma1 value is
    known, otherwise ``s / basis**2``.
    """

    strategy: ShiftStrategy
    s: float
    basis: float | None
    t: float | None
    p: float | None
    size_terms: tuple[float, float]
    sigma1: float | None = None
    fallback: bool = False
    u: float = UNIT_ROUNDOFF


class SizeReport(NamedTuple):
    ok: bool
    mnu: float
    nnu: float


def check_size_conditions(m: int, n: int) -> SizeReport:
    """``m*n*u <= 1/64`` and ``n*(n+1)*u <= 1/64``."""
    if not m >= n >= 1:
        raise ValueError(f"need m >= n >= 1, got m={m}, n={n}")
    mnu, nnu = _size_terms(m, n)
    return SizeReport(mnu <= 1 / 64 and nnu <= 1 / 64, mnu, nnu)


def _size_terms(m: int, n: int) -> tuple[float, float]:
    # Exact integers first; m*n may exceed 2**53 only far outside the valid range.
    return float(m * n) * UNIT_ROUNDOFF, float(n * (n + 1)) * UNIT_ROUNDOFF


def _shift_from_basis(m: int, n: int, basis: float) -> float:
    mnu, nnu = _size_terms(m, n)
    return (SHIFT_FACTOR * (mnu + nnu)) * (basis * basis)


def shift_original(X, rel_tol: float = 1e-6, max_iters: int = 200) -> ShiftInfo:
    """``s = 11 (mnu + n(n+1)u) ||X||_2**2`` with a power-iteration estimate of ``||X||_2``.

    If the estimator does not converge, ``||X||_F`` is used instead (a
    larger, still valid shift) and ``fallback`` is set.
    """
    X = as_dense(X)
    m, n = X.shape
    fallback = False
    try:
        sigma1 = spectral_norm_estimate(X, rel_tol=rel_tol, max_iters=max_iters)
    except NonConvergence:
        sigma1 = frobenius_norm(X)
        fallback = True
    s = _shift_from_basis(m, n, sigma1)
    return ShiftInfo(
        strategy=ORIGINAL_SPECTRAL,
        s=s,
        basis=sigma1,
        t=s / (sigma1 * sigma1),
        p=g_measure(X).value / sigma1,
        size_terms=_size_terms(m, n),
        sigma1=sigma1,
        fallback=fallback,
    )


def shift_improved(X, sigma1: float | None = None) -> ShiftInfo:
    """``s = 11 (mnu + n(n+1)u) [X]_g**2``.

    ``sigma1`` (an estimate or exact value of ``||X||_2``) is optional; when
    given, ``t`` and ``p`` are expressed relative to it.
    """
    X = as_dense(X)
    m, n = X.shape
    g = g_measure(X).value
    if g == 0.0:
        raise ZeroMatrix("cannot shift a zero matrix")
    s = _shift_from_basis(m, n, g)
    ref = g if sigma1 is None else sigma1
    return ShiftInfo(
        strategy=IMPROVED_COLUMN,
        s=s,
        basis=g,
        t=s / (ref * ref),
        p=None if sigma1 is None else g / sigma1,
        size_terms=_size_terms(m, n),
        sigma1=sigma1,
    )


def resolve_shift(X, strategy: ShiftStrategy) -> ShiftInfo:
    X = as_dense(X)
    m, n = X.shape
    if strategy.kind is ShiftKind.ORIGINAL:
        return shift_original(X)
    if strategy.kind is ShiftKind.IMPROVED:
        return shift_improved(X)
    s = 0.0 if strategy.kind is ShiftKind.NONE else float(strategy.value)
    return ShiftInfo(strategy, s, None, None, None, _size_terms(m, n))


def _check_shape(X: np.ndarray) -> None:
    m, n = X.shape
    if m < n:
        raise DimensionMismatch(f"CholeskyQR needs m >= n, got {X.shape}")
    if not check_size_conditions(m, n).ok:
        warnings.warn(
            f"size conditions mnu <= 1/64, n(n+1)u <= 1/64 violated for m={m}, n={n}",
            RuntimeWarning,
            stacklevel=3,
        )


def _cholqr_step(X: np.ndarray, shift: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    B = gram(X)
    if shift:
        B[np.diag_indices_from(B)] += shift
    R = cholesky(B)
    return right_tri_solve(X, R), R


def cholesky_qr(X) -> QrResult:
    X = as_dense(X)
    _check_shape(X)
    Q, R = _cholqr_step(X)
    return QrResult(Q, R, None, 1, "cholqr", [Q])


def cholesky_qr2(X) -> QrResult:
    """Two CholeskyQR passes; ``R = R1 @ R``."""
    X = as_dense(X)
    _check_shape(X)
    Q, R = _cholqr_step(X)
    try:
        Q1, R1 = _cholqr_step(Q)
    except BreakdownError as exc:
        raise exc.at_stage(Stage.SECOND_CHOLESKY, 1) from None
    return QrResult(Q1, triu_matmul(R1, R), None, 2, "cholqr2", [Q, Q1])


def shifted_cholesky_qr(X, strategy: ShiftStrategy = IMPROVED_COLUMN) -> QrResult:
    """One CholeskyQR pass on ``X.T @ X + s I``."""
    X = as_dense(X)
    _check_shape(X)
    info = resolve_shift(X, strategy)
    try:
        Q, R = _cholqr_step(X, info.s)
    except BreakdownError as exc:
        raise exc.at_stage(Stage.FIRST_CHOLESKY, 0, info) from None
    return QrResult(Q, R, info, 1, "scqr", [Q])


def shifted_cholesky_qr3(X, strategy: ShiftStrategy = IMPROVED_COLUMN) -> QrResult:
    """Shifted CholeskyQR followed by CholeskyQR2; ``R = R3 @ (R1 @ R)``."""
    X = as_dense(X)
    _check_shape(X)
    info = resolve_shift(X, strategy)
    try:
        Q, R = _cholqr_step(X, info.s)
    except BreakdownError as exc:
        raise exc.at_stage(Stage.FIRST_CHOLESKY, 0, info) from None
    try:
        Q1, R1 = _cholqr_step(Q)
    except BreakdownError as exc:
        raise exc.at_stage(Stage.SECOND_CHOLESKY, 1, info) from None
    R2 = triu_matmul(R1, R)
    try:
        Q2, R3 = _cholqr_step(Q1)
    except BreakdownError as exc:
        raise exc.at_stage(Stage.THIRD_CHOLESKY, 2, info) from None
    name = "iscqr3" if info.strategy.kind is ShiftKind.IMPROVED else "scqr3"
    return QrResult(Q2, triu_matmul(R3, R2), info, 3, name, [Q, Q1, Q2])


ALGORITHMS = ("cholqr", "cholqr2", "scqr3", "iscqr3", "hhqr")


def algo_dispatch(name: str, X, strategy: ShiftStrategy | None = None) -> QrResult:
    """Run algorithm ``name`` on ``X``.

    ``strategy`` only affects ``scqr3`` (default: spectral-norm shift);
    ``iscqr3`` always uses the column-based shift.
    """
    if name == "cholqr":
        return cholesky_qr(X)
    if name == "cholqr2":
        return cholesky_qr2(X)
    if name == "scqr3":
        return shifted_cholesky_qr3(X, strategy or ORIGINAL_SPECTRAL)
    if name == "iscqr3":
        return shifted_cholesky_qr3(X, IMPROVED_COLUMN)
    if name == "hhqr":
        return householder_qr(X)
    raise UnknownAlgorithm(f"unknown algorithm {name!r}; expected one of {', '.join(ALGORITHMS)}")
