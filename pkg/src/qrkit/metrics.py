"""Accuracy measurements and the rounding-error bound formulas they are checked against."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .kernels import QrResult, jacobi_svd
from .matrix import UNIT_ROUNDOFF, as_dense, frobenius_norm

__all__ = [
    "gamma",
    "AccuracyReport",
    "accuracy",
    "orthogonality",
    "residual",
    "BoundReport",
    "bounds",
    "BoundCheck",
    "check_against_bounds",
]

u = UNIT_ROUNDOFF


def gamma(k: int) -> float:
    """``k u / (1 - k u)``; requires ``k u < 1``."""
    ku = k * u
    if not ku < 1.0:
        raise DomainError(f"gamma_{k} undefined: k*u = {ku} >= 1")
    return ku / (1.0 - ku)


def orthogonality(Q) -> float:
    """``||Q^T Q - I||_F``."""
    Q = as_dense(Q, name="Q")
    D = Q.T @ Q
    D[np.diag_indices_from(D)] -= 1.0
    return frobenius_norm(D)


def residual(X, Q, R) -> float:
    """``||Q R - X||_F``."""
    return frobenius_norm(as_dense(Q, name="Q") @ as_dense(R, name="R") - as_dense(X))


@dataclass(frozen=True)
class AccuracyReport:
    orth_fro: float
    orth_two: float
    resid_fro: float
    resid_rel: float
    kappa_q: float

    def as_dict(self) -> dict:
        return asdict(self)


def accuracy(X, result: QrResult) -> AccuracyReport:
    """Orthogonality, residual and conditioning of a factorization.

    ``kappa_q`` is the condition number of the first-pass factor
    (``result.stage_q[0]``, or ``Q`` when no stages are recorded).  That is
    the factor the later passes must repair, and the one the
    ``kappa_q_bound`` formula describes; the final ``Q`` of any successful
    run has ``kappa_q`` close to 1.
    """
    X = as_dense(X)
    Q, R = result.Q, result.R
    if Q.shape != X.shape or R.shape != (X.shape[1], X.shape[1]):
        raise ValueError(f"factor shapes Q{Q.shape}, R{R.shape} do not match X{X.shape}")
    D = Q.T @ Q
    D[np.diag_indices_from(D)] -= 1.0
    orth_fro = frobenius_norm(D)
    orth_two = jacobi_svd(D).sigma_max if orth_fro > 0.0 else 0.0
    resid_fro = residual(X, Q, R)
    xf = frobenius_norm(X)
    first = result.stage_q[0] if result.stage_q else Q
    sv = jacobi_svd(first).singular_values
    kappa_q = float(sv[0] / sv[-1]) if sv[-1] > 0.0 else math.inf
    return AccuracyReport(orth_fro, orth_two, resid_fro, resid_fro / xf if xf else 0.0, kappa_q)


@dataclass(frozen=True)
class BoundReport:
    """Every bound formula evaluated for one problem instance.

    ``resid_bound_scqr`` follows the theorem statement ``1.67 p n^2 u ||X||_2``;
    the comparison table of the same source lists ``1.6 n^2 u [X]_g`` instead,
    kept here as ``resid_bound_scqr_table``.
    """

    m: int
    n: int
    kappa: float
    p: float
    t: float
    sigma1: float
    gamma_n: float
    gamma_m: float
    gamma_n1: float
    delta: float
    e_a_bound: float
    e_b_bound: float
    orth_bound_scqr: float
    resid_bound_scqr: float
    resid_bound_scqr_table: float
    orth_bound_cholqr2: float
    resid_bound_cholqr2: float
    orth_bound_scqr3: float
    resid_bound_scqr3: float
    resid_bound_scqr3_original: float
    kappa_q_bound: float
    kappa_q_bound_original: float
    kappa_sufficient: float
    kappa_sufficient_original: float
    kappa_upper_improved: float
    kappa_upper_original: float

    def as_dict(self) -> dict:
        return asdict(self)


def bounds(m: int, n: int, kappa: float, p: float, t: float = 0.0, sigma1: float = 1.0) -> BoundReport:
    """Evaluate the error bounds for an ``m x n`` input.

    ``p`` is ``[X]_g / ||X||_2``, ``t`` is ``s / ||X||_2**2`` and ``sigma1``
    is ``||X||_2``.  Formulas are evaluated left to right in double
    precision.
    """
    if not (m >= n >= 1):
        raise DomainError(f"need m >= n >= 1, got m={m}, n={n}")
    if not (kappa >= 1.0 and p > 0.0 and t >= 0.0 and sigma1 > 0.0):
        raise DomainError("kappa >= 1, p > 0, t >= 0 and sigma1 > 0 are required")
    mnu = m * n * u
    nnu = n * (n + 1) * u
    size = mnu + nnu
    n2u = n * n * u
    g = p * sigma1
    return BoundReport(
        m=m,
        n=n,
        kappa=kappa,
        p=p,
        t=t,
        sigma1=sigma1,
        gamma_n=gamma(n),
        gamma_m=gamma(m),
        gamma_n1=gamma(n + 1),
        delta=8 * kappa * math.sqrt(size),
        e_a_bound=1.1 * mnu * g * g,
        e_b_bound=1.1 * nnu * g * g,
        orth_bound_scqr=1.6,
        resid_bound_scqr=1.67 * p * n2u * sigma1,
        resid_bound_scqr_table=1.6 * n2u * g,
        orth_bound_cholqr2=6 * size,
        resid_bound_cholqr2=5 * n2u * sigma1,
        orth_bound_scqr3=6 * size,
        resid_bound_scqr3=(6.57 * p + 4.87) * n2u * sigma1,
        resid_bound_scqr3_original=15 * n2u * sigma1,
        kappa_q_bound=3.24 * math.sqrt(1 + t * kappa**2),
        kappa_q_bound_original=2 * math.sqrt(3) * math.sqrt(1 + t * kappa**2),
        kappa_sufficient=1 / (86 * p * (mnu + (n + 1) * n * u)),
        kappa_sufficient_original=1 / (96 * size),
        kappa_upper_improved=1 / (4.89 * p * n2u),
        kappa_upper_original=1 / (6 * n2u),
    )


class BoundCheck(NamedTuple):
    name: str
    measured: float
    bound: float
    passed: bool


def check_against_bounds(report: AccuracyReport, bound: BoundReport) -> list[BoundCheck]:
    """Compare measured errors of a three-pass shifted run with their bounds."""
    pairs = [
        ("orth_fro <= orth_bound_scqr3", report.orth_fro, bound.orth_bound_scqr3),
        ("resid_fro <= resid_bound_scqr3", report.resid_fro, bound.resid_bound_scqr3),
        ("orth_two <= orth_bound_scqr", report.orth_two, bound.orth_bound_scqr),
        ("kappa_q <= kappa_q_bound", report.kappa_q, bound.kappa_q_bound),
    ]
    return [BoundCheck(name, meas, bnd, bool(meas <= bnd)) for name, meas, bnd in pairs]
