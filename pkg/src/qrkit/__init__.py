"""Tall-skinny QR by the CholeskyQR family, with column-based shifted CholeskyQR3.

Typical use::

    from qrkit import shifted_cholesky_qr3, IMPROVED_COLUMN, svd_conditioned
    X = svd_conditioned(2048, 64, 1e12, seed=0)
    res = shifted_cholesky_qr3(X, IMPROVED_COLUMN)
"""

__version__ = "0.1.0"

from .algorithms import (
    ALGORITHMS,
    IMPROVED_COLUMN,
    NO_SHIFT,
    ORIGINAL_SPECTRAL,
    ShiftInfo,
    ShiftKind,
    ShiftStrategy,
    algo_dispatch,
    check_size_conditions,
    cholesky_qr,
    cholesky_qr2,
    shift_improved,
    shift_original,
    shifted_cholesky_qr,
    shifted_cholesky_qr3,
)
from .errors import (
    BreakdownError,
    DimensionMismatch,
    DomainError,
    NonConvergence,
    NonFiniteError,
    ParseError,
    QrkitError,
    SingularMatrix,
    SingularTriangular,
    Stage,
    UnknownAlgorithm,
    ZeroMatrix,
)
from .kernels import QrResult, SvdResult, cholesky, condition_number, householder_qr, jacobi_svd, right_tri_solve
from .matrix import (
    UNIT_ROUNDOFF,
    GMeasure,
    as_dense,
    column_norms,
    frobenius_norm,
    g_measure,
    gram,
    matmul,
    p_value,
    spectral_norm_estimate,
    transpose,
)
from .metrics import AccuracyReport, BoundReport, accuracy, bounds, check_against_bounds, gamma
from .testmat import (
    MatrixSpec,
    arrowhead,
    hilbert,
    random_orthogonal,
    read_matrix_market,
    realize,
    svd_conditioned,
    write_matrix_market,
)
