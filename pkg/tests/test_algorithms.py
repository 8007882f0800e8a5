import math

import numpy as np
import pytest

from qrkit import (
    ALGORITHMS,
    IMPROVED_COLUMN,
    NO_SHIFT,
    ORIGINAL_SPECTRAL,
    UNIT_ROUNDOFF as u,
    BreakdownError,
    DimensionMismatch,
    ShiftKind,
    ShiftStrategy,
    Stage,
    UnknownAlgorithm,
    algo_dispatch,
    check_size_conditions,
    cholesky_qr,
    cholesky_qr2,
    shift_improved,
    shift_original,
    shifted_cholesky_qr,
    shifted_cholesky_qr3,
    svd_conditioned,
)
from qrkit.metrics import orthogonality
from qrkit.testmat import random_orthogonal

X345 = np.array([[3.0, 0.0], [4.0, 0.0], [0.0, 2.0]])


@pytest.fixture(scope="module")
def x12():
    return svd_conditioned(2048, 64, 1e12, seed=0)


def test_size_conditions():
    rep = check_size_conditions(2048, 64)
    assert rep.ok and rep.mnu == pytest.approx(1.455e-11, rel=1e-3)
    assert check_size_conditions(1, 1).ok
    assert not check_size_conditions(2**60, 2).ok


def test_shift_original_identity():
    info = shift_original(np.eye(64))
    assert info.s == pytest.approx(11 * (64 * 64 * u + 64 * 65 * u), rel=1e-12)
    assert info.s == pytest.approx(1.01e-11, rel=0.01)
    assert not info.fallback


def test_shift_original_quadratic_in_scale():
    X = svd_conditioned(300, 10, 1e4, seed=1)
    assert shift_original(2 * X).s == pytest.approx(4 * shift_original(X).s, rel=1e-5)


def test_shift_original_svd_matrix(x12):
    assert shift_original(x12).s == pytest.approx(11 * 1.501e-11, rel=1e-3)


def test_shift_improved_identity_matches_original():
    assert shift_improved(np.eye(64)).s == shift_original(np.eye(64)).s


def test_shift_improved_all_ones():
    X = np.ones((50, 4))
    assert shift_improved(X).s == pytest.approx(shift_original(X).s / 4, rel=1e-12)


def test_shift_ratio_is_p_squared(x12):
    orig, imp = shift_original(x12), shift_improved(x12)
    p = imp.basis / orig.basis
    assert 0.2 <= p <= 0.3
    assert imp.s / orig.s == pytest.approx(p * p, rel=1e-12)
    assert imp.s == pytest.approx(p * p * 1.651e-10, rel=1e-3)


def test_shift_strategy_parse():
    assert ShiftStrategy.parse("improved") == IMPROVED_COLUMN
    assert ShiftStrategy.parse("fixed:0.5") == ShiftStrategy(ShiftKind.FIXED, 0.5)
    assert str(ShiftStrategy.parse("fixed:0.5")) == "fixed:0.5"
    for bad in ("sideways", "fixed:-1", "fixed:nan"):
        with pytest.raises(ValueError):
            ShiftStrategy.parse(bad)


def test_cholesky_qr_examples():
    Q0 = random_orthogonal(40, seed=3, ncols=5)
    res = cholesky_qr(Q0)
    np.testing.assert_allclose(res.Q, Q0, atol=1e-14)
    np.testing.assert_allclose(res.R, np.eye(5), atol=1e-14)
    np.testing.assert_array_equal(cholesky_qr(X345).R, np.diag([5.0, 2.0]))


def test_cholesky_qr_breaks_down_when_ill_conditioned():
    failures = 0
    for seed in range(5):
        try:
            cholesky_qr(svd_conditioned(2048, 64, 1e12, seed))
        except BreakdownError as exc:
            assert exc.stage is Stage.FIRST_CHOLESKY
            failures += 1
    assert failures >= 3


def test_cholesky_qr2_regime():
    Q0 = random_orthogonal(40, seed=3, ncols=5)
    np.testing.assert_allclose(cholesky_qr2(Q0).Q, Q0, atol=1e-14)
    res = cholesky_qr2(svd_conditioned(2048, 64, 1e5, seed=0))
    assert orthogonality(res.Q) <= 6 * (2048 * 64 * u + 64 * 65 * u)
    with pytest.raises(BreakdownError):
        cholesky_qr2(svd_conditioned(2048, 64, 1e12, seed=0))


def test_fixed_shift_diagonal_arithmetic():
    res = shifted_cholesky_qr(np.eye(3), ShiftStrategy(ShiftKind.FIXED, 0.01))
    np.testing.assert_allclose(res.R, math.sqrt(1.01) * np.eye(3), rtol=1e-15)
    np.testing.assert_allclose(res.Q, np.eye(3) / math.sqrt(1.01), rtol=1e-15)


def test_no_shift_equals_plain_cholesky_qr():
    X = svd_conditioned(100, 8, 1e3, seed=2)
    np.testing.assert_array_equal(shifted_cholesky_qr(X, NO_SHIFT).Q, cholesky_qr(X).Q)


def test_scqr3_stages_and_factors(x12):
    res = shifted_cholesky_qr3(x12, IMPROVED_COLUMN)
    assert res.stages_completed == 3 and res.algorithm == "iscqr3"
    assert np.all(np.tril(res.R, -1) == 0)
    orth = [orthogonality(Q) for Q in res.stage_q]
    assert orth[0] > orth[1] > orth[2]
    assert orth[2] <= 1e-13
    assert res.shift_info.s == shift_improved(x12).s


def test_scqr3_breakdown_carries_stage_and_shift():
    X = svd_conditioned(2048, 64, 1e14, seed=0)
    with pytest.raises(BreakdownError) as info:
        shifted_cholesky_qr3(X, ORIGINAL_SPECTRAL)
    err = info.value
    assert err.stage is Stage.SECOND_CHOLESKY
    assert err.stages_completed == 1
    assert err.shift_info is not None and err.shift_info.strategy == ORIGINAL_SPECTRAL


def test_iscqr3_scale_equivariant(x12):
    a = shifted_cholesky_qr3(x12)
    b = shifted_cholesky_qr3(4.0 * x12)
    np.testing.assert_array_equal(a.Q, b.Q)
    np.testing.assert_array_equal(4.0 * a.R, b.R)


def test_wide_matrix_rejected():
    with pytest.raises(DimensionMismatch):
        cholesky_qr(np.ones((2, 3)))


def test_dispatch():
    res = algo_dispatch("hhqr", np.eye(4))
    np.testing.assert_array_equal(res.Q, np.eye(4))
    X = svd_conditioned(200, 10, 1e8, seed=5)
    direct = shifted_cholesky_qr3(X, IMPROVED_COLUMN)
    via = algo_dispatch("iscqr3", X)
    assert np.array_equal(direct.Q, via.Q) and np.array_equal(direct.R, via.R)
    assert algo_dispatch("scqr3", X).shift_info.strategy == ORIGINAL_SPECTRAL
    with pytest.raises(UnknownAlgorithm):
        algo_dispatch("xyz", X)


@pytest.mark.parametrize("name", ALGORITHMS)
def test_every_algorithm_factors_well_conditioned_input(name):
    X = svd_conditioned(300, 12, 1e3, seed=8)
    res = algo_dispatch(name, X)
    assert np.linalg.norm(res.Q @ res.R - X) <= 1e-13
    # One unshifted pass loses orthogonality like kappa**2 * u.
    limit = 1e-9 if name == "cholqr" else 1e-12
    assert orthogonality(res.Q) <= limit
