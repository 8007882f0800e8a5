import math

import numpy as np
import pytest

from qrkit import MatrixSpec, ParseError, g_measure, read_matrix_market, realize, write_matrix_market
from qrkit.testmat import (
    arrowhead,
    hilbert,
    planted_singular_values,
    random_orthogonal,
    standard_normal,
    svd_conditioned,
    uniform,
)


def test_streams_are_deterministic():
    assert np.array_equal(uniform(100, 3), uniform(100, 3))
    assert not np.array_equal(uniform(100, 3), uniform(100, 4))
    z = standard_normal(20001, 0)
    assert abs(z.mean()) < 0.03 and abs(z.std() - 1) < 0.03
    u = uniform(10000, 1)
    assert u.min() >= 0.0 and u.max() < 1.0


@pytest.mark.parametrize("ensemble", ["normal", "uniform"])
def test_random_orthogonal(ensemble):
    assert abs(random_orthogonal(1, 5, ensemble=ensemble)[0, 0]) == 1.0
    Q = random_orthogonal(256, 7, ensemble=ensemble)
    assert np.linalg.norm(Q.T @ Q - np.eye(256)) <= 1e-13
    assert np.array_equal(Q, random_orthogonal(256, 7, ensemble=ensemble))
    # Same leading columns up to the rounding of forming Q explicitly.
    np.testing.assert_allclose(random_orthogonal(256, 7, ncols=10, ensemble=ensemble), Q[:, :10], atol=1e-14)


def test_random_orthogonal_rejects_unknown_ensemble():
    with pytest.raises(ValueError):
        random_orthogonal(4, 0, ensemble="cauchy")


def test_planted_spectrum():
    s = planted_singular_values(5, 1e4)
    assert s[0] == 1.0 and s[-1] == pytest.approx(1e-4, rel=1e-14)
    np.testing.assert_array_equal(planted_singular_values(6, 1.0), np.ones(6))
    X = svd_conditioned(20, 6, 1.0, seed=0)
    np.testing.assert_allclose(X.T @ X, np.eye(6), atol=1e-14)


def test_hilbert():
    H = hilbert(3)
    np.testing.assert_array_equal(H, [[1, 1 / 2, 1 / 3], [1 / 2, 1 / 3, 1 / 4], [1 / 3, 1 / 4, 1 / 5]])
    H = hilbert(12)
    assert np.array_equal(H, H.T)


def test_arrowhead():
    np.testing.assert_array_equal(arrowhead(3), [[30, 30, 30], [0, 10, 0], [0, 0, 1e-16]])
    for n in (3, 8, 64):
        assert g_measure(arrowhead(n)).value == pytest.approx(math.sqrt(1000), rel=1e-15)


def test_spec_validation():
    with pytest.raises(ValueError):
        MatrixSpec("svd", m=4, n=8, kappa=10.0)
    with pytest.raises(ValueError):
        MatrixSpec("svd", m=8, n=4, kappa=0.5)
    with pytest.raises(ValueError):
        MatrixSpec("banded", n=4)
    with pytest.raises(ValueError):
        MatrixSpec("file")


def test_realize():
    np.testing.assert_array_equal(realize(MatrixSpec("hilbert", n=3)).X, hilbert(3))
    r = realize(MatrixSpec("svd", m=30, n=5, kappa=100.0, seed=2))
    assert r.metadata["planted_kappa"] == 100.0
    assert np.array_equal(r.X, svd_conditioned(30, 5, 100.0, 2))


def test_matrix_market_round_trip(tmp_path):
    X = svd_conditioned(17, 4, 1e9, seed=3)
    path = tmp_path / "x.mtx"
    write_matrix_market(path, X, comments=["round trip"])
    Y = read_matrix_market(path)
    assert np.array_equal(X, Y)
    assert np.array_equal(realize(MatrixSpec("file", path=str(path))).X, X)


def test_matrix_market_variants(tmp_path):
    p = tmp_path / "c.mtx"
    p.write_text("%%MatrixMarket matrix coordinate real symmetric\n% c\n2 2 2\n1 1 4\n2 1 2\n")
    np.testing.assert_array_equal(read_matrix_market(p), [[4, 2], [2, 0]])
    p.write_text("%%MatrixMarket matrix array integer general\n2 2\n1\n2\n3\n4\n")
    np.testing.assert_array_equal(read_matrix_market(p), [[1, 3], [2, 4]])


def test_matrix_market_truncated(tmp_path):
    p = tmp_path / "t.mtx"
    p.write_text("%%MatrixMarket matrix array real general\n2 2\n1.0\n2.0\n3.0\n")
    with pytest.raises(ParseError) as info:
        read_matrix_market(p)
    assert info.value.line == 5
    assert "line 5" in str(info.value)
    assert "truncated" in str(info.value)


@pytest.mark.parametrize(
    "text,line",
    [
        ("%%MatrixMarket matrix array complex general\n1 1\n1\n", 1),
        ("%%MatrixMarket matrix array real general\n1 1\nabc\n", 3),
        ("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n", 3),
        ("not a banner\n", 1),
    ],
)
def test_matrix_market_errors(tmp_path, text, line):
    p = tmp_path / "e.mtx"
    p.write_text(text)
    with pytest.raises(ParseError) as info:
        read_matrix_market(p)
    assert info.value.line == line
