"""Reproducible test matrices and Matrix Market I/O.

Random inputs are drawn from a PCG64 bit stream (its raw output is stable
across numpy releases) and mapped to uniform [0, 1) doubles or, through
the Box-Muller transform implemented here, to standard normals, so a given
seed always yields the same matrix on a given platform.

Two ensembles of random orthogonal factors are available.  ``"normal"``
(QR of a Gaussian matrix) is Haar distributed.  ``"uniform"`` (QR of a
matrix with uniform [0, 1) entries) is not: its leading column leans
towards the all-ones direction, which lowers [X]_g / ||X||_2 for
``svd_conditioned`` matrices to about 0.25 at n = 64 (Haar gives about 0.33).
``svd_conditioned`` uses ``"uniform"`` by default; the benchmark suite
targets that p regime.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError
from .kernels import householder_qr
from .matrix import as_dense

__all__ = [
    "uniform",
    "standard_normal",
    "random_orthogonal",
    "svd_conditioned",
    "planted_singular_values",
    "hilbert",
    "arrowhead",
    "MatrixSpec",
    "realize",
    "read_matrix_market",
    "write_matrix_market",
]

_TWO_PI = 2.0 * math.pi


ENSEMBLES = ("normal", "uniform")


def uniform(count: int, seed: int) -> np.ndarray:
    """``count`` doubles in [0, 1) from the top 53 bits of PCG64(seed)."""
    raw = np.random.PCG64(seed).random_raw(count)
    return (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53


def standard_normal(count: int, seed: int) -> np.ndarray:
    """``count`` standard normal variates from PCG64(seed) via Box-Muller."""
    pairs = (count + 1) // 2
    u = uniform(2 * pairs, seed)
    u1 = 1.0 - u[0::2]  # (0, 1]
    u2 = u[1::2]
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.empty(2 * pairs)
    z[0::2] = r * np.cos(_TWO_PI * u2)
    z[1::2] = r * np.sin(_TWO_PI * u2)
    return z[:count]


def random_orthogonal(
    dim: int, seed: int, ncols: int | None = None, ensemble: str = "normal"
) -> np.ndarray:
    """Random orthogonal matrix (or its leading ``ncols`` columns).

    A random matrix (Gaussian or uniform entries, see ``ensemble``) is
    filled column by column from the seeded stream and factored by
    Householder QR with ``diag(R) >= 0``.  Asking for fewer columns factors
    only the leading columns of the same random matrix, so the result agrees
    with the leading columns of the full factor up to rounding.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    ncols = dim if ncols is None else ncols
    if not 1 <= ncols <= dim:
        raise ValueError(f"ncols must lie in [1, {dim}]")
    if ensemble == "normal":
        G = standard_normal(dim * ncols, seed)
    elif ensemble == "uniform":
        G = uniform(dim * ncols, seed)
    else:
        raise ValueError(f"unknown ensemble {ensemble!r}; expected one of {ENSEMBLES}")
    G = G.reshape((dim, ncols), order="F")
    return householder_qr(G).Q


def planted_singular_values(n: int, kappa: float) -> np.ndarray:
    """Geometric spectrum ``sigma**(k/(n-1))``, ``k = 0..n-1``, with ``sigma = 1/kappa``."""
    sigma = 1.0 / kappa
    return sigma ** (np.arange(n) / (n - 1))


def svd_conditioned(
    m: int, n: int, kappa: float, seed: int, ensemble: str = "uniform"
) -> np.ndarray:
    """``U diag(s) V^T`` with unit 2-norm and condition number ``kappa``.

    ``U`` is the first ``n`` columns of ``random_orthogonal(m, seed)`` and
    ``V`` is ``random_orthogonal(n, seed + 1)``, both from ``ensemble``.
    """
    if not kappa >= 1.0:
        raise ValueError("kappa must be >= 1")
    if not m >= n >= 2:
        raise ValueError(f"need m >= n >= 2, got m={m}, n={n}")
    s = planted_singular_values(n, kappa)
    U = random_orthogonal(m, seed, ncols=n, ensemble=ensemble)
    V = random_orthogonal(n, seed + 1, ensemble=ensemble)
    return np.asfortranarray((U * s) @ V.T)


def hilbert(n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be >= 1")
    i = np.arange(1, n + 1)
    return np.asfortranarray(1.0 / (i[:, None] + i[None, :] - 1))


def arrowhead(n: int) -> np.ndarray:
    """Dense first row of 30s, 10 on the interior diagonal, 1e-16 in the corner."""
    if n < 3:
        raise ValueError("n must be >= 3")
    X = np.zeros((n, n), order="F")
    X[0, :] = 30.0
    idx = np.arange(1, n - 1)
    X[idx, idx] = 10.0
    X[n - 1, n - 1] = 1e-16
    return X


KINDS = ("svd", "hilbert", "arrowhead", "file")


@dataclass(frozen=True)
class MatrixSpec:
    kind: str
    m: int | None = None
    n: int | None = None
    kappa: float | None = None
    seed: int = 0
    path: str | None = None
    ensemble: str = "uniform"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown matrix kind {self.kind!r}")
        if self.ensemble not in ENSEMBLES:
            raise ValueError(f"unknown ensemble {self.ensemble!r}")
        if self.kind == "svd":
            if self.m is None or self.n is None or self.kappa is None:
                raise ValueError("svd matrices need m, n and kappa")
            if not self.kappa >= 1.0:
                raise ValueError("kappa must be >= 1")
            if self.n < 2:
                raise ValueError("n must be >= 2")
            if self.m < self.n:
                raise ValueError("m must be >= n")
        elif self.kind in ("hilbert", "arrowhead"):
            if self.n is None:
                raise ValueError(f"{self.kind} matrices need n")
            if self.n < (3 if self.kind == "arrowhead" else 2):
                raise ValueError(f"n too small for {self.kind}")
        elif self.path is None:
            raise ValueError("file matrices need a path")

    def describe(self) -> str:
        if self.kind == "svd":
            return (
                f"svd m={self.m} n={self.n} kappa={self.kappa!r} seed={self.seed} "
                f"ensemble={self.ensemble}"
            )
        if self.kind == "file":
            return f"file path={self.path}"
        return f"{self.kind} n={self.n}"


@dataclass
class Realized:
    X: np.ndarray
    spec: MatrixSpec
    metadata: dict = field(default_factory=dict)


def realize(spec: MatrixSpec) -> Realized:
    """Build the matrix described by ``spec`` and attach planted metadata."""
    if spec.kind == "svd":
        X = svd_conditioned(spec.m, spec.n, spec.kappa, spec.seed, spec.ensemble)
        meta = {"planted_kappa": float(spec.kappa), "planted_sigma1": 1.0}
    elif spec.kind == "hilbert":
        X, meta = hilbert(spec.n), {}
    elif spec.kind == "arrowhead":
        X, meta = arrowhead(spec.n), {}
    else:
        X, meta = read_matrix_market(spec.path), {}
    return Realized(X, spec, meta)


# -- Matrix Market --------------------------------------------------------


def _parse_number(tok: str, lineno: int) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise ParseError(f"not a number: {tok!r}", lineno) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite value {tok!r}", lineno)
    return v


def _parse_int(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"not an integer: {tok!r}", lineno) from None


def read_matrix_market(path: str | os.PathLike) -> np.ndarray:
    """Read a real or integer Matrix Market file (array or coordinate).

    ``general`` and ``symmetric`` layouts are accepted.  Errors name the
    offending line.
    """
    path = Path(path)
    with path.open("r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty file", 1)
    header = lines[0].split()
    if len(header) != 5 or header[0].lower() != "%%matrixmarket" or header[1].lower() != "matrix":
        raise ParseError("missing '%%MatrixMarket matrix' banner", 1)
    fmt, field_, symm = (h.lower() for h in header[2:])
    if fmt not in ("array", "coordinate"):
        raise ParseError(f"unsupported format {fmt!r}", 1)
    if field_ not in ("real", "double", "integer"):
        raise ParseError(f"unsupported field {field_!r}", 1)
    if symm not in ("general", "symmetric"):
        raise ParseError(f"unsupported symmetry {symm!r}", 1)

    body = [
        (i + 1, ln.split())
        for i, ln in enumerate(lines)
        if i > 0 and ln.strip() and not ln.lstrip().startswith("%")
    ]
    if not body:
        raise ParseError("missing size line", len(lines))
    size_line, size_tok = body[0]
    entries = body[1:]

    if fmt == "array":
        if len(size_tok) != 2:
            raise ParseError("array size line must hold 'rows cols'", size_line)
        m, n = (_parse_int(t, size_line) for t in size_tok)
        if m < 1 or n < 1:
            raise ParseError("dimensions must be positive", size_line)
        if symm == "symmetric":
            if m != n:
                raise ParseError("symmetric matrix must be square", size_line)
            expected = n * (n + 1) // 2
        else:
            expected = m * n
        values = []
        for lineno, toks in entries:
            if len(toks) != 1:
                raise ParseError("expected one value per line", lineno)
            values.append(_parse_number(toks[0], lineno))
        if len(values) != expected:
            last = entries[-1][0] if entries else size_line
            raise ParseError(
                f"truncated payload: expected {expected} values, found {len(values)}", last
            )
        if symm == "general":
            return np.asfortranarray(np.array(values).reshape((m, n), order="F"))
        X = np.zeros((n, n), order="F")
        k = 0
        for j in range(n):
            for i in range(j, n):
                X[i, j] = X[j, i] = values[k]
                k += 1
        return X

    if len(size_tok) != 3:
        raise ParseError("coordinate size line must hold 'rows cols nnz'", size_line)
    m, n, nnz = (_parse_int(t, size_line) for t in size_tok)
    if m < 1 or n < 1 or nnz < 0:
        raise ParseError("invalid coordinate sizes", size_line)
    X = np.zeros((m, n), order="F")
    for lineno, toks in entries:
        if len(toks) != 3:
            raise ParseError("expected 'row col value'", lineno)
        i, j = _parse_int(toks[0], lineno), _parse_int(toks[1], lineno)
        if not (1 <= i <= m and 1 <= j <= n):
            raise ParseError(f"index ({i}, {j}) out of range", lineno)
        v = _parse_number(toks[2], lineno)
        X[i - 1, j - 1] = v
        if symm == "symmetric":
            X[j - 1, i - 1] = v
    if len(entries) != nnz:
        last = entries[-1][0] if entries else size_line
        raise ParseError(f"truncated payload: expected {nnz} entries, found {len(entries)}", last)
    return X


def write_matrix_market(path: str | os.PathLike, X, comments: list[str] | tuple = ()) -> None:
    """Write ``X`` as a dense ``array real general`` file, round-trip exact."""
    X = as_dense(X)
    m, n = X.shape
    with Path(path).open("w", encoding="ascii") as fh:
        fh.write("%%MatrixMarket matrix array real general\n")
        for c in comments:
            fh.write(f"% {c}\n")
        fh.write(f"{m} {n}\n")
        for v in X.ravel(order="F"):
            fh.write(f"{float(v)!r}\n")
