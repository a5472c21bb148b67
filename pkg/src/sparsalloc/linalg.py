"""Dense real-matrix kernels: product, Frobenius norm, smallest non-zero
singular value.

Matrices are immutable-by-convention flat row-major float64 buffers. All
operations are pure functions, so values are safe to share across threads.

Singular values are computed from the eigenvalues of the smaller Gram matrix
(M M^T or M^T M) with a cyclic Jacobi iteration. That keeps the package free
of numeric dependencies and is accurate to ~1e-14 relative on the
desk-scale sizes (<= 512) this package targets. Singular values below
``RANK_TOL_FACTOR`` times the largest one are treated as zero when selecting
the smallest non-zero singular value.
"""

from __future__ import annotations

import math
from array import array
from typing import Iterable, Sequence

from sparsalloc import _kernels
from sparsalloc.errors import DomainError, ShapeError

RANK_TOL_FACTOR = 1e-10


class DenseMatrix:
    """A rows x cols real matrix stored row-major in an ``array('d')``.

    The constructor takes ownership of ``data``; treat instances as
    immutable after construction.
    """

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data: array | None = None):
        if rows < 1 or cols < 1:
            raise ShapeError(f"matrix dimensions must be positive, got {rows}x{cols}")
        if data is None:
            data = array("d", bytes(8 * rows * cols))
        elif len(data) != rows * cols:
            raise ShapeError(
                f"buffer of length {len(data)} does not match shape {rows}x{cols}"
            )
        self.rows = rows
        self.cols = cols
        self.data = data

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "DenseMatrix":
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> "DenseMatrix":
        out = cls(n, n)
        for i in range(n):
            out.data[i * n + i] = 1.0
        return out

    @classmethod
    def from_rows(cls, rows: Sequence[Iterable[float]]) -> "DenseMatrix":
        converted = [[float(v) for v in row] for row in rows]
        if not converted or not converted[0]:
            raise ShapeError("matrix must have at least one row and one column")
        width = len(converted[0])
        flat = array("d")
        for row in converted:
            if len(row) != width:
                raise ShapeError("inconsistent row widths")
            flat.extend(row)
        for v in flat:
            if not math.isfinite(v):
                raise DomainError("matrix entries must be finite")
        return cls(len(converted), width, flat)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def numel(self) -> int:
        return self.rows * self.cols

    def entry(self, i: int, j: int) -> float:
        return self.data[i * self.cols + j]

    def to_rows(self) -> list[list[float]]:
        c = self.cols
        return [list(self.data[i * c : (i + 1) * c]) for i in range(self.rows)]

    def copy(self) -> "DenseMatrix":
        return DenseMatrix(self.rows, self.cols, array("d", self.data))

    def transpose(self) -> "DenseMatrix":
        r, c = self.rows, self.cols
        out = array("d", bytes(8 * r * c))
        for i in range(r):
            base = i * c
            for j in range(c):
                out[j * r + i] = self.data[base + j]
        return DenseMatrix(c, r, out)

    def scale(self, alpha: float) -> "DenseMatrix":
        return DenseMatrix(
            self.rows, self.cols, array("d", (alpha * v for v in self.data))
        )

    def is_zero(self) -> bool:
        return all(v == 0.0 for v in self.data)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DenseMatrix):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and self.data.tobytes() == other.data.tobytes()
        )

    def __hash__(self):  # pragma: no cover - matrices are not meant to be keys
        return hash((self.rows, self.cols, self.data.tobytes()))

    def __repr__(self) -> str:
        return f"DenseMatrix({self.rows}x{self.cols})"


def matmul(a: DenseMatrix, b: DenseMatrix) -> DenseMatrix:
    """Standard matrix product; raises ShapeError on inner-dimension mismatch."""
    if a.cols != b.rows:
        raise ShapeError(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    out = _kernels.matmul(a.data, a.rows, a.cols, b.data, b.cols)
    return DenseMatrix(a.rows, b.cols, out)


def frob_norm_sq(m: DenseMatrix) -> float:
    """Sum of squared entries (squared Frobenius norm)."""
    return _kernels.frob_norm_sq(m.data)


def frob_norm(m: DenseMatrix) -> float:
    return math.sqrt(frob_norm_sq(m))


def _gram_small(m: DenseMatrix) -> tuple[array, int]:
    """Gram matrix over the smaller dimension: M M^T if rows <= cols else M^T M."""
    t = m.transpose()
    if m.rows <= m.cols:
        return _kernels.matmul(m.data, m.rows, m.cols, t.data, t.cols), m.rows
    return _kernels.matmul(t.data, t.rows, t.cols, m.data, m.cols), m.cols


def singular_values(m: DenseMatrix) -> list[float]:
    """All min(rows, cols) singular values, ascending."""
    gram, n = _gram_small(m)
    eig = _kernels.sym_eigvals(gram, n)
    return [math.sqrt(v) if v > 0.0 else 0.0 for v in eig]


def sigma_min(m: DenseMatrix) -> float:
    """Smallest non-zero singular value.

    Values below RANK_TOL_FACTOR times the largest singular value count as
    zero. Raises DomainError for an all-zero matrix, which has no non-zero
    singular value.
    """
    if m.is_zero():
        raise DomainError("sigma_min is undefined for an all-zero matrix")
    svals = singular_values(m)
    tau = RANK_TOL_FACTOR * svals[-1]
    for v in svals:
        if v > tau:
            return v
    raise DomainError("no singular value above the rank tolerance")


def lemma1_gap(a: DenseMatrix, b: DenseMatrix) -> tuple[float, float]:
    """Both sides of the product lower bound
    ||AB||_F^2 >= sigma_min(A)^2 ||B||_F^2.

    Returns (lhs, rhs). The inequality is guaranteed for full-column-rank
    ``a``; for rank-deficient ``a`` it can fail when ``b`` overlaps the null
    space, so callers should report rather than assert in that case.
    """
    lhs = frob_norm_sq(matmul(a, b))
    rhs = sigma_min(a) ** 2 * frob_norm_sq(b)
    return lhs, rhs
