"""Dense tensors under the Einstein product.

A tensor in ``C^{(I_1 x ... x I_N) x (J_1 x ... x J_M)}`` is stored as its
unfolding: the ``|I| x |J|`` complex matrix whose entry
``(ivec(i, I), ivec(j, J))`` is the tensor entry ``(i, j)``.  ``ivec`` runs
the first index fastest, so ``unfold`` is a zero-copy view and every
spectral quantity is computed on that matrix.

Indices in the public helpers :func:`ivec` and :meth:`DenseTensor.entry`
are 1-based, as in the usual mathematical notation.  The natural ndarray
returned by :meth:`DenseTensor.to_array` is 0-based numpy indexing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from . import numerics
from .errors import RangeError, RankError, ShapeError

__all__ = [
    "Shape",
    "DenseTensor",
    "EigenSet",
    "ivec",
    "unfold",
    "fold",
    "einstein_product",
    "conj_transpose",
    "scalar_mul",
    "add",
    "zeros",
    "identity",
    "diagonal",
    "diagonal_entries",
    "is_diagonal",
    "coordinate",
    "inverse",
    "eigenvalues",
    "determinant",
    "rank",
    "frobenius_inner",
    "frobenius_norm",
    "qr",
    "polar",
    "DEFAULT_RANK_TOL",
]

#: Relative singular-value cutoff used by :func:`rank`.
DEFAULT_RANK_TOL = 1e-10

_INT64_MAX = 2**63 - 1


def _dims(dims, allow_empty=False) -> Tuple[int, ...]:
    if isinstance(dims, (int, np.integer)):
        dims = (dims,)
    out = tuple(int(d) for d in dims)
    if not out and not allow_empty:
        raise ShapeError("dimension tuple must be non-empty")
    if any(d < 1 for d in out):
        raise ShapeError(f"dimensions must be positive, got {out}")
    return out


@dataclass(frozen=True)
class Shape:
    """Row and column dimension tuples of a tensor.

    ``col_dims`` may be empty, which encodes a tensor with no column modes
    (an element of ``C^{I_1 x ... x I_N}``).
    """

    row_dims: Tuple[int, ...]
    col_dims: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "row_dims", _dims(self.row_dims))
        object.__setattr__(self, "col_dims", _dims(self.col_dims, allow_empty=True))
        if self.rows * self.cols > _INT64_MAX:
            raise ShapeError("tensor size does not fit in a 64-bit integer")

    @property
    def rows(self) -> int:
        return math.prod(self.row_dims)

    @property
    def cols(self) -> int:
        return math.prod(self.col_dims)

    def even_square(self) -> bool:
        return self.row_dims == self.col_dims

    def __str__(self):
        rows = "x".join(map(str, self.row_dims))
        cols = "x".join(map(str, self.col_dims)) or "-"
        return f"({rows})x({cols})"


def ivec(idx: Sequence[int], dims: Sequence[int]) -> int:
    """Linear position (1-based) of the multi-index ``idx`` in the box ``dims``.

    >>> ivec((2, 1), (2, 3))
    2
    >>> ivec((1, 2), (2, 3))
    3
    """
    dims = _dims(dims)
    idx = tuple(int(i) for i in idx)
    if len(idx) != len(dims):
        raise RangeError(f"index {idx} has wrong length for dimensions {dims}")
    pos, stride = 0, 1
    for i, d in zip(idx, dims):
        if not 1 <= i <= d:
            raise RangeError(f"index {idx} out of bounds for dimensions {dims}")
        pos += (i - 1) * stride
        stride *= d
    return pos + 1


class DenseTensor:
    """Complex dense tensor with explicit row and column dimension lists.

    Instances are immutable: the backing matrix is flagged read-only and
    every operation returns a new tensor.  ``A @ B`` is the Einstein
    product, ``A.H`` the conjugate transpose.
    """

    __slots__ = ("shape", "_mat")
    __array_priority__ = 1000

    def __init__(self, matrix, row_dims, col_dims=()):
        shape = Shape(row_dims, col_dims)
        mat = np.array(matrix, dtype=complex, copy=True)
        if mat.ndim == 1 and mat.size == shape.rows * shape.cols:
            mat = mat.reshape(shape.rows, shape.cols)
        if mat.shape != (shape.rows, shape.cols):
            raise ShapeError(
                f"matrix of shape {mat.shape} cannot hold a {shape} tensor "
                f"(needs {(shape.rows, shape.cols)})"
            )
        mat.flags.writeable = False
        self.shape = shape
        self._mat = mat

    # -- construction -----------------------------------------------------
    @classmethod
    def from_array(cls, array, n_row_modes: int) -> "DenseTensor":
        """Build from a natural ndarray indexed ``[i_1, ..., i_N, j_1, ..., j_M]``."""
        array = np.asarray(array, dtype=complex)
        row_dims = array.shape[:n_row_modes]
        col_dims = array.shape[n_row_modes:]
        mat = array.reshape(math.prod(row_dims), math.prod(col_dims), order="F")
        return cls(mat, row_dims, col_dims)

    # -- views --------------------------------------------------------------
    @property
    def row_dims(self) -> Tuple[int, ...]:
        return self.shape.row_dims

    @property
    def col_dims(self) -> Tuple[int, ...]:
        return self.shape.col_dims

    @property
    def matrix(self) -> np.ndarray:
        """Read-only unfolding (``|I| x |J|``)."""
        return self._mat

    def to_array(self) -> np.ndarray:
        """Natural ndarray indexed ``[i_1, ..., i_N, j_1, ..., j_M]`` (0-based)."""
        return self._mat.reshape(self.row_dims + self.col_dims, order="F")

    def entries(self) -> np.ndarray:
        """Flat entries in ivec-major layout (row index outer, column inner)."""
        return self._mat.ravel()

    def entry(self, i: Sequence[int], j: Sequence[int] = ()) -> complex:
        r = ivec(i, self.row_dims) - 1
        c = ivec(j, self.col_dims) - 1 if self.col_dims else 0
        return complex(self._mat[r, c])

    def even_square(self) -> bool:
        return self.shape.even_square()

    # -- algebra ------------------------------------------------------------
    @property
    def H(self) -> "DenseTensor":
        return conj_transpose(self)

    @property
    def T(self) -> "DenseTensor":
        """Transpose without conjugation (swaps row and column modes)."""
        if not self.col_dims:
            raise ShapeError("transpose needs at least one column mode")
        return DenseTensor(self._mat.T, self.col_dims, self.row_dims)

    def __matmul__(self, other):
        if not isinstance(other, DenseTensor):
            return NotImplemented
        return einstein_product(self, other)

    def __add__(self, other):
        if not isinstance(other, DenseTensor):
            return NotImplemented
        return add(self, other)

    def __sub__(self, other):
        if not isinstance(other, DenseTensor):
            return NotImplemented
        return add(self, scalar_mul(-1.0, other))

    def __neg__(self):
        return scalar_mul(-1.0, self)

    def __mul__(self, c):
        if isinstance(c, DenseTensor) or not np.isscalar(c):
            return NotImplemented
        return scalar_mul(c, self)

    __rmul__ = __mul__

    def __truediv__(self, c):
        if isinstance(c, DenseTensor) or not np.isscalar(c):
            return NotImplemented
        return scalar_mul(1.0 / c, self)

    def __repr__(self):
        return f"DenseTensor(shape={self.shape})"


class EigenSet(NamedTuple):
    values: np.ndarray
    vectors: Optional[List[DenseTensor]] = None


def _require_square(A: DenseTensor, what="operation"):
    if not A.even_square():
        raise ShapeError(f"{what} needs an even-order square tensor, got {A.shape}")


def unfold(T: DenseTensor) -> np.ndarray:
    """The ``|I| x |J|`` matrix of ``T`` (a read-only view)."""
    return T.matrix


def fold(matrix, shape) -> DenseTensor:
    """Inverse of :func:`unfold`; ``shape`` is a :class:`Shape` or ``(rows, cols)``."""
    if not isinstance(shape, Shape):
        shape = Shape(*shape)
    matrix = np.asarray(matrix)
    if matrix.shape != (shape.rows, shape.cols):
        raise ShapeError(f"cannot fold a {matrix.shape} matrix into {shape}")
    return DenseTensor(matrix, shape.row_dims, shape.col_dims)


def einstein_product(A: DenseTensor, B: DenseTensor) -> DenseTensor:
    """Contract the column modes of ``A`` with the row modes of ``B``."""
    if A.col_dims != B.row_dims:
        raise ShapeError(
            f"Einstein product needs A.col_dims == B.row_dims, got "
            f"{A.col_dims} and {B.row_dims}"
        )
    nr, nc = len(A.row_dims), len(A.col_dims)
    a = A.to_array()
    b = B.to_array()
    out = np.tensordot(a, b, axes=(list(range(nr, nr + nc)), list(range(nc))))
    return DenseTensor.from_array(out, nr)


def conj_transpose(A: DenseTensor) -> DenseTensor:
    if not A.col_dims:
        # a vector tensor X maps to the 1 x |I| "no rows" tensor X^H
        return DenseTensor(A.matrix.conj().T, (1,), A.row_dims)
    return DenseTensor(A.matrix.conj().T, A.col_dims, A.row_dims)


def scalar_mul(c, A: DenseTensor) -> DenseTensor:
    return DenseTensor(complex(c) * A.matrix, A.row_dims, A.col_dims)


def add(A: DenseTensor, B: DenseTensor) -> DenseTensor:
    if A.shape != B.shape:
        raise ShapeError(f"cannot add tensors of shapes {A.shape} and {B.shape}")
    return DenseTensor(A.matrix + B.matrix, A.row_dims, A.col_dims)


def zeros(row_dims, col_dims=None) -> DenseTensor:
    shape = Shape(row_dims, row_dims if col_dims is None else col_dims)
    return DenseTensor(np.zeros((shape.rows, shape.cols)), shape.row_dims, shape.col_dims)


def identity(dims) -> DenseTensor:
    dims = _dims(dims)
    n = math.prod(dims)
    return DenseTensor(np.eye(n), dims, dims)


def diagonal(dims, values) -> DenseTensor:
    """Diagonal tensor whose diagonal entries, in ivec order, are ``values``."""
    dims = _dims(dims)
    values = np.asarray(values, dtype=complex).ravel()
    if values.size != math.prod(dims):
        raise ShapeError(f"need {math.prod(dims)} diagonal values, got {values.size}")
    return DenseTensor(np.diag(values), dims, dims)


def diagonal_entries(A: DenseTensor) -> np.ndarray:
    """The multiset ``P(D)`` of diagonal entries, in ivec order."""
    _require_square(A, "diagonal_entries")
    return np.diag(A.matrix).copy()


def is_diagonal(A: DenseTensor, tol=0.0) -> bool:
    if not A.even_square():
        return False
    M = A.matrix
    off = M - np.diag(np.diag(M))
    return bool(np.abs(off).max(initial=0.0) <= tol)


def coordinate(dims, index: Sequence[int]) -> DenseTensor:
    """Unit tensor in ``C^{I_1 x ... x I_N}`` with a one at ``index`` (1-based)."""
    dims = _dims(dims)
    v = np.zeros(math.prod(dims), dtype=complex)
    v[ivec(index, dims) - 1] = 1.0
    return DenseTensor(v[:, None], dims, ())


def inverse(A: DenseTensor, max_condition=numerics.MAX_CONDITION) -> DenseTensor:
    """Einstein-product inverse; refuses condition estimates above ``max_condition``."""
    _require_square(A, "inverse")
    n = A.shape.rows
    inv = numerics.solve(A.matrix, np.eye(n), max_condition=max_condition)
    return DenseTensor(inv, A.row_dims, A.col_dims)


def eigenvalues(A: DenseTensor, want_vectors=False) -> EigenSet:
    """Eigenvalues of ``A`` with multiplicity (those of its unfolding).

    With ``want_vectors`` each eigenvector is folded back into a unit tensor
    ``X`` with ``||A * X - lambda X||_F <= 1e-8 ||A||_F``.
    """
    _require_square(A, "eigenvalues")
    if not want_vectors:
        return EigenSet(numerics.general_eig(A.matrix), None)
    w, V = numerics.general_eig(A.matrix, want_vectors=True)
    vecs = [DenseTensor(V[:, [k]], A.row_dims, ()) for k in range(V.shape[1])]
    return EigenSet(w, vecs)


def determinant(A: DenseTensor) -> complex:
    """Product of the eigenvalues."""
    return complex(np.prod(eigenvalues(A).values))


def rank(A: DenseTensor, tol=DEFAULT_RANK_TOL) -> int:
    """Number of eigenvalues of ``A^H * A`` above ``tol**2`` times the largest."""
    s = np.linalg.svd(A.matrix, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def frobenius_inner(X: DenseTensor, Y: DenseTensor) -> complex:
    """``<X, Y> = Y^H * X`` summed over all modes."""
    if X.shape != Y.shape:
        raise ShapeError(f"inner product of shapes {X.shape} and {Y.shape}")
    return complex(np.vdot(Y.matrix, X.matrix))


def frobenius_norm(X: DenseTensor) -> float:
    return float(np.linalg.norm(X.matrix))


def _full_column_rank(A: DenseTensor, what):
    if A.shape.cols > A.shape.rows:
        raise ShapeError(f"{what} needs |J| <= |I|, got {A.shape}")
    if rank(A) < A.shape.cols:
        raise RankError(f"{what} needs a tensor of full column rank")


def qr(A: DenseTensor):
    """``A = Q * R`` with column-orthogonal ``Q`` and upper-triangular ``R``.

    The diagonal of ``unfold(R)`` is real and nonnegative.
    """
    _full_column_rank(A, "qr")
    Qm, Rm = np.linalg.qr(A.matrix, mode="reduced")
    d = np.diag(Rm)
    phase = np.where(np.abs(d) > 0, d / np.where(d == 0, 1, np.abs(d)), 1.0)
    Qm = Qm * phase
    Rm = phase.conj()[:, None] * Rm
    cols = A.col_dims or (1,)
    Q = DenseTensor(Qm, A.row_dims, A.col_dims)
    R = DenseTensor(Rm, cols, A.col_dims)
    return Q, R


def polar(X: DenseTensor):
    """``X = U * P`` with ``U^H U = I`` and ``P = (X^H X)^{1/2}``."""
    _full_column_rank(X, "polar")
    G = X.matrix.conj().T @ X.matrix
    P = numerics.hermitian_power(G, 0.5)
    P_inv = numerics.hermitian_power(G, -0.5)
    cols = X.col_dims or (1,)
    U = DenseTensor(X.matrix @ P_inv, X.row_dims, X.col_dims)
    return U, DenseTensor(P, cols, X.col_dims or (1,))
