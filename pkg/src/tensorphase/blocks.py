"""n-mode block tensors and the permutations relating them to block matrices.

``[A B]_n`` stacks column mode ``n``; ``[A; B]_n`` stacks row mode ``n``.
Unfolding a 2 x 2 block tensor does not give the 2 x 2 block matrix of
unfoldings directly, but a symmetric row/column permutation of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import block_diag

from .errors import ShapeError
from .tensor import DenseTensor, _dims

__all__ = [
    "PermutationMap",
    "block_row",
    "block_col",
    "block_2x2",
    "perfect_shuffle",
    "block_unfold_permutation",
    "block_embedding_permutation",
    "block_diag_matrix",
]


@dataclass(frozen=True)
class PermutationMap:
    """Permutation of ``[0, size)`` acting as ``(P z)[k] = z[image[k]]``.

    ``image`` is stored 0-based; :meth:`one_based` gives the usual listing.
    """

    image: np.ndarray

    def __post_init__(self):
        img = np.asarray(self.image, dtype=np.int64).copy()
        if img.ndim != 1 or not np.array_equal(np.sort(img), np.arange(img.size)):
            raise ValueError("image is not a permutation")
        img.flags.writeable = False
        object.__setattr__(self, "image", img)

    @property
    def size(self) -> int:
        return int(self.image.size)

    def one_based(self):
        return [int(i) + 1 for i in self.image]

    def matrix(self) -> np.ndarray:
        """The 0/1 matrix ``P`` with ``P @ z == self.apply(z)``."""
        return np.eye(self.size, dtype=np.int64)[self.image]

    def apply(self, z):
        return np.asarray(z)[self.image]

    def inverse(self) -> "PermutationMap":
        inv = np.empty_like(self.image)
        inv[self.image] = np.arange(self.size)
        return PermutationMap(inv)

    def compose(self, other: "PermutationMap") -> "PermutationMap":
        """``self * other``: apply ``other`` first."""
        if other.size != self.size:
            raise ShapeError("permutation sizes differ")
        return PermutationMap(other.image[self.image])

    def conjugate(self, M):
        """``P M P^T`` without forming ``P``."""
        M = np.asarray(M)
        return M[np.ix_(self.image, self.image)]

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.image, np.arange(self.size)))


def _check_mode(n, order):
    if not 1 <= n <= order:
        raise ShapeError(f"mode {n} outside [1, {order}]")


def _concat(A: DenseTensor, B: DenseTensor, axis: int, row_dims, col_dims):
    arr = np.concatenate([A.to_array(), B.to_array()], axis=axis)
    return DenseTensor.from_array(arr, len(row_dims))


def block_row(A: DenseTensor, B: DenseTensor, n: int) -> DenseTensor:
    """``[A B]_n``: concatenate along column mode ``n`` (1-based)."""
    if A.row_dims != B.row_dims or len(A.col_dims) != len(B.col_dims):
        raise ShapeError(f"row block operands {A.shape} and {B.shape} do not match")
    _check_mode(n, len(A.col_dims))
    others_a = A.col_dims[: n - 1] + A.col_dims[n:]
    others_b = B.col_dims[: n - 1] + B.col_dims[n:]
    if others_a != others_b:
        raise ShapeError(f"column modes other than {n} must agree: {A.shape} vs {B.shape}")
    cols = list(A.col_dims)
    cols[n - 1] += B.col_dims[n - 1]
    return _concat(A, B, len(A.row_dims) + n - 1, A.row_dims, tuple(cols))


def block_col(A: DenseTensor, C: DenseTensor, n: int) -> DenseTensor:
    """``[A; C]_n``: concatenate along row mode ``n`` (1-based)."""
    if A.col_dims != C.col_dims or len(A.row_dims) != len(C.row_dims):
        raise ShapeError(f"column block operands {A.shape} and {C.shape} do not match")
    _check_mode(n, len(A.row_dims))
    if A.row_dims[: n - 1] + A.row_dims[n:] != C.row_dims[: n - 1] + C.row_dims[n:]:
        raise ShapeError(f"row modes other than {n} must agree: {A.shape} vs {C.shape}")
    rows = list(A.row_dims)
    rows[n - 1] += C.row_dims[n - 1]
    return _concat(A, C, n - 1, tuple(rows), A.col_dims)


def block_2x2(A, B, C, D, n: int) -> DenseTensor:
    """``[A B; C D]_n = [[A B]_n; [C D]_n]_n``."""
    return block_col(block_row(A, B, n), block_row(C, D, n), n)


def perfect_shuffle(q: int, r: int) -> PermutationMap:
    """``Pi_{q,r}``: lists ``z[0::r]``, then ``z[1::r]``, ..., then ``z[r-1::r]``.

    >>> perfect_shuffle(2, 2).one_based()
    [1, 3, 2, 4]
    """
    q, r = int(q), int(r)
    if q < 1 or r < 1:
        raise ShapeError("perfect shuffle needs q, r >= 1")
    s = q * r
    return PermutationMap(np.concatenate([np.arange(j, s, r) for j in range(r)]))


def _kron_factor(left: int, perm: PermutationMap, right: int) -> PermutationMap:
    """Index map of ``I_left (x) P (x) I_right`` (``right`` is the fast factor)."""
    m = perm.size
    outer = np.arange(left)[:, None, None] * (m * right)
    mid = perm.image[None, :, None] * right
    inner = np.arange(right)[None, None, :]
    return PermutationMap((outer + mid + inner).ravel())


def block_unfold_permutation(dims: Sequence[int], n: int) -> PermutationMap:
    """Permutation ``P`` with ``unfold([A B; C D]_n) = P [unfold A, unfold B; unfold C, unfold D] P^T``.

    Assembled from the Kronecker factors ``Q_k = I (x) Pi_{I_k,2} (x) I``
    for ``k > n``.  Their product ``Q_N ... Q_1`` carries the unfolded
    block-tensor ordering to block-matrix ordering, so ``P`` is its
    transpose.
    """
    dims = _dims(dims)
    N = len(dims)
    _check_mode(n, N)
    total = 2 * math.prod(dims)
    prod = PermutationMap(np.arange(total))
    for k in range(n + 1, N + 1):
        Q = _kron_factor(math.prod(dims[k:]), perfect_shuffle(dims[k - 1], 2),
                         math.prod(dims[: k - 1]))
        prod = Q.compose(prod)
    return prod.inverse()


def block_embedding_permutation(dims: Sequence[int], n: int, sizes: Sequence[int]) -> PermutationMap:
    """Permutation for a block-diagonal layout with unequal mode-``n`` splits.

    ``dims`` are the full dimensions and ``sizes`` split ``dims[n-1]`` into
    consecutive parts.  Returns ``P`` such that a tensor whose mode-``n``
    blocks are ``X_1, X_2, ...`` has ``unfold = P blkdiag(unfold X_1, ...) P^T``
    (likewise for the off-diagonal blocks).
    """
    dims = _dims(dims)
    _check_mode(n, len(dims))
    sizes = [int(s) for s in sizes]
    if any(s < 0 for s in sizes) or sum(sizes) != dims[n - 1]:
        raise ShapeError(f"block sizes {sizes} do not split mode size {dims[n - 1]}")
    # every tensor position, as a multi-index with the first mode fastest
    grids = np.meshgrid(*[np.arange(d) for d in dims], indexing="ij")
    idx = [g.ravel(order="F") for g in grids]
    i_n = idx[n - 1]
    bounds = np.cumsum([0] + sizes)
    block = np.searchsorted(bounds, i_n, side="right") - 1
    image = np.empty(i_n.size, dtype=np.int64)
    offset = 0
    for b, size in enumerate(sizes):
        sub = list(dims)
        sub[n - 1] = size
        sel = block == b
        lin = np.zeros(int(sel.sum()), dtype=np.int64)
        stride = 1
        for k, d in enumerate(sub):
            ik = idx[k][sel] - (bounds[b] if k == n - 1 else 0)
            lin += ik * stride
            stride *= d
        image[sel] = offset + lin
        offset += math.prod(sub)
    return PermutationMap(image)


def block_diag_matrix(*blocks) -> np.ndarray:
    """Dense block-diagonal matrix of the given square blocks."""
    return block_diag(*[np.asarray(b, dtype=complex) for b in blocks])
