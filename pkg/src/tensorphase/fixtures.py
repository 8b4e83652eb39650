"""Seeded fixture generators and the two worked example tensors.

All generators are deterministic given ``seed``.
"""

import math

import numpy as np
from scipy.stats import unitary_group

from .errors import DomainError, ShapeError
from .tensor import DenseTensor, Shape, _dims

__all__ = [
    "random_tensor",
    "random_column_orthogonal",
    "random_nonsingular",
    "random_sectorial",
    "sectorial_from_angles",
    "example1",
    "example2",
    "example2_sectorial_block",
    "example2_unitary",
]


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_tensor(shape, seed=None, real=False) -> DenseTensor:
    """Standard complex Gaussian entries (real Gaussian with ``real=True``)."""
    shape = shape if isinstance(shape, Shape) else Shape(*shape)
    rng = _rng(seed)
    m = rng.standard_normal((shape.rows, shape.cols))
    if not real:
        m = m + 1j * rng.standard_normal((shape.rows, shape.cols))
    return DenseTensor(m, shape.row_dims, shape.col_dims)


def random_column_orthogonal(shape, seed=None) -> DenseTensor:
    """Haar-distributed tensor ``U`` with ``U^H * U = I``."""
    shape = shape if isinstance(shape, Shape) else Shape(*shape)
    if shape.cols > shape.rows:
        raise ShapeError(f"column-orthogonal tensors need |J| <= |I|, got {shape}")
    rng = _rng(seed)
    U = unitary_group.rvs(shape.rows, random_state=rng) if shape.rows > 1 else np.ones((1, 1))
    return DenseTensor(U[:, : shape.cols], shape.row_dims, shape.col_dims)


def random_nonsingular(dims, seed=None, cond=16.0) -> DenseTensor:
    """``U diag(s) V^H`` with Haar ``U, V`` and log-uniform ``s``; condition <= ``cond``."""
    dims = _dims(dims)
    n = math.prod(dims)
    rng = _rng(seed)
    U = unitary_group.rvs(n, random_state=rng) if n > 1 else np.ones((1, 1))
    V = unitary_group.rvs(n, random_state=rng) if n > 1 else np.ones((1, 1))
    half = 0.5 * math.log(cond)
    s = np.exp(rng.uniform(-half, half, n))
    return DenseTensor((U * s) @ V.conj().T, dims, dims)


def sectorial_from_angles(dims, angles, seed=None, cond=16.0) -> DenseTensor:
    """``Q^H * D * Q`` with ``D = diag(exp(i angles))`` and random nonsingular ``Q``."""
    dims = _dims(dims)
    angles = np.asarray(angles, dtype=float).ravel()
    if angles.size != math.prod(dims):
        raise ShapeError(f"need {math.prod(dims)} angles, got {angles.size}")
    if angles.max() - angles.min() >= math.pi:
        raise DomainError("angles must span less than pi")
    Q = random_nonsingular(dims, seed, cond=cond).matrix
    M = Q.conj().T @ (np.exp(1j * angles)[:, None] * Q)
    return DenseTensor(M, dims, dims)


def random_sectorial(dims, phase_interval, seed=None, cond=16.0, return_angles=False):
    """Random sectorial tensor with planted phases drawn from ``phase_interval``.

    With ``return_angles`` the drawn angles, sorted descending, are returned
    alongside the tensor; they are its phases.
    """
    lo, hi = (float(x) for x in phase_interval)
    if hi < lo:
        lo, hi = hi, lo
    if hi - lo >= math.pi:
        raise DomainError(f"phase interval width {hi - lo} must be below pi")
    dims = _dims(dims)
    rng = _rng(seed)
    angles = rng.uniform(lo, hi, math.prod(dims))
    A = sectorial_from_angles(dims, angles, rng, cond=cond)
    if return_angles:
        return A, np.sort(angles)[::-1]
    return A


# -- worked examples -------------------------------------------------------
# The printed slices ``A(p, q, :, :)`` list row modes in reverse order and
# the slice matrix is indexed [j_2, j_1]; i.e. the printed entry
# ``A(p, q, :, :)[r, s]`` is ``a_{i_1=q, i_2=p, j_1=s, j_2=r}``.  This is the
# only reading under which the (3 x 2) x (3 x 2) example has the stated
# shape and blocked structure along mode 1.


def _from_slices(slices, dims):
    arr = np.zeros(dims + dims, dtype=complex)
    for (p, q), block in slices.items():
        block = np.asarray(block, dtype=complex)
        for r in range(block.shape[0]):
            for s in range(block.shape[1]):
                arr[q - 1, p - 1, s, r] = block[r, s]
    return DenseTensor.from_array(arr, 2)


def _thetas(thetas):
    thetas = [float(t) for t in thetas]
    if len(thetas) != 4:
        raise ShapeError("exactly four angles are required")
    return [complex(math.cos(t), math.sin(t)) for t in thetas]


def example1(thetas) -> DenseTensor:
    """The (2 x 2) x (2 x 2) tensor whose phases are the four given angles."""
    e1, e2, e3, e4 = _thetas(thetas)
    slices = {
        (1, 1): [[e1, e1], [e1, 0]],
        (1, 2): [[e1, e1 + e2], [e1, e2]],
        (2, 1): [[e1, e1], [e1 + e3, 0]],
        (2, 2): [[0, e2], [0, e4 + e2]],
    }
    return _from_slices(slices, (2, 2))


def example2(thetas) -> DenseTensor:
    """The rank-4 quasi-sectorial (3 x 2) x (3 x 2) tensor."""
    e1, e2, e3, e4 = _thetas(thetas)
    z = [[0, 0, 0], [0, 0, 0]]
    slices = {
        (1, 1): z,
        (1, 2): z,
        (1, 3): [[0, 0, e1], [e1, e1, 0]],
        (2, 1): [[0, 0, e1], [e1 + e2, e1, e2]],
        (2, 2): [[0, 0, e1], [e1, e1 + e3, 0]],
        (2, 3): [[0, 0, 0], [e2, 0, e4 + e2]],
    }
    return _from_slices(slices, (3, 2))


def example2_sectorial_block(thetas) -> DenseTensor:
    """The sectorial block of :func:`example2`; it coincides with :func:`example1`."""
    return example1(thetas)


def example2_unitary() -> DenseTensor:
    """The printed permutation tensor ``U`` accompanying :func:`example2`.

    With the slice reading above, ``example2 = U^H * [O O; O A_s]_1 * U``.
    """
    slices = {
        (1, 1): [[1, 0, 0], [0, 0, 0]],
        (1, 2): [[0, 0, 1], [0, 0, 0]],
        (1, 3): [[0, 0, 0], [1, 0, 0]],
        (2, 1): [[0, 1, 0], [0, 0, 0]],
        (2, 2): [[0, 0, 0], [0, 1, 0]],
        (2, 3): [[0, 0, 0], [0, 0, 1]],
    }
    return _from_slices(slices, (3, 2))
