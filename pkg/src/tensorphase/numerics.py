"""Dense complex linear-algebra kernels acting on unfolded matrices.

Everything above this module talks to matrices only through these
functions, so accuracy contracts live in one place.  The heavy lifting is
delegated to LAPACK through :mod:`scipy.linalg` (``zgeev`` is Hessenberg
reduction followed by shifted QR, ``zheevd`` for Hermitian input).
"""

from typing import NamedTuple, Optional, Tuple

import numpy as np
import scipy.linalg as sla

from .errors import (
    DomainError,
    NotPositiveDefiniteError,
    NumericError,
    ShapeError,
    SingularityError,
)

__all__ = [
    "SchurResult",
    "general_eig",
    "hermitian_eig",
    "cholesky",
    "svd_extremes",
    "solve",
    "condition_number",
    "schur",
    "hermitian_power",
    "MAX_CONDITION",
]

#: Inputs with a larger 2-norm condition estimate are refused by :func:`solve`.
MAX_CONDITION = 1e12


class SchurResult(NamedTuple):
    unitary: np.ndarray
    triangular: np.ndarray
    eigenvalues: np.ndarray


def _square(M, name="matrix"):
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise NumericError(f"{name} has non-finite entries")
    return M


def general_eig(M, want_vectors=False):
    """Eigenvalues (and right eigenvectors) of a general complex matrix.

    With ``want_vectors`` the columns of the returned matrix are unit
    vectors and every pair satisfies ``||M v - lambda v|| <= 1e-8 ||M||``;
    otherwise a :class:`NumericError` is raised.
    """
    M = _square(M)
    if M.shape[0] == 0:
        empty = np.zeros(0, dtype=complex)
        return (empty, np.zeros((0, 0), dtype=complex)) if want_vectors else empty
    try:
        if want_vectors:
            w, V = sla.eig(M)
        else:
            w = sla.eigvals(M)
    except (sla.LinAlgError, ValueError) as exc:
        raise NumericError(f"eigensolver did not converge: {exc}") from exc
    if not want_vectors:
        return w
    V = V / np.linalg.norm(V, axis=0, keepdims=True)
    scale = max(np.linalg.norm(M, 2), np.finfo(float).tiny)
    resid = np.linalg.norm(M @ V - V * w, axis=0)
    if np.any(resid > 1e-8 * scale):
        raise NumericError(
            f"eigenpair backward error {resid.max():.3e} exceeds 1e-8*||M||"
        )
    return w, V


def hermitian_eig(M):
    """Ascending real eigenvalues and orthonormal eigenvectors.

    The input is symmetrized first; a departure from Hermitian symmetry
    beyond ``1e-10 ||M||`` is rejected.
    """
    M = _square(M)
    scale = np.linalg.norm(M)
    if np.linalg.norm(M - M.conj().T) > 1e-10 * max(scale, 1.0):
        raise DomainError("matrix is not Hermitian to within 1e-10")
    M = 0.5 * (M + M.conj().T)
    try:
        w, V = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"Hermitian eigensolver failed: {exc}") from exc
    return w, V


def cholesky(M):
    """Lower triangular ``L`` with ``M = L L^H``.

    Raises :class:`NotPositiveDefiniteError` when a pivot is not positive,
    which callers use as a definiteness test.
    """
    M = _square(M)
    M = 0.5 * (M + M.conj().T)
    try:
        return np.linalg.cholesky(M)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("matrix is not positive definite") from exc


def svd_extremes(M) -> Tuple[float, float]:
    """Largest and smallest singular values of ``M``."""
    M = np.asarray(M, dtype=complex)
    if M.size == 0:
        return 0.0, 0.0
    s = np.linalg.svd(M, compute_uv=False)
    return float(s[0]), float(s[-1])


def condition_number(M):
    smax, smin = svd_extremes(M)
    if smin == 0.0:
        return float("inf")
    return smax / smin


def solve(M, B, max_condition=MAX_CONDITION):
    """Solve ``M X = B`` for square nonsingular ``M``."""
    M = _square(M)
    B = np.asarray(B, dtype=complex)
    if B.shape[0] != M.shape[0]:
        raise ShapeError(f"right-hand side has {B.shape[0]} rows, expected {M.shape[0]}")
    kappa = condition_number(M)
    if not np.isfinite(kappa) or kappa > max_condition:
        raise SingularityError(
            f"matrix is singular to working precision (condition {kappa:.3e})",
            condition=kappa,
        )
    return sla.solve(M, B)


def schur(M, select=None) -> SchurResult:
    """Complex Schur form ``M = Z T Z^H``.

    ``select`` is an optional predicate on eigenvalues; selected ones are
    moved to the leading block of ``T``.
    """
    M = _square(M)
    try:
        if select is None:
            T, Z = sla.schur(M, output="complex")
        else:
            T, Z, _ = sla.schur(M, output="complex", sort=select)
    except (sla.LinAlgError, ValueError) as exc:
        raise NumericError(f"Schur decomposition failed: {exc}") from exc
    return SchurResult(Z, T, np.diag(T).copy())


def hermitian_power(M, p, floor: Optional[float] = None):
    """``M**p`` for Hermitian positive (semi)definite ``M``.

    Eigenvalues below ``floor`` (default: ``1e-14 * max eigenvalue``) are
    treated as an error for negative exponents.
    """
    w, V = hermitian_eig(M)
    top = max(abs(w).max(initial=0.0), np.finfo(float).tiny)
    floor = 1e-14 * top if floor is None else floor
    if w.min(initial=top) < -floor:
        raise DomainError("matrix is not positive semidefinite")
    w = np.clip(w, 0.0, None)
    if p < 0 and w.min(initial=top) <= floor:
        raise SingularityError("negative power of a singular matrix")
    return (V * w**p) @ V.conj().T
