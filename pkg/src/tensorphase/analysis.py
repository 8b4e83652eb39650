"""Phase relations: compressions, compound spectra, products, sums, rank
robustness and quasi-sectorial tensors.

Each ``*_check`` function returns a :class:`CheckReport`.  Set-valued
statements (compound numerical ranges are continuous sets) are verified
through explicit witnesses, never through sampled set inclusion.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import scipy.linalg as sla

from . import numerics
from .blocks import block_2x2, block_embedding_permutation
from .fixtures import sectorial_from_angles
from .errors import (
    DomainError,
    NumericError,
    PreconditionError,
    ShapeError,
    SizeError,
)
from .phase import (
    PhaseVector,
    classify,
    matrix_phases,
    phases,
    sectorial_decomposition,
    wrap_to_pi,
)
from .tensor import DenseTensor, _require_square, polar, rank, zeros

__all__ = [
    "CheckReport",
    "CompoundSpectrum",
    "Witness",
    "ConeSpec",
    "QuasiBlockDecomposition",
    "compress",
    "check_interlacing",
    "sum_phase_extremes_check",
    "compound_spectrum",
    "compound_membership_witness",
    "quotient_containment_check",
    "product_containment_check",
    "majorization_check",
    "cone_closure_check",
    "rank_robustness_threshold",
    "worst_case_B",
    "random_cone_member",
    "quasi_phases",
    "quasi_blocked_decomposition",
    "quasi_inequality_check",
]

CHECK_TOL = 1e-6
WITNESS_TOL = 1e-6
MAX_SUBSETS = 10**6
QUASI_ZERO_TOL = 1e-8


@dataclass
class CheckReport:
    check: str
    ok: bool
    margins: List[float] = field(default_factory=list)
    precondition: bool = True
    witnesses: Optional[List[Any]] = None
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def worst_margin(self) -> float:
        return float(min(self.margins)) if self.margins else math.inf

    def to_json(self) -> Dict[str, Any]:
        out = {
            "check": self.check,
            "ok": bool(self.ok),
            "precondition": bool(self.precondition),
            "margins": [float(m) for m in self.margins],
        }
        if self.witnesses is not None:
            out["witnesses"] = [w.to_json() for w in self.witnesses if hasattr(w, "to_json")]
        out.update(self.details)
        return out


@dataclass(frozen=True)
class CompoundSpectrum:
    k: int
    values: np.ndarray
    subsets: List[tuple]


@dataclass(frozen=True)
class Witness:
    """A constructed compressor ``U`` and the product it reproduces."""

    subset: tuple
    U: DenseTensor
    target: complex
    attained: complex
    rel_error: float
    Y: Optional[DenseTensor] = None

    @property
    def ok(self) -> bool:
        return self.rel_error <= WITNESS_TOL

    def to_json(self):
        return {
            "subset": [int(i) + 1 for i in self.subset],
            "target": [self.target.real, self.target.imag],
            "attained": [self.attained.real, self.attained.imag],
            "rel_error": self.rel_error,
        }


# -- helpers -----------------------------------------------------------------
def _align_to(pv: PhaseVector, center: float) -> np.ndarray:
    """Phases shifted by a multiple of 2 pi so their center is within pi of ``center``."""
    shift = pv.gamma - (center + wrap_to_pi(pv.gamma - center))
    return pv.phases - shift


def _vec_tensor(mat, row_dims, col_dims):
    return DenseTensor(mat, row_dims, col_dims)


def _eig_product(M) -> complex:
    return complex(np.prod(numerics.general_eig(M)))


def _rel(a: complex, b: complex) -> float:
    return abs(a - b) / max(abs(b), np.finfo(float).tiny)


# -- compressions ------------------------------------------------------------
def compress(A: DenseTensor, U: DenseTensor, tol=1e-8) -> DenseTensor:
    """``U^H * A * U`` for column-orthogonal ``U``."""
    _require_square(A, "compress")
    if U.row_dims != A.col_dims:
        raise ShapeError(f"compressor rows {U.row_dims} do not match {A.col_dims}")
    if U.shape.cols > U.shape.rows:
        raise ShapeError("compressor must have |J| <= |I|")
    Um = U.matrix
    dev = np.linalg.norm(Um.conj().T @ Um - np.eye(Um.shape[1]))
    if dev > tol:
        raise PreconditionError(f"U is not column orthogonal (deviation {dev:.2e}); orthonormalize with qr first")
    return DenseTensor(Um.conj().T @ A.matrix @ Um, U.col_dims, U.col_dims)


def check_interlacing(A: DenseTensor, U: DenseTensor) -> CheckReport:
    """``Phi_i(A) >= Phi_i(U^H A U) >= Phi_{i+|I|-|J|}(A)`` for every ``i``.

    ``U`` may be column orthogonal or any full-column-rank tensor.
    """
    _require_square(A, "check_interlacing")
    if U.row_dims != A.col_dims or U.shape.cols > U.shape.rows:
        raise ShapeError("U must map into the row space of A with |J| <= |I|")
    pa = phases(A)
    Um = U.matrix
    C = Um.conj().T @ A.matrix @ Um
    try:
        pc_vec = matrix_phases(C)
    except DomainError as exc:
        raise NumericError("compression is numerically not sectorial") from exc
    pc = _align_to(pc_vec, pa.gamma)
    d = len(pa) - len(pc)
    upper = pa.phases[: len(pc)] - pc
    lower = pc - pa.phases[d:]
    margins = np.concatenate([upper, lower])
    bad = [int(i) + 1 for i in np.flatnonzero(np.minimum(upper, lower) < -CHECK_TOL)]
    return CheckReport(
        "interlacing", not bad, margins.tolist(),
        details={"phases_A": pa.phases.tolist(), "phases_compressed": pc.tolist(), "violations": bad},
    )


def _selector(n_total, cols):
    E = np.zeros((n_total, len(cols)), dtype=complex)
    E[cols, np.arange(len(cols))] = 1.0
    return E


def sum_phase_extremes_check(A: DenseTensor, L: int, X: Optional[DenseTensor] = None) -> CheckReport:
    """Attain the extremal phase sums over nonsingular ``X`` with ``L`` column modes.

    The maximizer is ``Q^{-1} * E`` where ``A = Q^H D Q`` has descending
    phases and ``E`` selects the first ``I_1...I_L`` unfolded slots (the
    slots whose trailing indices are all 1); the minimizer selects the last
    ones.  An optional ``X`` is checked to lie between the two extremes.
    """
    _require_square(A, "sum_phase_extremes_check")
    N = len(A.row_dims)
    if not 1 <= L < N:
        raise ShapeError(f"need 1 <= L < N, got L={L}, N={N}")
    col_dims = A.row_dims[:L]
    p = math.prod(col_dims)
    n = A.shape.rows
    pa = phases(A)
    dec = sectorial_decomposition(A)
    Qinv = np.linalg.solve(dec.Q.matrix, np.eye(n))
    target_max = float(np.sum(pa.phases[:p]))
    target_min = float(np.sum(pa.phases[n - p:]))

    def attained(Xm):
        C = Xm.conj().T @ A.matrix @ Xm
        return float(np.sum(_align_to(matrix_phases(C), pa.gamma)))

    Xmax = Qinv @ _selector(n, np.arange(p))
    Xmin = Qinv @ _selector(n, np.arange(n - p, n))
    got_max, got_min = attained(Xmax), attained(Xmin)
    margins = [-abs(got_max - target_max), -abs(got_min - target_min)]
    details = {
        "max_target": target_max, "max_attained": got_max,
        "min_target": target_min, "min_attained": got_min,
    }
    if X is not None:
        if X.row_dims != A.row_dims or X.col_dims != col_dims:
            raise ShapeError(f"X must have shape {A.row_dims}x{col_dims}")
        s = attained(X.matrix)
        details["sample_sum"] = s
        margins += [target_max - s, s - target_min]
    ok = min(margins) >= -CHECK_TOL
    wit = [_vec_tensor(Xmax, A.row_dims, col_dims), _vec_tensor(Xmin, A.row_dims, col_dims)]
    return CheckReport("sum_phase_extremes", ok, margins, witnesses=wit, details=details)


# -- compound spectra --------------------------------------------------------
def compound_spectrum(A: DenseTensor, k: int) -> CompoundSpectrum:
    """All products of ``k`` eigenvalues with distinct indices."""
    _require_square(A, "compound_spectrum")
    n = A.shape.rows
    if not 1 <= k <= n:
        raise ShapeError(f"k must lie in [1, {n}]")
    if math.comb(n, k) > MAX_SUBSETS:
        raise SizeError(f"C({n},{k}) subsets exceed the limit of {MAX_SUBSETS}")
    lam = numerics.general_eig(A.matrix)
    subsets = list(itertools.combinations(range(n), k))
    vals = np.array([np.prod(lam[list(s)]) for s in subsets], dtype=complex)
    return CompoundSpectrum(k, vals, subsets)


def _left_eig(M):
    """Eigenvalues with unit left eigenvectors ``x^H M = lambda x^H``."""
    try:
        w, vl = sla.eig(M, left=True, right=False)
    except (sla.LinAlgError, ValueError) as exc:
        raise NumericError(f"eigensolver failed: {exc}") from exc
    vl = vl / np.linalg.norm(vl, axis=0, keepdims=True)
    scale = max(np.linalg.norm(M, 2), np.finfo(float).tiny)
    resid = np.linalg.norm(vl.conj().T @ M - w[:, None] * vl.conj().T, axis=1)
    if np.any(resid > 1e-8 * scale):
        raise NumericError("left eigenvector backward error too large")
    return w, vl


def _check_subset(w, subset, vl=None, gap=1e-6):
    """Validate a 0-based subset; clusters it splits must have independent eigenvectors."""
    n = len(w)
    subset = tuple(sorted(int(i) for i in subset))
    if not subset or subset[0] < 0 or subset[-1] >= n or len(set(subset)) != len(subset):
        raise ShapeError(f"subset {subset} invalid for {n} eigenvalues")
    rest = [i for i in range(n) if i not in subset]
    if rest:
        close = np.abs(w[list(subset)][:, None] - w[rest][None, :]) <= gap * max(np.abs(w).max(), 1.0)
        if close.any():
            cluster = sorted(set(subset) | {rest[j] for j in np.flatnonzero(close.any(axis=0))})
            if vl is None or numerics.condition_number(vl[:, cluster]) > 1e8:
                raise NumericError("chosen eigenvalues are not separated from the rest")
    return subset


def _stack_witness(vl, subset, row_dims):
    X = vl[:, list(subset)]
    if numerics.condition_number(X) > 1e10:
        raise NumericError("eigenvectors are numerically dependent (non-diagonalizable input)")
    Xt = DenseTensor(X, row_dims, (len(subset),))
    U, _ = polar(Xt)
    return U


def compound_membership_witness(A: DenseTensor, subset: Sequence[int]) -> Witness:
    """A compression of ``A`` whose eigenvalue product is ``prod_{m in subset} lambda_m``.

    ``subset`` holds 0-based positions into :func:`tensor.eigenvalues` order.
    """
    return _quotient_witness(A, None, subset)


def _quotient_witness(A, B, subset, eig=None) -> Witness:
    _require_square(A, "witness")
    if B is None:
        M = A.matrix
    else:
        M = numerics.solve(B.matrix.T, A.matrix.T).T  # A B^{-1}
    w, vl = eig if eig is not None else _left_eig(M)
    subset = _check_subset(w, subset, vl)
    U = _stack_witness(vl, subset, A.row_dims)
    Um = U.matrix
    num = _eig_product(Um.conj().T @ A.matrix @ Um)
    den = 1.0 if B is None else _eig_product(Um.conj().T @ B.matrix @ Um)
    target = complex(np.prod(w[list(subset)]))
    got = num / den
    return Witness(subset, U, target, got, _rel(got, target))


def _subsets(n, k, samples, seed):
    total = math.comb(n, k)
    if samples is None or samples >= total:
        if total > MAX_SUBSETS:
            raise SizeError(f"C({n},{k}) subsets exceed the limit of {MAX_SUBSETS}")
        return list(itertools.combinations(range(n), k))
    rng = np.random.default_rng(seed)
    return [tuple(sorted(rng.choice(n, size=k, replace=False))) for _ in range(samples)]


def quotient_containment_check(A: DenseTensor, B: DenseTensor, k: int,
                               samples: Optional[int] = None, seed=None) -> CheckReport:
    """Witness every element of ``Lambda_(k)(A B^{-1})`` as a ratio of compressed products."""
    _require_square(A, "quotient_containment_check")
    if A.shape != B.shape:
        raise ShapeError("A and B must have the same shape")
    if not classify(B).sectorial:
        raise PreconditionError("B must be sectorial")
    n = A.shape.rows
    M = numerics.solve(B.matrix.T, A.matrix.T).T
    eig = _left_eig(M)
    wits = [_quotient_witness(A, B, s, eig=eig) for s in _subsets(n, k, samples, seed)]
    margins = [WITNESS_TOL - w.rel_error for w in wits]
    return CheckReport("quotient_containment", all(w.ok for w in wits), margins, witnesses=wits)


def product_containment_check(A: DenseTensor, B: DenseTensor, k: int,
                              samples: Optional[int] = None, seed=None) -> CheckReport:
    """Witness ``Lambda_(k)(A B)`` inside ``W'_(k)(A) W'_(k)(B)``.

    ``A B = A (B^{-1})^{-1}`` gives a column-orthogonal ``U`` with the
    element equal to ``a / b``; then ``1/b`` is realized on ``B`` by the
    nonsingular ``Y = |b|^{-1/k} B^{-1} U``.
    """
    _require_square(A, "product_containment_check")
    if A.shape != B.shape:
        raise ShapeError("A and B must have the same shape")
    if not classify(B).sectorial:
        raise PreconditionError("B must be sectorial")
    n = A.shape.rows
    Am, Bm = A.matrix, B.matrix
    Binv = numerics.solve(Bm, np.eye(n))
    w, vl = _left_eig(Am @ Bm)
    wits = []
    for s in _subsets(n, k, samples, seed):
        s = _check_subset(w, s, vl)
        U = _stack_witness(vl, s, A.row_dims)
        Um = U.matrix
        a = _eig_product(Um.conj().T @ Am @ Um)
        b = _eig_product(Um.conj().T @ Binv @ Um)
        Y = abs(b) ** (-1.0 / k) * (Binv @ Um)
        got = a * _eig_product(Y.conj().T @ Bm @ Y)
        target = complex(np.prod(w[list(s)]))
        wits.append(Witness(s, U, target, got, _rel(got, target),
                            Y=DenseTensor(Y, A.row_dims, (k,))))
    margins = [WITNESS_TOL - x.rel_error for x in wits]
    return CheckReport("product_containment", all(x.ok for x in wits), margins, witnesses=wits)


# -- products and sums -------------------------------------------------------
def majorization_check(A: DenseTensor, B: DenseTensor, window_tol=1e-9) -> CheckReport:
    """``angle(lambda(A*B))`` is majorized by ``Phi(A) + Phi(B)``.

    Eigenvalue angles are taken in ``(gamma_A + gamma_B - pi, gamma_A + gamma_B + pi)``;
    an angle on that window's boundary means the hypothesis fails, which
    is reported with ``precondition = False`` rather than as a violation.
    """
    pa, pb = phases(A), phases(B)
    g = pa.gamma + pb.gamma
    lam = numerics.general_eig((A @ B).matrix)
    rel = wrap_to_pi(np.angle(lam) - g)
    x = np.sort(g + rel)[::-1]
    y = np.sort(pa.phases + pb.phases)[::-1]
    details = {"angles": x.tolist(), "phase_sums": y.tolist()}
    if np.any(np.abs(rel) >= math.pi - window_tol):
        return CheckReport("majorization", False, [], precondition=False, details=details)
    cx, cy = np.cumsum(x), np.cumsum(y)
    margins = list(cy[:-1] - cx[:-1]) + [-abs(cx[-1] - cy[-1])]
    details["partial_sums"] = cx.tolist()
    details["bound_sums"] = cy.tolist()
    return CheckReport("majorization", min(margins) >= -CHECK_TOL, margins, details=details)


@dataclass(frozen=True)
class ConeSpec:
    """``C[alpha, beta]`` (``k`` is None) or ``C_k[alpha]``."""

    alpha: float
    beta: Optional[float] = None
    k: Optional[int] = None

    def __post_init__(self):
        if self.k is None:
            if self.beta is None:
                raise DomainError("interval cone needs both alpha and beta")
            if not self.beta - self.alpha < math.pi or self.beta < self.alpha:
                raise DomainError("interval cone needs alpha <= beta < alpha + pi")
        else:
            if self.k < 1:
                raise DomainError("k must be positive")
            if not 0.0 <= self.alpha < math.pi * self.k:
                raise DomainError("alpha must lie in [0, k pi)")

    @classmethod
    def interval(cls, alpha, beta):
        return cls(float(alpha), float(beta))

    @classmethod
    def rank(cls, k, alpha):
        return cls(float(alpha), None, int(k))

    def phase_bounds(self, pv: PhaseVector, tol=1e-9):
        """Membership margins of a phase vector (all must be >= 0)."""
        if self.k is None:
            ph = _align_to(pv, 0.5 * (self.alpha + self.beta))
            return [self.beta + tol - ph[0], ph[-1] - (self.alpha - tol)]
        k = min(self.k, len(pv))
        return [self.alpha + tol - float(np.sum(pv.phases[:k])),
                float(np.sum(pv.phases[-k:])) + self.alpha + tol]

    def contains(self, A: DenseTensor, tol=1e-9) -> bool:
        if not classify(A).sectorial:
            return False
        return min(self.phase_bounds(phases(A), tol)) >= 0.0


def cone_closure_check(A: DenseTensor, B: DenseTensor, cone: ConeSpec) -> CheckReport:
    """``A, B in C[alpha, beta]`` implies ``A + B`` is in the cone, with the sharper bounds."""
    if cone.k is not None:
        raise DomainError("closure under sums is stated for interval cones")
    for name, T in (("A", A), ("B", B)):
        if not cone.contains(T):
            raise PreconditionError(f"{name} is not in C[{cone.alpha}, {cone.beta}]")
    center = 0.5 * (cone.alpha + cone.beta)
    pa = _align_to(phases(A), center)
    pb = _align_to(phases(B), center)
    S = A + B
    if not classify(S).sectorial:
        return CheckReport("cone_closure", False, [-math.inf], details={"sum_sectorial": False})
    ps = _align_to(phases(S), center)
    margins = [
        max(pa[0], pb[0]) - ps[0],
        ps[-1] - min(pa[-1], pb[-1]),
        cone.beta - ps[0],
        ps[-1] - cone.alpha,
    ]
    return CheckReport("cone_closure", min(margins) >= -CHECK_TOL, [float(m) for m in margins],
                       details={"sum_sectorial": True, "phases_sum": ps.tolist()})


# -- rank robustness ---------------------------------------------------------
def rank_robustness_threshold(A: DenseTensor, k: int) -> float:
    """Largest ``alpha`` (exclusive) keeping ``rank(I + A*B) > |I| - k`` on ``C_k[alpha]``."""
    pv = phases(A)
    n = len(pv)
    if not 1 <= k <= n:
        raise ShapeError(f"k must lie in [1, {n}]")
    top = float(np.sum(pv.phases[:k]))
    bottom = float(np.sum(pv.phases[n - k:]))
    return min(k * math.pi - top, k * math.pi + bottom)


def worst_case_B(A: DenseTensor, k: int) -> DenseTensor:
    """``B = T^{-1} E T^{-H}`` placing ``k`` eigenvalues of ``A*B`` at ``-1``.

    With ``A = T^H D T`` (phases descending), ``E`` is diagonal with
    ``angle(e_i) = pi - Phi_i(A)`` for ``i <= k`` and ``e_i = 1`` otherwise.
    """
    dec = sectorial_decomposition(A)
    n = A.shape.rows
    if not 1 <= k <= n:
        raise ShapeError(f"k must lie in [1, {n}]")
    e = np.ones(n, dtype=complex)
    e[:k] = np.exp(1j * (math.pi - dec.angles[:k]))
    Tinv = np.linalg.solve(dec.Q.matrix, np.eye(n))
    Bm = Tinv @ (e[:, None] * Tinv.conj().T)
    return DenseTensor(Bm, A.row_dims, A.col_dims)


def random_cone_member(dims, k: int, alpha: float, seed=None, cond=16.0, margin=0.01):
    """Random sectorial ``B`` in ``C_k[alpha]`` with known phases.

    Angles drawn in ``(-pi/2, pi/2)`` are scaled down until the top-``k``
    sum is at most ``alpha``, the bottom-``k`` sum at least ``-alpha`` and the
    spread below ``pi - margin``.
    """
    rng = np.random.default_rng(seed)
    n = math.prod(dims)
    ang = np.sort(rng.uniform(-0.5 * math.pi, 0.5 * math.pi, n))[::-1]
    top, bot = float(np.sum(ang[:k])), float(np.sum(ang[n - k:]))
    width = float(ang[0] - ang[-1])
    c = 1.0
    if top > 0:
        c = min(c, alpha / top)
    if bot < 0:
        c = min(c, alpha / -bot)
    if width > 0:
        c = min(c, (math.pi - margin) / width)
    ang = c * ang
    return sectorial_from_angles(dims, ang, rng, cond=cond), ang


# -- quasi-sectorial ---------------------------------------------------------
def _require_quasi(A):
    rep = classify(A)
    if not rep.quasi_sectorial:
        raise DomainError(f"tensor is {rep.cls.value}, not quasi-sectorial")
    return rep


def quasi_phases(A: DenseTensor) -> PhaseVector:
    """Phases of the sectorial block of a quasi-sectorial tensor.

    An ordered complex Schur form moves the eigenvalues with
    ``|lambda| <= 1e-8 ||A||`` to the leading block; for quasi-sectorial
    input ``ker A = ker A^H`` so the trailing block ``C_s`` carries the rest.
    """
    _require_square(A, "quasi_phases")
    _require_quasi(A)
    M = A.matrix
    scale = np.linalg.norm(M)
    r = rank(A)
    if r == 0:
        raise DomainError("zero tensor has no sectorial block")
    cut = QUASI_ZERO_TOL * scale
    sch = numerics.schur(M, select=lambda z: abs(z) <= cut)
    m = M.shape[0] - r
    zeros_found = int(np.sum(np.abs(sch.eigenvalues) <= cut))
    if zeros_found != m:
        raise NumericError(f"found {zeros_found} zero eigenvalues but rank deficiency is {m}")
    T = sch.triangular
    if m and np.linalg.norm(T[:m, :]) > 1e-7 * scale:
        raise NumericError("kernel of A and A^H differ; zero block does not split off")
    Cs = T[m:, m:]
    try:
        return matrix_phases(Cs)
    except DomainError as exc:
        raise NumericError("retained block is not sectorial to tolerance") from exc


@dataclass(frozen=True)
class QuasiBlockDecomposition:
    """``A = U * [O O; O A_s]_n * U^H`` with unitary ``U``."""

    U: DenseTensor
    As: DenseTensor
    blocked: DenseTensor
    mode: int
    residual: float


def quasi_blocked_decomposition(A: DenseTensor, n: int, Jn: int) -> QuasiBlockDecomposition:
    """Split off a zero block along mode ``n`` leaving ``A_s`` with ``I_n -> Jn``.

    Requires ``Jn < I_n`` and ``rank(A) <= (Jn / I_n) |I|``.
    """
    _require_square(A, "quasi_blocked_decomposition")
    dims = A.row_dims
    if not 1 <= n <= len(dims):
        raise ShapeError(f"mode {n} outside [1, {len(dims)}]")
    In = dims[n - 1]
    if not 1 <= Jn < In:
        raise DomainError(f"need 1 <= J_n < I_n = {In}, got {Jn}")
    _require_quasi(A)
    M = A.matrix
    N = M.shape[0]
    scale = np.linalg.norm(M)
    r = rank(A)
    m = N // In * Jn
    if r > m:
        raise DomainError(
            f"rank {r} exceeds (J_n/I_n)|I| = {m} for mode {n}; no blocked decomposition exists"
        )
    _, s, Vh = np.linalg.svd(M)
    V = Vh.conj().T
    K, R = V[:, r:], V[:, :r]
    if K.shape[1] and np.linalg.norm(M.conj().T @ K) > 1e-8 * max(scale, 1.0):
        raise DomainError("ker A differs from ker A^H; not quasi-sectorial")
    W = np.hstack([K, R])  # zero directions first, range last
    tail = W[:, N - m:]
    As_mat = tail.conj().T @ M @ tail
    sub = list(dims)
    sub[n - 1] = Jn
    top = list(dims)
    top[n - 1] = In - Jn
    P = block_embedding_permutation(dims, n, [In - Jn, Jn])
    Um = W[:, P.image]
    As = DenseTensor(As_mat, tuple(sub), tuple(sub))
    blocked = block_2x2(zeros(tuple(top), tuple(top)), zeros(tuple(top), tuple(sub)),
                        zeros(tuple(sub), tuple(top)), As, n)
    U = DenseTensor(Um, dims, dims)
    resid = float(np.linalg.norm(M - Um @ blocked.matrix @ Um.conj().T))
    if resid > 1e-7 * max(scale, 1.0):
        raise NumericError(f"blocked reconstruction residual {resid:.2e} too large")
    return QuasiBlockDecomposition(U, As, blocked, n, resid)


def quasi_inequality_check(A: DenseTensor, alpha: float, bisect_tol=1e-9) -> CheckReport:
    """Largest ``eps`` with ``e^{-i alpha} A + e^{i alpha} A^H >= eps A^H A``.

    Both sides vanish on ``ker A`` for quasi-sectorial ``A``, so the
    inequality is examined on the range.  ``eps`` is the smallest generalized
    eigenvalue of that pencil, confirmed by bisection on
    ``lambda_min(M - eps G)``; ``ok`` means ``eps > 0``.
    """
    _require_square(A, "quasi_inequality_check")
    _require_quasi(A)
    Am = A.matrix
    r = rank(A)
    if r == 0:
        raise DomainError("zero tensor has no phases")
    _, _, Vh = np.linalg.svd(Am)
    R = Vh.conj().T[:, :r]
    rot = np.exp(-1j * alpha)
    Mfull = rot * Am + np.conj(rot) * Am.conj().T
    Mr = R.conj().T @ Mfull @ R
    Mr = 0.5 * (Mr + Mr.conj().T)
    Gr = R.conj().T @ (Am.conj().T @ Am) @ R
    Gr = 0.5 * (Gr + Gr.conj().T)
    eps_gen = float(sla.eigh(Mr, Gr, eigvals_only=True)[0])

    def feasible(eps):
        return np.linalg.eigvalsh(Mr - eps * Gr)[0] >= -1e-12 * np.linalg.norm(Mr)

    lo, hi = eps_gen - 1.0, eps_gen + 1.0
    while not feasible(lo):
        lo -= 2 * (hi - lo)
    while feasible(hi):
        hi += 2 * (hi - lo)
    while hi - lo > bisect_tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    eps = 0.5 * (lo + hi)
    pv = quasi_phases(A)
    rel = wrap_to_pi(pv.phases - alpha)
    in_window = bool(np.all(np.abs(rel) < 0.5 * math.pi))
    ok = eps_gen > 0.0
    return CheckReport(
        "quasi_inequality", ok, [eps_gen],
        details={
            "epsilon": eps_gen,
            "epsilon_bisection": eps,
            "phases": pv.phases.tolist(),
            "phases_in_window": in_window,
            "consistent": in_window == ok,
        },
    )
