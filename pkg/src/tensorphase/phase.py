"""Numerical range, sectoriality and phases of even-order square tensors.

The workhorse is the rotated Hermitian part

    f(t) = lambda_min( Herm(e^{-it} A) ),

evaluated on the unfolding of ``A``.  ``W(A)`` lies in the open half-plane
``Re(e^{-it} z) > 0`` exactly when ``f(t) > 0``, so the set of such ``t``
decides sectoriality, measures the field angle and supplies the rotation
that resolves the branch ambiguity of the eigenvalue-based phase formula.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import numerics
from .errors import DomainError, NotSectorialError, NumericError, RangeError
from .tensor import DenseTensor, _require_square

__all__ = [
    "Sectoriality",
    "SectorialityReport",
    "PhaseVector",
    "SectorialDecomposition",
    "NumericalRangeBoundary",
    "nr_boundary",
    "classify",
    "phases",
    "matrix_phases",
    "sectorial_decomposition",
    "phase_witness",
    "field_angle",
    "rayleigh",
    "wrap_to_pi",
    "DEFAULT_GRID",
    "DEFAULT_TOL",
]

TWO_PI = 2.0 * math.pi
DEFAULT_GRID = 720
DEFAULT_TOL = 1e-9
_COARSE_GRID = 64
_UNIT_MODULUS_TOL = 1e-7


class Sectoriality(str, enum.Enum):
    SECTORIAL = "Sectorial"
    QUASI_SECTORIAL = "QuasiSectorial"
    SEMI_SECTORIAL = "SemiSectorial"
    INDEFINITE = "Indefinite"


@dataclass(frozen=True)
class SectorialityReport:
    cls: Sectoriality
    field_angle: float
    positivity_arc: Optional[Tuple[float, float]]
    max_support: float
    argmax: float
    scale: float

    @property
    def sectorial(self) -> bool:
        return self.cls is Sectoriality.SECTORIAL

    @property
    def quasi_sectorial(self) -> bool:
        return self.cls in (Sectoriality.SECTORIAL, Sectoriality.QUASI_SECTORIAL)

    @property
    def semi_sectorial(self) -> bool:
        return self.cls is not Sectoriality.INDEFINITE

    def to_dict(self):
        return {
            "class": self.cls.value,
            "field_angle": self.field_angle,
            "positivity_arc": list(self.positivity_arc) if self.positivity_arc else [],
            "max_min_eigenvalue": self.max_support,
        }


@dataclass(frozen=True)
class PhaseVector:
    """Phases sorted descending, with the phase center ``gamma``.

    All phases lie in ``(gamma - pi/2, gamma + pi/2)`` and ``gamma`` is in
    ``(-pi, pi]``; individual phases are therefore not wrapped and may leave
    ``(-pi, pi]`` when the sector straddles the negative real axis.
    ``rotation`` is the angle ``t`` with ``f(t) > 0`` used to pick the branch.
    """

    phases: np.ndarray
    gamma: float
    rotation: float
    ill_conditioned: bool = False

    @property
    def phi_max(self) -> float:
        return float(self.phases[0])

    @property
    def phi_min(self) -> float:
        return float(self.phases[-1])

    def __len__(self):
        return len(self.phases)

    def shifted(self, alpha: float) -> "PhaseVector":
        return PhaseVector(self.phases + alpha, self.gamma + alpha, self.rotation + alpha,
                           self.ill_conditioned)


@dataclass(frozen=True)
class SectorialDecomposition:
    """``A = Q^H * D * Q`` with ``D`` unitary diagonal, phases descending."""

    Q: DenseTensor
    D: DenseTensor
    angles: np.ndarray
    residual: float


@dataclass(frozen=True)
class NumericalRangeBoundary:
    angles: np.ndarray
    points: np.ndarray
    support: np.ndarray
    witnesses: np.ndarray = field(repr=False)

    def contains(self, z, tol=0.0) -> np.ndarray:
        """Membership in the outer polygon cut out by the supporting lines."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        proj = np.real(np.exp(-1j * self.angles)[None, :] * z[:, None])
        return np.all(proj <= self.support[None, :] + tol, axis=1)

    def hull_contains(self, z, tol=0.0) -> np.ndarray:
        """Membership in the convex polygon spanned by the boundary points."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        p = self.points
        q = np.roll(p, -1)
        edge = q - p
        keep = np.abs(edge) > 1e-15 * max(np.abs(p).max(), 1.0)
        if not np.any(keep):
            return np.abs(z - p[0]) <= tol
        p, edge = p[keep], edge[keep]
        # boundary is traced counter-clockwise, so interior is on the left
        cross = np.imag(np.conj(edge)[None, :] * (z[:, None] - p[None, :]))
        return np.all(cross >= -tol * np.abs(edge)[None, :], axis=1)

    def is_convex(self, tol=1e-9) -> bool:
        p = self.points
        e1 = np.roll(p, -1) - p
        e2 = np.roll(p, -2) - np.roll(p, -1)
        cross = np.imag(np.conj(e1) * e2)
        scale = max(np.abs(p).max(), 1.0) ** 2
        return bool(np.all(cross >= -tol * scale))

    def to_csv(self, fh=None) -> Optional[str]:
        """Write ``t,re,im,support`` rows with 17 significant digits."""
        own = fh is None
        buf = io.StringIO() if own else fh
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "re", "im", "support"])
        for t, z, h in zip(self.angles, self.points, self.support):
            w.writerow([f"{t:.17g}", f"{z.real:.17g}", f"{z.imag:.17g}", f"{h:.17g}"])
        return buf.getvalue() if own else None


def wrap_to_pi(x):
    """Map angles into ``(-pi, pi]``."""
    y = np.mod(np.asarray(x, dtype=float) + math.pi, TWO_PI) - math.pi
    y = np.where(y <= -math.pi, y + TWO_PI, y)
    return float(y) if np.ndim(y) == 0 else y


def rayleigh(A: DenseTensor, X) -> complex:
    """``X^H * A * X`` for a tensor or flat vector ``X``."""
    x = X.matrix.ravel() if isinstance(X, DenseTensor) else np.asarray(X, dtype=complex)
    return complex(np.vdot(x, A.matrix @ x))


# -- rotated Hermitian parts -------------------------------------------------
def _herm_parts(M):
    Mh = M.conj().T
    return 0.5 * (M + Mh), (M - Mh) / 2j


class _Curve:
    """``f(t)`` for one matrix, with batched and scalar evaluation."""

    def __init__(self, M):
        self.H, self.K = _herm_parts(M)
        self.scale = float(np.linalg.norm(M))

    def stack(self, t):
        t = np.asarray(t, dtype=float)
        return (np.cos(t)[:, None, None] * self.H[None]
                + np.sin(t)[:, None, None] * self.K[None])

    def batch(self, t):
        return np.linalg.eigvalsh(self.stack(t))[:, 0]

    def __call__(self, t):
        S = math.cos(t) * self.H + math.sin(t) * self.K
        return float(np.linalg.eigvalsh(S)[0])


def _refine_max(curve, t0, half_width):
    res = minimize_scalar(lambda t: -curve(t), bounds=(t0 - half_width, t0 + half_width),
                          method="bounded", options={"xatol": 1e-10})
    t_best, f_best = float(res.x), -float(res.fun)
    f0 = curve(t0)
    if f0 >= f_best:
        return t0, f0
    return t_best, f_best


def _arcs(curve, ts, fs, level):
    """Maximal arcs of ``{t : f(t) > level}`` as unwrapped ``(lo, hi)`` pairs."""
    above = fs > level
    m = len(ts)
    if np.all(above):
        return [(0.0, TWO_PI)]
    if not np.any(above):
        return []
    step = TWO_PI / m
    start = int(np.argmin(above))  # a grid point outside the set
    g = lambda t: curve(t) - level  # noqa: E731
    arcs = []
    k = 0
    while k < m:
        idx = (start + k) % m
        if not above[idx]:
            k += 1
            continue
        first = start + k
        while k < m and above[(start + k) % m]:
            k += 1
        last = start + k - 1
        t_in_lo, t_out_lo = ts[0] + first * step, ts[0] + (first - 1) * step
        t_in_hi, t_out_hi = ts[0] + last * step, ts[0] + (last + 1) * step
        lo = brentq(g, t_out_lo, t_in_lo, xtol=1e-13)
        hi = brentq(g, t_in_hi, t_out_hi, xtol=1e-13)
        arcs.append((lo, hi))
    return arcs


def _arc_around(curve, t_peak, level, reach):
    """Arc of ``{f > level}`` containing ``t_peak`` when the grid missed it."""
    g = lambda t: curve(t) - level  # noqa: E731
    lo = brentq(g, t_peak - reach, t_peak, xtol=1e-13)
    hi = brentq(g, t_peak, t_peak + reach, xtol=1e-13)
    return lo, hi


def _angle_slack(tol):
    # a tangency of W(A) with a line through 0 leaves an arc of width
    # O(sqrt(tol)) in {f > -tol ||A||}; smaller gaps are not evidence of delta < pi
    return max(tol, 10.0 * math.sqrt(tol))


def _classify_matrix(M, grid=DEFAULT_GRID, tol=DEFAULT_TOL) -> SectorialityReport:
    curve = _Curve(M)
    scale = curve.scale
    if scale == 0.0:
        return SectorialityReport(Sectoriality.QUASI_SECTORIAL, 0.0, None, 0.0, 0.0, 0.0)
    c = tol * scale
    step = TWO_PI / grid
    ts = np.arange(grid) * step
    fs = curve.batch(ts)
    k = int(np.argmax(fs))
    t_star, f_star = _refine_max(curve, ts[k], step)

    pos_arcs = _arcs(curve, ts, fs, c)
    if not pos_arcs and f_star > c:
        pos_arcs = [_arc_around(curve, t_star, c, step)]
    positivity = None
    if pos_arcs:
        lo, hi = max(pos_arcs, key=lambda a: a[1] - a[0])
        positivity = (lo, hi)

    semi_arcs = _arcs(curve, ts, fs, -c)
    if not semi_arcs and f_star > -c:
        semi_arcs = [_arc_around(curve, t_star, -c, step)]
    L = sum(hi - lo for lo, hi in semi_arcs)
    delta = min(max(math.pi - L, 0.0), math.pi)

    if f_star > c:
        cls = Sectoriality.SECTORIAL
    elif delta < math.pi - _angle_slack(tol):
        cls = Sectoriality.QUASI_SECTORIAL
    elif f_star >= -c:
        cls = Sectoriality.SEMI_SECTORIAL
    else:
        cls = Sectoriality.INDEFINITE
    return SectorialityReport(cls, delta, positivity, f_star, float(wrap_to_pi(t_star)), scale)


def classify(A: DenseTensor, grid=DEFAULT_GRID, tol=DEFAULT_TOL) -> SectorialityReport:
    """Classify ``A`` as sectorial, quasi-, semi-sectorial or indefinite.

    Thresholds are relative to ``||A||_F``: sectorial iff
    ``max_t f(t) > tol ||A||_F``; the field angle is ``pi - L`` with ``L``
    the length of ``{t : f(t) > -tol ||A||_F}``.
    """
    _require_square(A, "classify")
    return _classify_matrix(A.matrix, grid=grid, tol=tol)


def _direction(M, tol=DEFAULT_TOL, grid=DEFAULT_GRID):
    """An angle ``t`` with ``f(t) > 0`` and the value ``f(t)``.

    A coarse grid is tried first; the full classification search runs only
    when the coarse pass finds no point above ``tol * ||M||_F``.
    """
    curve = _Curve(M)
    c = tol * curve.scale
    step = TWO_PI / _COARSE_GRID
    ts = np.arange(_COARSE_GRID) * step
    fs = curve.batch(ts)
    k = int(np.argmax(fs))
    if fs[k] > 1e-2 * curve.scale:
        return float(ts[k]), float(fs[k]), c  # comfortably inside; no refinement needed
    if fs[k] > c:
        t, f = _refine_max(curve, ts[k], step)
        return t, f, c
    rep = _classify_matrix(M, grid=grid, tol=tol)
    return rep.argmax, rep.max_support, c


def matrix_phases(M, tol=DEFAULT_TOL, grid=DEFAULT_GRID) -> PhaseVector:
    """Phases of a square sectorial matrix (the unfolded computation)."""
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    if n == 0:
        raise DomainError("empty matrix has no phases")
    if n == 1:
        a = complex(M[0, 0])
        if a == 0:
            raise NotSectorialError("zero scalar has no phase", 0.0)
        phi = math.atan2(a.imag, a.real)
        if phi == -math.pi:
            phi = math.pi
        return PhaseVector(np.array([phi]), phi, phi)
    t, f, c = _direction(M, tol=tol, grid=grid)
    if not f > 0.0:
        raise NotSectorialError("not sectorial", f)
    ill = f <= c
    rot = np.exp(-1j * t)
    Mr = rot * M
    try:
        R = numerics.solve(Mr, Mr.conj().T)
    except numerics.SingularityError:
        raise
    mu = numerics.general_eig(R)
    dev = np.abs(np.abs(mu) - 1.0).max()
    if dev > _UNIT_MODULUS_TOL:
        raise NumericError(
            f"eigenvalues of A^-1 A^H deviate from the unit circle by {dev:.2e}; "
            "the phase computation is ill-conditioned"
        )
    phi = np.sort(t - 0.5 * np.angle(mu))[::-1]
    gamma = 0.5 * (phi[0] + phi[-1])
    shift = TWO_PI * math.floor((math.pi - gamma) / TWO_PI)
    if gamma + shift <= -math.pi:
        shift += TWO_PI
    phi = phi + shift
    return PhaseVector(phi, 0.5 * (phi[0] + phi[-1]), t + shift, bool(ill))


def phases(A: DenseTensor, tol=DEFAULT_TOL, grid=DEFAULT_GRID) -> PhaseVector:
    """Phases of a sectorial tensor, sorted descending.

    The phases are ``t - angle(mu_i)/2`` where ``mu_i`` are the eigenvalues
    of ``(e^{-it}A)^{-1} * (e^{-it}A)^H`` and ``t`` is a direction with
    ``W(e^{-it}A)`` in the open right half-plane, which pins every phase to
    ``(t - pi/2, t + pi/2)``.

    Raises :class:`NotSectorialError` if no such direction exists.
    """
    _require_square(A, "phases")
    return matrix_phases(A.matrix, tol=tol, grid=grid)


def _align(angles, gamma):
    """Shift each angle by a multiple of 2 pi to lie within pi of ``gamma``."""
    return gamma + wrap_to_pi(np.asarray(angles) - gamma)


def sectorial_decomposition(A: DenseTensor, tol=DEFAULT_TOL) -> SectorialDecomposition:
    """Constructive ``A = Q^H * D * Q`` with unitary diagonal ``D``.

    After rotating so that the skew-Hermitian part ``K`` is positive
    definite, ``K = L L^H`` gives ``P = L^{-H}`` with ``P^H K P = I``; the
    eigendecomposition ``P^H H P = V D_0 V^H`` yields ``C = P V`` and
    ``C^H A C = D_0 + iI``.  Normalizing the diagonal gives ``D`` and
    ``Q = |D_0 + iI|^{1/2} C^{-1}``.
    """
    _require_square(A, "sectorial_decomposition")
    M = A.matrix
    n = M.shape[0]
    t, f, _ = _direction(M, tol=tol)
    if not f > 0.0:
        raise NotSectorialError("not sectorial", f)
    theta = t - 0.5 * math.pi
    Mr = np.exp(-1j * theta) * M
    H, K = _herm_parts(Mr)
    try:
        L = numerics.cholesky(K)
    except numerics.NotPositiveDefiniteError as exc:
        raise NumericError("skew part is not positive definite; sectoriality is borderline") from exc
    P = np.linalg.solve(L, np.eye(n)).conj().T  # L^{-H}
    d0, V = numerics.hermitian_eig(P.conj().T @ H @ P)
    C = P @ V
    d1 = d0 + 1j
    mod = np.abs(d1)
    dvals = d1 / mod * np.exp(1j * theta)
    Qm = mod[:, None] ** 0.5 * np.linalg.solve(C, np.eye(n))
    angles = theta + np.angle(d1)  # descending because d0 is ascending
    gamma = wrap_to_pi(0.5 * (angles[0] + angles[-1]))
    angles = angles + (gamma - 0.5 * (angles[0] + angles[-1]))
    Q = DenseTensor(Qm, A.row_dims, A.col_dims)
    D = DenseTensor(np.diag(dvals), A.row_dims, A.col_dims)
    recon = Qm.conj().T @ (dvals[:, None] * Qm)
    resid = float(np.linalg.norm(M - recon))
    return SectorialDecomposition(Q, D, angles, resid)


def phase_witness(A: DenseTensor, i: int, decomposition: Optional[SectorialDecomposition] = None):
    """Unit tensor ``X`` whose Rayleigh quotient has angle ``Phi_i(A)`` (1-based ``i``)."""
    dec = decomposition or sectorial_decomposition(A)
    n = A.shape.rows
    if not 1 <= i <= n:
        raise RangeError(f"phase index {i} outside [1, {n}]")
    e = np.zeros(n, dtype=complex)
    e[i - 1] = 1.0
    x = np.linalg.solve(dec.Q.matrix, e)
    x = x / np.linalg.norm(x)
    return DenseTensor(x[:, None], A.row_dims, ())


def field_angle(A: DenseTensor, grid=DEFAULT_GRID, tol=DEFAULT_TOL) -> float:
    """Angle subtended at the origin by the supporting rays of ``W(A)``."""
    rep = classify(A, grid=grid, tol=tol)
    if rep.cls is Sectoriality.INDEFINITE:
        raise DomainError("0 is an interior point of the numerical range")
    return rep.field_angle


def nr_boundary(A: DenseTensor, m=256) -> NumericalRangeBoundary:
    """Trace ``m`` boundary points of ``W(A)`` with the support-function method."""
    _require_square(A, "nr_boundary")
    if m < 16:
        raise DomainError("at least 16 boundary samples are required")
    M = A.matrix
    curve = _Curve(M)
    ts = np.arange(m) * (TWO_PI / m)
    # top eigenvector of Herm(e^{-it} A) attains the support value h(t)
    try:
        w, V = np.linalg.eigh(curve.stack(ts))
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolver failed while tracing W(A): {exc}") from exc
    x = V[:, :, -1]
    pts = np.einsum("ki,ij,kj->k", x.conj(), M, x)
    return NumericalRangeBoundary(ts, pts, w[:, -1].copy(), x)
