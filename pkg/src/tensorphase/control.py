"""MLTI state-space systems, frequency sweeps and feedback stability certificates.

The loop is the negative-feedback interconnection

    e1 = w1 - G e2,    e2 = w2 + H e1,

whose closed-loop map from ``(w1, w2)`` to ``(e1, e2)`` involves
``(I + H G)^{-1}``.  Certificates (small phase, small gain) are checked on a
finite frequency grid; :func:`closed_loop_oracle` gives the ground truth
from the eigenvalues of the closed-loop state tensor.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import numerics
from ._parallel import parallel_map
from .analysis import quasi_phases
from .blocks import block_unfold_permutation
from .errors import (
    DomainError,
    NotSectorialError,
    NumericError,
    PoleError,
    ShapeError,
    SingularityError,
    WellPosednessError,
)
from .phase import PhaseVector, classify, matrix_phases, wrap_to_pi
from .tensor import DenseTensor, _dims

__all__ = [
    "MltiSystem",
    "FrequencyGrid",
    "FrequencyPhase",
    "HinfResult",
    "StabilityRecord",
    "StabilityReport",
    "ConeCheckReport",
    "transfer_at",
    "hinf_norm",
    "freq_phase_profile",
    "small_phase_check",
    "small_gain_check",
    "gang_of_four",
    "closed_loop_oracle",
    "cone_condition_check",
    "random_stable_system",
    "STABILITY_CSV_HEADER",
]

STABLE_TOL = 1e-10
ORACLE_TOL = 1e-9
MARGIN_TOL = 1e-9
STABILITY_CSV_HEADER = [
    "omega", "phimax_g", "phimin_g", "phimax_h", "phimin_h",
    "margin_hi", "margin_lo", "sectorial_g", "sectorial_h",
]


@dataclass(frozen=True)
class MltiSystem:
    """``dX/dt = A*X + B*U``, ``Y = C*X + D*U`` with tensors over one dimension tuple."""

    A: DenseTensor
    B: DenseTensor
    C: DenseTensor
    D: DenseTensor

    def __post_init__(self):
        shapes = {self.A.shape, self.B.shape, self.C.shape, self.D.shape}
        if len(shapes) != 1 or not self.A.even_square():
            raise ShapeError("A, B, C, D must share one even-order square shape")

    @property
    def dims(self):
        return self.A.row_dims

    @property
    def size(self) -> int:
        return self.A.shape.rows

    def poles(self) -> np.ndarray:
        return numerics.general_eig(self.A.matrix)

    def is_stable(self, tol=STABLE_TOL) -> bool:
        return bool(np.all(self.poles().real < -tol))

    @classmethod
    def from_matrices(cls, A, B, C, D, dims):
        dims = _dims(dims)
        return cls(*(DenseTensor(M, dims, dims) for M in (A, B, C, D)))

    @classmethod
    def scalar(cls, a, b, c, d, dims):
        """Each tensor a scalar multiple of the identity: ``G(s) = (d + cb/(s - a)) I``."""
        n = math.prod(_dims(dims))
        eye = np.eye(n)
        return cls.from_matrices(a * eye, b * eye, c * eye, d * eye, dims)

    @classmethod
    def static(cls, D: DenseTensor):
        """Memoryless system ``G(s) = D``."""
        n = D.shape.rows
        return cls.from_matrices(-np.eye(n), np.zeros((n, n)), np.zeros((n, n)), D.matrix, D.row_dims)

    def to_json(self):
        from .io import tensor_to_json

        return {k: tensor_to_json(getattr(self, k)) for k in "ABCD"}


@dataclass(frozen=True)
class FrequencyGrid:
    """Nonnegative, strictly increasing frequencies; negative ones follow by conjugation."""

    omegas: np.ndarray
    includes_infinity: bool = True

    def __post_init__(self):
        w = np.asarray(self.omegas, dtype=float).ravel()
        if w.size == 0 and not self.includes_infinity:
            raise DomainError("empty frequency grid")
        if np.any(~np.isfinite(w)) or np.any(w < 0) or np.any(np.diff(w) <= 0):
            raise DomainError("frequencies must be finite, nonnegative and strictly increasing")
        object.__setattr__(self, "omegas", w)

    @classmethod
    def default(cls, points=400, wmin=1e-3, wmax=1e3):
        return cls.log(wmin, wmax, points)

    @classmethod
    def log(cls, wmin, wmax, points, include_zero=True, include_infinity=True):
        if not 0 < wmin < wmax or points < 2:
            raise DomainError("need 0 < wmin < wmax and at least 2 points")
        w = np.logspace(math.log10(wmin), math.log10(wmax), int(points))
        if include_zero:
            w = np.concatenate([[0.0], w])
        return cls(w, include_infinity)

    def points(self) -> List[float]:
        pts = [float(w) for w in self.omegas]
        return pts + [math.inf] if self.includes_infinity else pts

    def describe(self) -> str:
        w = self.omegas
        pos = w[w > 0]
        span = f"[{pos.min():.3g}, {pos.max():.3g}]" if pos.size else "none"
        return (f"{len(w)} finite points, positive span {span}, zero={'yes' if (w == 0).any() else 'no'}, "
                f"infinity={'yes' if self.includes_infinity else 'no'}; behaviour between points is not certified")


def _default_grid(grid):
    if grid is None:
        return FrequencyGrid.default()
    if isinstance(grid, FrequencyGrid):
        return grid
    return FrequencyGrid(np.asarray(grid, dtype=float))


def transfer_at(sys: MltiSystem, s) -> DenseTensor:
    """``G(s) = D + C (sI - A)^{-1} B``; ``s = inf`` returns ``D``."""
    if isinstance(s, float) and math.isinf(s) or (np.isscalar(s) and np.isinf(s)):
        return sys.D
    n = sys.size
    R = complex(s) * np.eye(n) - sys.A.matrix
    try:
        X = numerics.solve(R, sys.B.matrix)
    except SingularityError as exc:
        raise PoleError(f"s = {s} is (numerically) a pole of the system") from exc
    G = sys.D.matrix + sys.C.matrix @ X
    return DenseTensor(G, sys.dims, sys.dims)


def _transfer_matrix(sys: MltiSystem, w: float) -> np.ndarray:
    return transfer_at(sys, math.inf if math.isinf(w) else 1j * w).matrix


class HinfResult(NamedTuple):
    norm: float
    omega: float


def hinf_norm(sys: MltiSystem, grid=None) -> HinfResult:
    """``sup_w sigma_max(G(iw))`` from a grid sweep refined around the argmax."""
    if not sys.is_stable():
        raise DomainError("H-infinity norm needs an internally stable system")
    grid = _default_grid(grid)
    pts = grid.points()

    def sig(w):
        return numerics.svd_extremes(_transfer_matrix(sys, w))[0]

    vals = np.array(parallel_map(sig, pts))
    k = int(np.argmax(vals))
    best, best_w = float(vals[k]), pts[k]
    finite = [w for w in pts if math.isfinite(w)]
    if finite and math.isfinite(best_w):
        j = finite.index(best_w)
        lo = finite[j - 1] if j > 0 else 0.0
        hi = finite[j + 1] if j + 1 < len(finite) else 2.0 * max(best_w, 1.0)
        if hi > lo:
            res = minimize_scalar(lambda w: -sig(w), bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-10 * max(1.0, hi)})
            if -res.fun > best:
                best, best_w = float(-res.fun), float(res.x)
    return HinfResult(best, best_w)


@dataclass(frozen=True)
class FrequencyPhase:
    omega: float
    sectorial: bool
    phi_max: float
    phi_min: float
    ill_conditioned: bool = False


def _phase_or_none(M) -> Optional[PhaseVector]:
    try:
        return matrix_phases(M)
    except (NotSectorialError, SingularityError, NumericError):
        return None


def _continue(pv: PhaseVector, prev_gamma: Optional[float]) -> np.ndarray:
    if prev_gamma is None:
        return pv.phases
    shift = pv.gamma - (prev_gamma + wrap_to_pi(pv.gamma - prev_gamma))
    return pv.phases - shift


def freq_phase_profile(sys: MltiSystem, grid=None) -> List[FrequencyPhase]:
    """Phase extremes of ``G(iw)`` at each grid point and at infinity.

    Phases are continued along the grid: each point's phase center is
    placed within ``pi`` of the previous sectorial point's center, starting
    from the principal branch at the first point.
    """
    if not sys.is_stable():
        raise DomainError("frequency profile needs an internally stable system")
    grid = _default_grid(grid)
    pts = grid.points()
    pvs = parallel_map(lambda w: _phase_or_none(_transfer_matrix(sys, w)), pts)
    out, prev = [], None
    for w, pv in zip(pts, pvs):
        if pv is None:
            out.append(FrequencyPhase(w, False, math.nan, math.nan))
            continue
        ph = _continue(pv, prev)
        prev = 0.5 * (ph[0] + ph[-1])
        out.append(FrequencyPhase(w, True, float(ph[0]), float(ph[-1]), pv.ill_conditioned))
    return out


@dataclass(frozen=True)
class StabilityRecord:
    omega: float
    phimax_g: float
    phimin_g: float
    phimax_h: float
    phimin_h: float
    sectorial_g: bool
    sectorial_h: bool
    skipped: bool = False

    @property
    def margin_hi(self) -> float:
        return math.pi - self.phimax_g - self.phimax_h

    @property
    def margin_lo(self) -> float:
        return self.phimin_g + self.phimin_h + math.pi


@dataclass
class StabilityReport:
    records: List[StabilityRecord]
    small_phase: Optional[str] = None
    small_gain: Optional[str] = None
    oracle: Optional[str] = None
    hinf_g: Optional[float] = None
    hinf_h: Optional[float] = None
    grid_note: str = ""
    notes: List[str] = field(default_factory=list)

    def min_margins(self):
        recs = [r for r in self.records if r.sectorial_g and r.sectorial_h and not r.skipped]
        if not recs:
            return math.nan, math.nan
        return min(r.margin_hi for r in recs), min(r.margin_lo for r in recs)

    def to_json(self):
        hi, lo = self.min_margins()
        return {
            "small_phase": self.small_phase,
            "small_gain": self.small_gain,
            "oracle": self.oracle,
            "hinf_g": self.hinf_g,
            "hinf_h": self.hinf_h,
            "min_margin_hi": hi,
            "min_margin_lo": lo,
            "grid": self.grid_note,
            "notes": list(self.notes),
        }

    def to_csv(self, fh=None) -> Optional[str]:
        own = fh is None
        buf = io.StringIO() if own else fh
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(STABILITY_CSV_HEADER)
        f = lambda x: f"{x:.17g}"  # noqa: E731
        for r in self.records:
            w.writerow([f(r.omega), f(r.phimax_g), f(r.phimin_g), f(r.phimax_h), f(r.phimin_h),
                        f(r.margin_hi), f(r.margin_lo), int(r.sectorial_g), int(r.sectorial_h)])
        return buf.getvalue() if own else None


def _require_stable(*systems):
    for name, s in systems:
        if not s.is_stable():
            raise DomainError(f"{name} is not internally stable")


def _same_dims(G, H):
    if G.dims != H.dims:
        raise ShapeError(f"systems act on different dimensions {G.dims} and {H.dims}")


def small_phase_check(G: MltiSystem, H: MltiSystem, grid=None, with_oracle=True,
                      with_gain=False) -> StabilityReport:
    """Small phase certificate on a frequency grid.

    ``pass`` needs both systems sectorial at every grid point and
    ``Phi_max(G) + Phi_max(H) < pi``, ``Phi_min(G) + Phi_min(H) > -pi``
    with margin ``1e-9``.  A pass is a sufficient condition only.  At
    infinity the check is skipped when ``D_G`` or ``D_H`` is zero, since the
    loop gain vanishes there and ``I + H G = I``.
    """
    _same_dims(G, H)
    _require_stable(("G", G), ("H", H))
    grid = _default_grid(grid)
    pg = freq_phase_profile(G, grid)
    ph = freq_phase_profile(H, grid)
    records, notes = [], []
    for a, b in zip(pg, ph):
        skip = False
        if math.isinf(a.omega) and (not np.any(G.D.matrix) or not np.any(H.D.matrix)):
            skip = True
            notes.append("infinity skipped: loop gain vanishes there")
        records.append(StabilityRecord(a.omega, a.phi_max, a.phi_min, b.phi_max, b.phi_min,
                                       a.sectorial, b.sectorial, skip))
    used = [r for r in records if not r.skipped]
    if any(not (r.sectorial_g and r.sectorial_h) for r in used):
        verdict = "inapplicable"
    elif all(r.margin_hi > MARGIN_TOL and r.margin_lo > MARGIN_TOL for r in used):
        verdict = "pass"
    else:
        verdict = "fail"
    rep = StabilityReport(records, small_phase=verdict, grid_note=grid.describe(), notes=notes)
    if verdict == "pass":
        rep.notes.append("pass is a sufficient certificate on the grid only")
    if with_gain:
        gain = small_gain_check(G, H, grid)
        rep.small_gain, rep.hinf_g, rep.hinf_h = gain.verdict, gain.hinf_g, gain.hinf_h
    if with_oracle:
        rep.oracle = closed_loop_oracle(G, H)
    return rep


class GainVerdict(NamedTuple):
    verdict: str
    hinf_g: float
    hinf_h: float


def small_gain_check(G: MltiSystem, H: MltiSystem, grid=None) -> GainVerdict:
    """``pass`` iff ``||G||_inf ||H||_inf < 1 - 1e-9``."""
    _same_dims(G, H)
    _require_stable(("G", G), ("H", H))
    g = hinf_norm(G, grid).norm
    h = hinf_norm(H, grid).norm
    return GainVerdict("pass" if g * h < 1.0 - MARGIN_TOL else "fail", g, h)


def _loop_matrices(G: MltiSystem, H: MltiSystem):
    n = G.size
    I = np.eye(n)
    Dg, Dh = G.D.matrix, H.D.matrix
    M = np.block([[I, Dg], [-Dh, I]])
    if numerics.condition_number(I + Dh @ Dg) > numerics.MAX_CONDITION:
        raise WellPosednessError("I + D_H D_G is singular; the interconnection is ill-posed")
    Minv = np.linalg.solve(M, np.eye(2 * n))
    Z = np.zeros((n, n))
    Csel = np.block([[-G.C.matrix, Z], [Z, H.C.matrix]])
    Bsel = np.block([[Z, G.B.matrix], [H.B.matrix, Z]])
    A0 = np.block([[G.A.matrix, Z], [Z, H.A.matrix]])
    return A0 + Bsel @ Minv @ Csel, Bsel @ Minv, Minv @ Csel, Minv


def closed_loop_oracle(G: MltiSystem, H: MltiSystem) -> str:
    """``stable``, ``unstable`` or ``ill-posed`` from the closed-loop state tensor."""
    _same_dims(G, H)
    try:
        Acl, _, _, _ = _loop_matrices(G, H)
    except WellPosednessError:
        return "ill-posed"
    lam = numerics.general_eig(Acl)
    return "stable" if np.all(lam.real < -ORACLE_TOL) else "unstable"


def gang_of_four(G: MltiSystem, H: MltiSystem) -> MltiSystem:
    """Realization of the map ``(w1, w2) -> (e1, e2)`` as a mode-1 blocked system."""
    _same_dims(G, H)
    mats = _loop_matrices(G, H)
    P = block_unfold_permutation(G.dims, 1)
    dims = list(G.dims)
    dims[0] *= 2
    return MltiSystem.from_matrices(*(P.conjugate(M) for M in mats), tuple(dims))


# -- cone condition ----------------------------------------------------------
@dataclass
class ConeCheckReport:
    verdict: str
    omegas: List[float]
    phi_max: List[float]
    phi_min: List[float]
    angle_h: List[float]
    quasi: List[bool]

    def to_json(self):
        return {"verdict": self.verdict, "points": len(self.omegas),
                "all_quasi_sectorial": bool(all(self.quasi))}


def _stable_poly(coeffs, what):
    c = np.trim_zeros(np.asarray(coeffs, dtype=float), "f")
    if c.size == 0:
        raise DomainError(f"{what} polynomial is zero")
    roots = np.roots(c)
    if np.any(roots.real >= 0):
        raise DomainError(f"{what} has roots outside the open left half-plane")
    return c


def cone_condition_check(G: MltiSystem, h_num, h_den, grid=None, tol=MARGIN_TOL) -> ConeCheckReport:
    """Sufficient condition for stability against every ``H`` in the cone ``C(h)``.

    ``h = h_num / h_den`` with coefficients highest degree first; ``h`` and
    ``1/h`` must be stable and proper.  Requires ``G(iw)`` quasi-sectorial with
    ``Phi_max <= pi/2 - angle h`` and ``Phi_min >= -pi/2 - angle h`` on the grid.
    """
    num = _stable_poly(h_num, "h numerator")
    den = _stable_poly(h_den, "h denominator")
    if num.size != den.size:
        raise DomainError("h and 1/h must both be proper (equal degrees)")
    _require_stable(("G", G))
    grid = _default_grid(grid)
    pts = grid.points()
    hv = [num[0] / den[0] if math.isinf(w) else np.polyval(num, 1j * w) / np.polyval(den, 1j * w)
          for w in pts]
    ang = np.unwrap(np.angle(np.asarray(hv, dtype=complex)))

    def at(w):
        M = _transfer_matrix(G, w)
        if not np.any(np.abs(M) > 0):
            return "zero", None
        rep = classify(DenseTensor(M, G.dims, G.dims))
        if rep.sectorial:
            return "ok", matrix_phases(M)
        if rep.quasi_sectorial:
            try:
                return "ok", quasi_phases(DenseTensor(M, G.dims, G.dims))
            except (DomainError, NumericError):
                return "bad", None
        return "bad", None

    results = parallel_map(at, pts)
    pmax, pmin, quasi, prev = [], [], [], None
    verdict = "pass"
    for (status, pv), a in zip(results, ang):
        if status == "zero":
            pmax.append(math.nan)
            pmin.append(math.nan)
            quasi.append(True)
            continue
        if status == "bad":
            pmax.append(math.nan)
            pmin.append(math.nan)
            quasi.append(False)
            verdict = "fail"
            continue
        ph = _continue(pv, prev)
        prev = 0.5 * (ph[0] + ph[-1])
        pmax.append(float(ph[0]))
        pmin.append(float(ph[-1]))
        quasi.append(True)
        if ph[0] > 0.5 * math.pi - a + tol or ph[-1] < -0.5 * math.pi - a - tol:
            verdict = "fail"
    return ConeCheckReport(verdict, pts, pmax, pmin, ang.tolist(), quasi)


# -- random systems ----------------------------------------------------------
def random_stable_system(dims, seed=None, kind="random") -> MltiSystem:
    """Seeded real-coefficient stable system.

    ``kind``:
      * ``"passive"``: ``A + A^T < 0``, ``C = B^T``, ``D + D^T > 0``, so every
        ``G(iw)`` has a positive definite Hermitian part;
      * ``"lag"``: a perturbed first-order lag ``b/(s + a)`` per channel;
      * ``"random"``: unstructured, with the spectrum of ``A`` shifted left.
    """
    dims = _dims(dims)
    n = math.prod(dims)
    rng = np.random.default_rng(seed)
    I = np.eye(n)
    if kind == "passive":
        X = rng.standard_normal((n, n))
        S = rng.standard_normal((n, n))
        A = -(X @ X.T / n + rng.uniform(0.1, 1.0) * I) + (S - S.T)
        B = rng.standard_normal((n, n))
        Y = rng.standard_normal((n, n))
        T = rng.standard_normal((n, n))
        D = Y @ Y.T / n + rng.uniform(0.05, 0.5) * I + 0.5 * (T - T.T)
        return MltiSystem.from_matrices(A, B, B.T, D, dims)
    if kind == "lag":
        a = rng.uniform(0.2, 5.0)
        b = rng.uniform(0.2, 3.0)
        eps = rng.uniform(0.0, 0.3)
        A = -a * I + eps * a * rng.standard_normal((n, n)) / math.sqrt(n)
        B = b * (I + eps * rng.standard_normal((n, n)) / math.sqrt(n))
        C = I + eps * rng.standard_normal((n, n)) / math.sqrt(n)
        D = rng.uniform(0.0, 0.3) * b / a * (I + eps * rng.standard_normal((n, n)) / math.sqrt(n))
        sysm = MltiSystem.from_matrices(A, B, C, D, dims)
        if sysm.is_stable():
            return sysm
        shift = np.max(numerics.general_eig(A).real) + 0.1 * a
        return MltiSystem.from_matrices(A - shift * I, B, C, D, dims)
    if kind == "random":
        A = rng.standard_normal((n, n))
        shift = np.max(numerics.general_eig(A).real) + rng.uniform(0.1, 2.0)
        A = A - shift * I
        B, C = rng.standard_normal((n, n)), rng.standard_normal((n, n))
        D = rng.standard_normal((n, n)) * rng.uniform(0.0, 1.0)
        return MltiSystem.from_matrices(A, B, C, D, dims)
    raise DomainError(f"unknown system kind {kind!r}")
