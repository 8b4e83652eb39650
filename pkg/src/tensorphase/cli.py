"""``tensorphase`` command-line front end.

Every command prints exactly one JSON document on stdout; short human
summaries go to stderr.  Exit codes: 0 success or certificate pass, 1
certificate fail, 2 not applicable (for example a non-sectorial input),
64 usage, 65 bad input file, 70 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import List, Optional

import numpy as np

from . import analysis, control, fixtures, phase
from .errors import (
    DomainError,
    FormatError,
    NotSectorialError,
    NumericError,
    PreconditionError,
    RangeError,
    ShapeError,
    SizeError,
    TensorPhaseError,
    WellPosednessError,
)
from .io import dumps_report, read_system, read_tensor, tensor_to_json, write_system, write_tensor
from .tensor import identity, diagonal, rank

EXIT_OK, EXIT_FAIL, EXIT_NA = 0, 1, 2
EXIT_USAGE, EXIT_FORMAT, EXIT_NUMERIC = 64, 65, 70


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> List[int]:
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("dimensions must be positive integers")
    return vals


class _Ctx:
    def __init__(self, degrees: bool):
        self.degrees = degrees

    def ang(self, x):
        """Report an angle in ``(-pi, pi]`` (or degrees with ``--degrees``)."""
        if isinstance(x, (list, tuple, np.ndarray)):
            return [self.ang(v) for v in x]
        v = float(phase.wrap_to_pi(float(x)))
        return math.degrees(v) if self.degrees else v


def _emit(obj):
    sys.stdout.write(dumps_report(obj) + "\n")


def _note(msg):
    sys.stderr.write(msg.rstrip() + "\n")


def _grid(args):
    wmin = getattr(args, "wmin", 1e-3)
    wmax = getattr(args, "wmax", 1e3)
    pts = getattr(args, "points", None) or getattr(args, "grid_points", None) or 400
    try:
        return control.FrequencyGrid.log(wmin, wmax, pts)
    except DomainError as exc:
        raise UsageError(str(exc))


# -- commands ------------------------------------------------------------------
def cmd_info(a, ctx):
    T = read_tensor(a.tensor)
    out = {"row_dims": list(T.row_dims), "col_dims": list(T.col_dims),
           "even_square": T.even_square(), "frobenius_norm": float(np.linalg.norm(T.matrix))}
    if T.even_square():
        out["rank"] = rank(T)
    _emit(out)
    return EXIT_OK


def cmd_classify(a, ctx):
    T = read_tensor(a.tensor)
    rep = phase.classify(T, grid=a.grid, tol=a.tol)
    out = rep.to_dict()
    out["field_angle"] = math.degrees(rep.field_angle) if ctx.degrees else rep.field_angle
    if rep.positivity_arc:
        out["positivity_arc"] = ctx.ang(list(rep.positivity_arc))
    _emit(out)
    _note(f"{rep.cls.value}")
    return EXIT_OK


def cmd_phases(a, ctx):
    T = read_tensor(a.tensor)
    pv = phase.phases(T)
    _emit({"phases": ctx.ang(pv.phases), "gamma": ctx.ang(pv.gamma)})
    return EXIT_OK


def cmd_decompose(a, ctx):
    T = read_tensor(a.tensor)
    dec = phase.sectorial_decomposition(T)
    if a.out_q:
        write_tensor(dec.Q, a.out_q)
    if a.out_d:
        write_tensor(dec.D, a.out_d)
    _emit({"angles": ctx.ang(dec.angles), "residual": dec.residual,
           "relative_residual": dec.residual / max(float(np.linalg.norm(T.matrix)), 1e-300)})
    return EXIT_OK


def cmd_nrange(a, ctx):
    T = read_tensor(a.tensor)
    b = phase.nr_boundary(T, a.samples)
    if a.out:
        with open(a.out, "w", newline="") as fh:
            b.to_csv(fh)
    pts = b.points
    _emit({"samples": int(len(pts)), "convex": b.is_convex(),
           "re_range": [float(pts.real.min()), float(pts.real.max())],
           "im_range": [float(pts.imag.min()), float(pts.imag.max())]})
    return EXIT_OK


def cmd_compress(a, ctx):
    A, U = read_tensor(a.tensor), read_tensor(a.U)
    C = analysis.compress(A, U)
    out = {"tensor": tensor_to_json(C)}
    try:
        out["phases"] = ctx.ang(phase.phases(C).phases)
    except NotSectorialError:
        out["phases"] = None
    _emit(out)
    return EXIT_OK


def _report(rep):
    _emit(rep.to_json())
    if not rep.precondition:
        return EXIT_NA
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_interlace(a, ctx):
    return _report(analysis.check_interlacing(read_tensor(a.tensor), read_tensor(a.U)))


def cmd_compound(a, ctx):
    A = read_tensor(a.tensor)
    cs = analysis.compound_spectrum(A, a.k)
    _emit({"k": cs.k, "subsets": [[i + 1 for i in s] for s in cs.subsets],
           "values": [[v.real, v.imag] for v in cs.values]})
    return EXIT_OK


def cmd_majorize(a, ctx):
    return _report(analysis.majorization_check(read_tensor(a.A), read_tensor(a.B)))


def cmd_cone_sum(a, ctx):
    cone = analysis.ConeSpec.interval(a.alpha, a.beta)
    return _report(analysis.cone_closure_check(read_tensor(a.A), read_tensor(a.B), cone))


def cmd_robust(a, ctx):
    A = read_tensor(a.tensor)
    thr = analysis.rank_robustness_threshold(A, a.k)
    out = {"k": a.k, "threshold": thr}
    if a.construct:
        B = analysis.worst_case_B(A, a.k)
        lam = np.linalg.eigvals((A @ B).matrix)
        out["B"] = tensor_to_json(B)
        out["eigenvalues_near_minus_one"] = int(np.sum(np.abs(lam + 1) <= 1e-7))
    _emit(out)
    return EXIT_OK


def cmd_quasi_phases(a, ctx):
    pv = analysis.quasi_phases(read_tensor(a.tensor))
    _emit({"phases": ctx.ang(pv.phases), "gamma": ctx.ang(pv.gamma)})
    return EXIT_OK


def cmd_quasi_block(a, ctx):
    dec = analysis.quasi_blocked_decomposition(read_tensor(a.tensor), a.n, a.jn)
    _emit({"mode": dec.mode, "residual": dec.residual,
           "U": tensor_to_json(dec.U), "As": tensor_to_json(dec.As)})
    return EXIT_OK


def cmd_hinf(a, ctx):
    sysm = read_system(a.system)
    res = control.hinf_norm(sysm, _grid(a))
    _emit({"hinf": res.norm, "omega": res.omega})
    return EXIT_OK


def cmd_stability(a, ctx):
    G, H = read_system(a.G), read_system(a.H)
    grid = _grid(a)
    crit = a.criterion
    if crit in ("phase", "both"):
        rep = control.small_phase_check(G, H, grid, with_gain=crit == "both")
    else:
        gain = control.small_gain_check(G, H, grid)
        rep = control.StabilityReport([], small_gain=gain.verdict, hinf_g=gain.hinf_g,
                                      hinf_h=gain.hinf_h, oracle=control.closed_loop_oracle(G, H),
                                      grid_note=grid.describe())
    if a.out and rep.records:
        with open(a.out, "w", newline="") as fh:
            rep.to_csv(fh)
    out = rep.to_json()
    _emit(out)
    _note(f"small phase: {rep.small_phase}, small gain: {rep.small_gain}, oracle: {rep.oracle}")
    verdicts = [v for v in (rep.small_phase, rep.small_gain) if v is not None]
    if "pass" in verdicts:
        return EXIT_OK
    if "inapplicable" in verdicts and "fail" not in verdicts:
        return EXIT_NA
    return EXIT_FAIL


def cmd_cone_check(a, ctx):
    G = read_system(a.G)
    rep = control.cone_condition_check(G, a.h_num, a.h_den, _grid(a))
    _emit(rep.to_json())
    return EXIT_OK if rep.verdict == "pass" else EXIT_FAIL


def cmd_gen(a, ctx):
    kind = a.kind
    dims = tuple(a.dims) if a.dims else None
    if kind in ("example1", "example2"):
        thetas = a.thetas if a.thetas is not None else [0.3, 0.7, -0.4, 1.1]
        if len(thetas) != 4:
            raise UsageError("--thetas needs exactly four angles")
        obj = fixtures.example1(thetas) if kind == "example1" else fixtures.example2(thetas)
    else:
        if dims is None:
            raise UsageError(f"gen {kind} needs --dims")
        if kind == "identity":
            obj = identity(dims)
        elif kind == "diagonal":
            n = math.prod(dims)
            if a.thetas is not None:
                if len(a.thetas) != n:
                    raise UsageError(f"--thetas needs {n} angles for dims {dims}")
                vals = np.exp(1j * np.asarray(a.thetas))
            else:
                rng = np.random.default_rng(a.seed)
                vals = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            obj = diagonal(dims, vals)
        elif kind == "sectorial":
            lo, hi = a.interval if a.interval else (-1.0, 1.0)
            obj = fixtures.random_sectorial(dims, (lo, hi), a.seed)
        elif kind == "mlti-stable":
            obj = control.random_stable_system(dims, a.seed, a.system_kind)
        else:  # argparse restricts choices
            raise UsageError(f"unknown kind {kind}")
    is_system = isinstance(obj, control.MltiSystem)
    if a.out:
        (write_system if is_system else write_tensor)(obj, a.out)
        _emit({"kind": kind, "file": a.out})
    else:
        _emit(obj.to_json() if is_system else tensor_to_json(obj))
    return EXIT_OK


# -- parser ------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tensorphase", description="Phases of even-order tensors and MLTI stability checks.")
    p.add_argument("--degrees", action="store_true", help="report angles in degrees")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def add(name, fn, help_):
        s = sub.add_parser(name, help=help_)
        s.set_defaults(func=fn)
        return s

    s = add("info", cmd_info, "shape, norm and rank of a tensor")
    s.add_argument("tensor")
    s = add("classify", cmd_classify, "sectoriality class")
    s.add_argument("tensor")
    s.add_argument("--grid", type=int, default=phase.DEFAULT_GRID)
    s.add_argument("--tol", type=float, default=phase.DEFAULT_TOL)
    s = add("phases", cmd_phases, "phases of a sectorial tensor")
    s.add_argument("tensor")
    s = add("decompose", cmd_decompose, "sectorial decomposition A = Q^H D Q")
    s.add_argument("tensor")
    s.add_argument("--out-q")
    s.add_argument("--out-d")
    s = add("nrange", cmd_nrange, "numerical range boundary")
    s.add_argument("tensor")
    s.add_argument("--samples", type=int, default=256)
    s.add_argument("--out")
    s = add("compress", cmd_compress, "compression U^H A U")
    s.add_argument("tensor")
    s.add_argument("U")
    s = add("interlace", cmd_interlace, "phase interlacing of a compression")
    s.add_argument("tensor")
    s.add_argument("U")
    s = add("compound", cmd_compound, "k-th compound spectrum")
    s.add_argument("tensor")
    s.add_argument("-k", type=int, required=True)
    s = add("majorize", cmd_majorize, "product eigenvalue majorization")
    s.add_argument("A")
    s.add_argument("B")
    s = add("cone-sum", cmd_cone_sum, "closure of C[alpha, beta] under sums")
    s.add_argument("A")
    s.add_argument("B")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--beta", type=float, required=True)
    s = add("robust", cmd_robust, "rank robustness threshold")
    s.add_argument("tensor")
    s.add_argument("-k", type=int, required=True)
    s.add_argument("--construct", action="store_true", help="also build the worst-case B")
    s = add("quasi-phases", cmd_quasi_phases, "phases of a quasi-sectorial tensor")
    s.add_argument("tensor")
    s = add("quasi-block", cmd_quasi_block, "blocked quasi-sectorial decomposition")
    s.add_argument("tensor")
    s.add_argument("-n", type=int, required=True)
    s.add_argument("--jn", type=int, required=True)
    for name, fn, help_ in (("hinf", cmd_hinf, "H-infinity norm of a system"),
                            ("stability", cmd_stability, "small phase / small gain certificates"),
                            ("cone-check", cmd_cone_check, "stability against the cone C(h)")):
        s = add(name, fn, help_)
        if name == "hinf":
            s.add_argument("system")
        else:
            s.add_argument("G")
        if name == "stability":
            s.add_argument("H")
            s.add_argument("--criterion", choices=["phase", "gain", "both"], default="phase")
            s.add_argument("--grid-points", type=int, dest="points")
            s.add_argument("--out", help="CSV of the per-frequency records")
        else:
            s.add_argument("--points", type=int)
        if name == "cone-check":
            s.add_argument("--h-num", type=_floats, required=True)
            s.add_argument("--h-den", type=_floats, required=True)
        s.add_argument("--wmin", type=float, default=1e-3)
        s.add_argument("--wmax", type=float, default=1e3)
    s = add("gen", cmd_gen, "write a fixture tensor or system")
    s.add_argument("kind", choices=["identity", "diagonal", "sectorial", "example1", "example2",
                                    "mlti-stable"])
    s.add_argument("--dims", type=_ints)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--thetas", type=_floats)
    s.add_argument("--interval", type=_floats, help="phase interval lo,hi for sectorial")
    s.add_argument("--system-kind", choices=["passive", "lag", "random"], default="passive")
    s.add_argument("--out")
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "interval", None) is not None and len(args.interval) != 2:
        parser.error("--interval needs two numbers")
    ctx = _Ctx(args.degrees)
    try:
        return args.func(args, ctx)
    except UsageError as exc:
        _note(f"usage error: {exc}")
        return EXIT_USAGE
    except FormatError as exc:
        _emit({"error": "format", "message": str(exc)})
        return EXIT_FORMAT
    except NotSectorialError:
        _emit({"error": "not sectorial"})
        return EXIT_NA
    except (DomainError, PreconditionError, WellPosednessError) as exc:
        _emit({"error": "not applicable", "message": str(exc)})
        return EXIT_NA
    except (ShapeError, RangeError, SizeError) as exc:
        _emit({"error": "usage", "message": str(exc)})
        return EXIT_USAGE
    except NumericError as exc:
        _emit({"error": "numeric", "message": str(exc)})
        return EXIT_NUMERIC
    except TensorPhaseError as exc:
        _emit({"error": "numeric", "message": str(exc)})
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
