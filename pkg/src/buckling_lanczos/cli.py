"""Command line front end: ``buckling-lanczos {solve,count,canonical,gen,demo}``.

Exit codes: 0 success (and MATCH), 1 I/O or unexpected error, 2 usage,
3 singular shift or endpoint on the spectrum, 4 count mismatch,
5 iteration limit, 6 invalid input data, 7 Lanczos breakdown.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import canonical, counting, lanczos, matio, problems, transform
from .errors import (AlphaOnSpectrum, BucklingError, CouplingPresent, InputError,
                     LanczosBreakdown, NonpositiveNorm, NotSemidefinite,
                     PermutationFailure, ShiftIsZero, SingularProjectedBlock,
                     SingularShift)
from .pencil import Pencil

log = logging.getLogger(__name__)

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_SINGULAR, EXIT_MISMATCH, EXIT_MAXIT, EXIT_DATA, EXIT_BREAKDOWN = range(8)

_ERROR_CODES = [
    (ShiftIsZero, EXIT_USAGE),
    ((SingularShift, AlphaOnSpectrum), EXIT_SINGULAR),
    ((LanczosBreakdown, NonpositiveNorm), EXIT_BREAKDOWN),
    ((InputError, NotSemidefinite, CouplingPresent, PermutationFailure,
      SingularProjectedBlock), EXIT_DATA),
]


class UsageError(Exception):
    pass


def exit_code_for(exc: BaseException) -> int:
    for types, code in _ERROR_CODES:
        if isinstance(exc, types):
            return code
    if isinstance(exc, UsageError):
        return EXIT_USAGE
    return EXIT_IO


def _pair(text: str):
    try:
        a, b = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'a,b', got {text!r}")
    return a, b


def _add_bundle_args(p):
    p.add_argument("--bundle", metavar="DIR", help="directory with K.mtx, KG.mtx, ZN.mtx, ZC.mtx")
    p.add_argument("--K", dest="K_path", metavar="PATH")
    p.add_argument("--KG", dest="KG_path", metavar="PATH")
    p.add_argument("--ZN", dest="ZN_path", metavar="PATH")
    p.add_argument("--ZC", dest="ZC_path", metavar="PATH")


def _load(args) -> matio.ProblemBundle:
    if args.bundle:
        return matio.read_bundle_dir(args.bundle)
    if not (args.K_path and args.KG_path):
        raise UsageError("give --bundle DIR or both --K and --KG")
    return matio.read_bundle(args.K_path, args.KG_path, args.ZN_path, args.ZC_path)


def _load_pencil(args) -> Pencil:
    bundle = _load(args)
    rep = matio.validate_bundle(bundle)
    if not rep.passed:
        raise InputError("nullspace bases fail validation: "
                         f"max ||K z||/(||K|| ||z||) = {max(rep.k_ratios):.3e}")
    return Pencil.from_bundle(bundle)


def cmd_solve(args) -> int:
    if args.shift == 0.0:
        raise ShiftIsZero("--shift must be nonzero")
    if args.nev is not None and args.nev < 1:
        raise UsageError("--nev must be >= 1")
    if args.interval and not args.interval[0] < args.interval[1]:
        raise UsageError("--interval needs a < b")
    pencil = _load_pencil(args)
    op = transform.build(pencil, args.shift, args.method)
    M = transform.build_inner_product(pencil)
    count = None
    want = None
    if args.interval:
        count = counting.count_interval(pencil, *args.interval, method=args.method)
        want = count.count
    nev = args.nev if args.nev is not None else (None if args.interval else 1)
    maxit = min(args.maxit, pencil.n)
    if args.interval and want == 0:
        result = None
    else:
        result = lanczos.run(op, M, KG=pencil.KG, tol=args.tol, maxit=maxit, nev=nev,
                             interval=args.interval, want=want, seed=args.seed)
    verdict = None
    if count is not None:
        verdict = counting.validate(count, result.converged if result else [])
    meta = {"method": transform.Method(args.method).value, "tol": args.tol, "seed": args.seed,
            "nev": nev, "maxit": maxit, "n": pencil.n}
    matio.write_report(args.report, result, count, verdict, meta)
    if args.trace and result is not None:
        matio.write_trace(args.trace, result.trace)
    if verdict is not None:
        return EXIT_OK if verdict.ok else EXIT_MISMATCH
    if nev is not None and len(result.converged) < nev:
        return EXIT_MAXIT
    return EXIT_OK


def cmd_count(args) -> int:
    pencil = _load_pencil(args)
    if args.interval:
        rep = counting.count_interval(pencil, *args.interval, method=args.method)
    elif args.alpha is not None:
        rep = counting.count_half_interval(pencil, args.alpha, method=args.method)
    else:
        raise UsageError("give --interval a,b or --alpha")
    print(json.dumps({"schema": matio.SCHEMA_VERSION, **rep.to_dict()}, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_canonical(args) -> int:
    bundle = _load(args)
    K, KG = bundle.K_dense, bundle.KG_dense
    A, B = (KG, K) if args.reverse else (K, KG)
    cf = canonical.reduce(A, B, tau_rank=args.tol)
    ra, rb = cf.residuals(A, B)
    flag = canonical.is_simultaneously_diagonalizable(cf)
    doc = {
        "schema": matio.SCHEMA_VERSION,
        "reverse": bool(args.reverse),
        "n0": cf.n0, "n1": cf.n1, "n2": cf.n2, "n3": cf.n3,
        "Lambda1": [float(v) for v in cf.Lambda1],
        "Lambda2": [float(v) for v in cf.Lambda2],
        "residual_A": float(ra), "residual_B": float(rb),
        "simultaneously_diagonalizable": flag,
    }
    if not flag:
        doc["note"] = "not simultaneously diagonalizable"
    print(json.dumps(doc, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.kind == "example1":
        gp = problems.gen_example1(args.n, args.m, args.seed)
    elif args.kind == "tiny":
        gp = problems.tiny_pencil()
    else:
        gp = problems.random_singular(args.seed, n_max=args.n)
    out = Path(args.out)
    matio.write_bundle_dir(out, gp.bundle)
    (out / "truth.json").write_text(json.dumps(gp.truth_dict(), indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_demo(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    gp = problems.gen_example1(args.n, args.m, args.seed)
    runs = [("M", None), ("K", None)]
    if args.restart is not None:
        runs.append(("K", args.restart))
    summary = {}
    for inner, rs in runs:
        d = problems.demo_norm_growth(args.n, args.m, args.shift, args.steps, inner, rs,
                                      args.seed, gp=gp)
        tag = f"{inner}" + ("" if rs is None else f"_restart{rs}")
        matio.write_trace(out / f"trace_{tag}.csv", d.rows())
        matio.write_trace(out / f"eta_{tag}.csv", d.eta_rows(), header=("step", "eta"))
        summary[tag] = {"max_vnorm": d.max_vnorm, "events": len(d.events)}
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="buckling-lanczos",
                                     description="Eigenpairs of singular buckling pencils")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="shift-invert Lanczos near a shift")
    _add_bundle_args(p)
    p.add_argument("--shift", type=float, required=True)
    p.add_argument("--interval", type=_pair, metavar="a,b")
    p.add_argument("--nev", type=int)
    p.add_argument("--tol", type=float, default=lanczos.DEFAULT_TOL)
    p.add_argument("--maxit", type=int, default=300)
    p.add_argument("--method", choices=["augmented", "reduced"], default="augmented")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", default="-", metavar="PATH")
    p.add_argument("--trace", metavar="PATH")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("count", help="eigenvalue count on an interval")
    _add_bundle_args(p)
    p.add_argument("--interval", type=_pair, metavar="a,b")
    p.add_argument("--alpha", type=float)
    p.add_argument("--method", choices=["augmented", "reduced"], default="augmented")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("canonical", help="canonical block form of a semidefinite pencil")
    _add_bundle_args(p)
    p.add_argument("--reverse", action="store_true", help="reduce (K_G, K) instead of (K, K_G)")
    p.add_argument("--tol", type=float, default=canonical.TAU_RANK)
    p.set_defaults(func=cmd_canonical)

    p = sub.add_parser("gen", help="write a generated pencil bundle")
    p.add_argument("--kind", choices=["example1", "singular", "tiny"], default="singular")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, metavar="DIR")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("demo", help="Lanczos vector norm growth, K versus M inner product")
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--shift", type=float, default=-0.6)
    p.add_argument("--steps", type=int, default=40)
    p.add_argument("--restart", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, metavar="DIR")
    p.set_defaults(func=cmd_demo)
    return parser


def _glue_values(argv):
    """Attach values to numeric flags so ``-1,1`` or ``-0.6`` is not read as an option."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in ("--interval", "--alpha", "--shift"):
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_glue_values(argv))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (BucklingError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
