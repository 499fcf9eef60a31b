"""Command-line front end.

    gaugekit verify MODEL.gk [options]
    gaugekit algebra su3 --check
    gaugekit demo gws [options]
    gaugekit grammar

Exit status: 0 when every check passes, 1 when any check fails, 2 on
usage, file or parse errors.
"""
import argparse
import os
import re
import sys
from dataclasses import replace
from importlib import resources

import numpy as np

from . import __version__
from . import ewmodel
from . import modelfile as M
from . import verify as V
from .liealg import AlgebraError, basis_residuals, su_basis
from .report import emit_report

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _add_run_flags(p):
    p.add_argument("--seed", type=int)
    p.add_argument("--points", type=int)
    p.add_argument("--modes", type=int)
    p.add_argument("--amplitude", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--report", metavar="PATH", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--fd-crosscheck", action="store_true",
                   help="also compare analytic derivatives of U against finite differences")
    p.add_argument("--workers", type=int, default=1, help="checks run concurrently on this many threads")
    p.add_argument("--corrupt", action="append", choices=V.CHECK_NAMES, default=[],
                   help="run the named check in its deliberately broken mode (negative control)")


def build_parser():
    ap = argparse.ArgumentParser(prog="gaugekit", description="Numerical gauge-invariance verifier.")
    ap.add_argument("--version", action="version", version=f"gaugekit {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("verify", help="run the check suite on a model file")
    p.add_argument("model", help="path to a .gk file, or the name of a shipped model")
    _add_run_flags(p)
    p = sub.add_parser("algebra", help="inspect an SU(n) generator basis")
    p.add_argument("group", help="e.g. su2, su3")
    p.add_argument("--check", action="store_true", help="report invariant residuals and set the exit status")
    p = sub.add_parser("demo", help="built-in models")
    p.add_argument("name", choices=("gws",))
    _add_run_flags(p)
    sub.add_parser("grammar", help="print the model-file grammar")
    return ap


def shipped_models():
    d = resources.files("gaugekit").joinpath("models")
    return sorted(f.name for f in d.iterdir() if f.name.endswith(".gk"))


def resolve_model_path(name):
    if os.path.isfile(name):
        return name
    base = os.path.basename(name)
    if not base.endswith(".gk"):
        base += ".gk"
    if base in shipped_models():
        return str(resources.files("gaugekit").joinpath("models", base))
    raise UsageError(f"model file not found: {name}")


def make_options(args, file_options=None):
    opts = dict(file_options or {})
    for k in ("seed", "points", "modes", "amplitude", "tol"):
        v = getattr(args, k)
        if v is not None:
            opts[k] = v
    if opts.get("points", 1) < 1 or opts.get("modes", 0) < 0:
        raise UsageError("--points must be >= 1 and --modes >= 0")
    if opts.get("amplitude", 1.0) <= 0 or opts.get("tol", 1.0) <= 0:
        raise UsageError("--amplitude and --tol must be positive")
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    return replace(V.VerifyOptions(), **opts, workers=args.workers,
                   fd_crosscheck=args.fd_crosscheck, corrupt=frozenset(args.corrupt))


def _write(data, path, out):
    if path:
        with open(path, "wb") as fh:
            fh.write(data)
    else:
        out.write(data.decode("utf-8"))
        out.flush()


def cmd_verify(args, out):
    path = resolve_model_path(args.model)
    try:
        doc = M.load_model_file(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    model = M.to_model_spec(doc)
    report = V.run_suite(model, make_options(args, M.option_overrides(doc)))
    _write(emit_report(report, args.format), args.report, out)
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_demo(args, out):
    report = ewmodel.run_ew_suite(ewmodel.build_ew_model(), make_options(args))
    _write(emit_report(report, args.format), args.report, out)
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_algebra(args, out):
    m = re.fullmatch(r"su(\d+)", args.group.strip().lower())
    if not m:
        raise UsageError(f"expected a group like su2 or su3, got {args.group!r}")
    basis = su_basis(int(m.group(1)))
    if not args.check:
        with np.printoptions(precision=4, suppress=True):
            for a, t in enumerate(basis.generators):
                out.write(f"T_{a + 1} =\n{t}\n")
        return EXIT_OK
    r = basis_residuals(basis)
    for k, v in sorted(r.items()):
        out.write(f"{k:<14} {v:.3e}\n")
    ok = max(r.values()) <= V.ALGEBRA_TOL
    out.write(f"{basis.label()}: {'PASS' if ok else 'FAIL'} (tolerance {V.ALGEBRA_TOL:g})\n")
    return EXIT_OK if ok else EXIT_FAIL


def main(argv=None, out=None):
    out = out or sys.stdout
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.command == "verify":
            return cmd_verify(args, out)
        if args.command == "demo":
            return cmd_demo(args, out)
        if args.command == "algebra":
            return cmd_algebra(args, out)
        out.write(M.GRAMMAR)
        return EXIT_OK
    except (UsageError, M.ModelFileError, AlgebraError, V.G.ModelError, ValueError) as exc:
        sys.stderr.write(f"gaugekit: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
