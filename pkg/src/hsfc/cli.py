"""Command-line interface.

Subcommands: ``coeffs``, ``extend``, ``norm``, ``apply``, ``verify`` and
``estimate-alpha``. Exit codes: 0 success, 1 usage error, 2 precondition
failure, 3 quadrature non-convergence, 4 ``verify`` discrepancy above the
threshold.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .errors import HSFCError, PreconditionError
from .hs_engine import OperatorHandle, QuadratureConfig, hs_apply_detailed, gamma_apply_detailed
from .jets import Domain, Jet, parse_jet_spec
from .matrix_io import format_entry, format_matrix, read_matrix
from .norms import an_norm
from .oracle import estimate_growth, matrix_function_oracle
from .seeley import make_seeley_coefficients, seeley_extend
from .aae import alternate_psi, default_psi

EXIT_USAGE = 1
EXIT_MISMATCH = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _fmt(v: complex, real: bool) -> str:
    v = complex(v)
    return repr(float(v.real)) if real else format_entry(v)


def _order_arg(value: str):
    if value == "auto":
        return None
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or an integer, got {value!r}") from None
    if n < 0:
        raise argparse.ArgumentTypeError("order must be nonnegative")
    return n


def _half_line(jet: Jet) -> Jet:
    return jet if jet.domain is Domain.HALF_LINE else jet.restrict_to_half_line()


def _psi(name: str) -> Jet:
    return default_psi() if name == "default" else alternate_psi()


def cmd_coeffs(args, out):
    c = make_seeley_coefficients(args.K)
    for k, a in enumerate(c.a):
        print(f"a[{k}] = {a}", file=out)
    for k, b in enumerate(c.b):
        print(f"b[{k}] = {b}", file=out)
    for k, a in enumerate(c.a_float):
        print(f"a_decimal[{k}] = {float(a)!r}", file=out)
    return 0


def cmd_extend(args, out):
    f = _half_line(parse_jet_spec(args.f))
    coeffs = make_seeley_coefficients(args.K)
    ext = seeley_extend(f, coeffs=coeffs)
    order = min(args.order, ext.max_order) if ext.max_order is not None else args.order
    try:
        xs = np.array([float(t) for t in Path(args.samples).read_text().split()])
    except (OSError, ValueError) as exc:
        raise PreconditionError(f"cannot read samples from {args.samples}: {exc}") from None
    d = ext.derivatives(xs, order)
    header = ["x", "value"] + [f"d{r}" for r in range(1, order + 1)]
    print("# " + "\t".join(header), file=out)
    for i, x in enumerate(xs):
        cells = [repr(float(x))] + [_fmt(d[r, i], ext.real_valued) for r in range(order + 1)]
        print("\t".join(cells), file=out)
    return 0


def cmd_norm(args, out):
    f = parse_jet_spec(args.f)
    line = Domain(args.line)
    if line is Domain.HALF_LINE:
        f = _half_line(f)
    res = an_norm(f, args.n, line, args.tol)
    print(f"value = {res.value!r}", file=out)
    print(f"error = {res.estimated_error!r}", file=out)
    print("r\tterm", file=out)
    for r, term in res.terms.items():
        print(f"{r}\t{term!r}", file=out)
    return 0


def _operator(args) -> OperatorHandle:
    m = read_matrix(args.matrix)
    floor = args.spectral_floor
    if floor is None and getattr(args, "half_line", False):
        floor = 0.0
    return OperatorHandle(m, spectral_floor=floor).with_growth()


def _compute(args):
    H = _operator(args)
    cfg = QuadratureConfig(tol=args.tol, n=args.n)
    f = parse_jet_spec(args.f)
    psi = _psi(args.psi)
    if args.half_line:
        f = _half_line(f)
        res = gamma_apply_detailed(f, H, cfg, K=args.K, psi=psi)
    else:
        res = hs_apply_detailed(f, H, cfg, psi=psi)
    return H, f, res


def cmd_apply(args, out):
    _, _, res = _compute(args)
    out.write(format_matrix(res.matrix))
    return 0


def cmd_verify(args, out):
    H, f, res = _compute(args)
    ref = matrix_function_oracle(H, f)
    gap = float(np.linalg.norm(res.matrix - ref))
    print(f"method = {'gamma' if args.half_line else 'hs'}", file=out)
    print(f"taylor_order = {res.n}", file=out)
    print(f"discrepancy = {gap!r}", file=out)
    print(f"estimated_error = {res.error!r}", file=out)
    print(f"threshold = {args.threshold!r}", file=out)
    ok = gap <= args.threshold
    print(f"status = {'pass' if ok else 'fail'}", file=out)
    return 0 if ok else EXIT_MISMATCH


def cmd_estimate_alpha(args, out):
    H = OperatorHandle(read_matrix(args.matrix))
    g = estimate_growth(H)
    print(f"c = {g.c!r}", file=out)
    print(f"alpha = {g.alpha!r}", file=out)
    print(f"worst_sample = {format_entry(g.worst_sample)}", file=out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hsfc", description="Helffer-Sjostrand functional calculus for matrices.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("coeffs", help="exact Seeley coefficients")
    c.add_argument("--K", type=int, required=True)
    c.set_defaults(func=cmd_coeffs)

    e = sub.add_parser("extend", help="sample the Seeley extension of a half-line function")
    e.add_argument("--f", required=True, help="catalog spec, e.g. exp:t=1")
    e.add_argument("--K", type=int, required=True)
    e.add_argument("--samples", required=True, help="file of whitespace-separated x values")
    e.add_argument("--order", type=int, default=2, help="highest derivative to print")
    e.set_defaults(func=cmd_extend)

    nm = sub.add_parser("norm", help="weighted A_n norm")
    nm.add_argument("--f", required=True)
    nm.add_argument("--n", type=int, required=True)
    nm.add_argument("--line", choices=["whole", "half"], default="whole")
    nm.add_argument("--tol", type=float, default=1e-8)
    nm.set_defaults(func=cmd_norm)

    for name, func, help_ in (("apply", cmd_apply, "compute f(H)"),
                              ("verify", cmd_verify, "compare f(H) against the eigen-oracle")):
        a = sub.add_parser(name, help=help_)
        a.add_argument("--matrix", required=True)
        a.add_argument("--f", required=True)
        a.add_argument("--half-line", action="store_true", help="treat f as a half-line function")
        a.add_argument("--K", type=int, default=None, help="Seeley truncation (default n+3)")
        a.add_argument("--tol", type=float, default=1e-8)
        a.add_argument("--n", type=_order_arg, default=None, help="Taylor order or 'auto'")
        a.add_argument("--spectral-floor", type=float, default=None)
        a.add_argument("--psi", choices=["default", "alternate"], default="default")
        if name == "verify":
            a.add_argument("--threshold", type=float, default=1e-6)
        a.set_defaults(func=func)

    g = sub.add_parser("estimate-alpha", help="fit the resolvent growth constants")
    g.add_argument("--matrix", required=True)
    g.set_defaults(func=cmd_estimate_alpha)
    return p


def run(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=err)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except HSFCError as exc:
        print(f"hsfc {args.command}: {exc}", file=err)
        return exc.exit_code


def main() -> None:
    sys.exit(run())
