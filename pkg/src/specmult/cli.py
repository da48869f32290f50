"""Command-line front end.

Every subcommand prints ``key: value`` lines (or ``key=value`` with
``--kv``); floats use 17 significant digits so identical inputs give
byte-identical output. Exit status: 0 success, 2 invalid input, 3 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings

import numpy as np

from . import __version__
from .fileformat import (
    dumps_symbol,
    fmt,
    read_group_symbol,
    read_symbol,
    sniff,
    write_group_symbol,
    write_symbol,
)
from .group import (
    character_multiplication,
    left_translation,
    right_translation,
    sigma_to_tau,
    tau_to_sigma,
    torus_translation,
)
from .kernel import export_kernel, kernel_trace, mixed_norm, synthesize
from .linalg import ConvergenceError
from .manifold import build_quadrature, enumerate_partition, parse_manifold, weyl_check
from .nuclear import LambdaControl, nuclearity_sum
from .symbol import (
    SlowDecayWarning,
    Symbol,
    apply,
    check_invariance,
    grid_operator,
    l2_bound,
    power_symbol,
    schatten,
    sobolev_order,
    trace_formula,
)

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3

CONTROL_ALIASES = {
    "uniform": "uniform",
    "hormander": "hormander",
    "group_sqrt_dim": "group_sqrt_dim",
    "groupsqrtdim": "group_sqrt_dim",
    "sqrt_dim": "group_sqrt_dim",
    "empirical": "empirical",
}


class _Out:
    def __init__(self, kv: bool):
        self.sep = "=" if kv else ": "
        self.lines: list[str] = []

    def put(self, key: str, value) -> None:
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, (float, np.floating)):
            text = fmt(value)
        elif isinstance(value, (complex, np.complexfloating)):
            text = f"{fmt(value.real)} {fmt(value.imag)}"
        else:
            text = str(value)
        self.lines.append(f"{key}{self.sep}{text}")

    def flush(self) -> None:
        sys.stdout.write("\n".join(self.lines) + ("\n" if self.lines else ""))


def _exponent(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity", "oo"):
        return math.inf
    try:
        val = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not val >= 1:
        raise argparse.ArgumentTypeError(f"exponent must lie in [1, inf], got {text}")
    return val


def _positive(text: str) -> float:
    try:
        val = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (val > 0 and math.isfinite(val)):
        raise argparse.ArgumentTypeError(f"must be a positive finite number, got {text}")
    return val


def _read_sym(path: str) -> Symbol:
    return read_symbol(path)


# --- subcommands ------------------------------------------------------------


def cmd_partition(args, out: _Out) -> None:
    part = enumerate_partition(args.manifold, args.cutoff)
    out.put("manifold", part.manifold.name)
    out.put("n", part.dim_n)
    out.put("nu", part.order_nu)
    out.put("cutoff", float(part.cutoff))
    out.put("levels", len(part))
    out.put("total_dim", part.total_dim)
    for i, lv in enumerate(part.levels):
        rep = f" rep2 {lv.rep2}" if lv.rep2 is not None else ""
        out.put(f"level.{i}", f"lambda {fmt(lv.lam)} dim {lv.dim}{rep}")
    if len(part) >= 10:
        rep = weyl_check(part)
        out.put("weyl.fitted_C", rep.fitted_C)
        out.put("weyl.exponent_ok", rep.exponent_ok)
        out.put("weyl.n_over_nu", rep.n_over_nu)
        out.put("weyl.counting_ratio_min", rep.counting_ratio_min)
        out.put("weyl.counting_ratio_max", rep.counting_ratio_max)
        for q in rep.summability:
            out.put(f"weyl.q.{fmt(q)}.partial_sum", rep.partial_sums[q])
            out.put(f"weyl.q.{fmt(q)}.summability", rep.summability[q])
    else:
        out.put("weyl", "skipped (fewer than 10 levels)")


def cmd_symbol(args, out: _Out) -> None:
    part = enumerate_partition(args.manifold, args.cutoff)
    if args.kind == "identity":
        sigma = Symbol.identity(part)
    else:
        if args.alpha is None:
            raise ValueError("--alpha is required for a power symbol")
        sigma = power_symbol(part, args.alpha)
    if args.out:
        write_symbol(sigma, args.out)
        out.put("written", args.out)
        out.put("levels", len(part))
    else:
        sys.stdout.write(dumps_symbol(sigma))


def cmd_analyze(args, out: _Out) -> None:
    sigma = _read_sym(args.symbol_file)
    part = sigma.partition
    rs = args.schatten or []
    nothing = not (args.l2 or rs or args.trace or args.sobolev)
    if nothing:
        args.l2, args.trace, rs = True, True, [1.0]
    out.put("manifold", part.manifold.name)
    out.put("levels", len(part))
    if args.l2:
        out.put("l2_bound", l2_bound(sigma))
    for r in rs:
        res = schatten(sigma, r)
        key = f"schatten.{fmt(r)}"
        out.put(f"{key}.value", res.value)
        out.put(f"{key}.value_pow_r", res.value**r)
        out.put(f"{key}.finite_on_truncation", res.finite_on_truncation)
        out.put(f"{key}.tail_exponent", res.tail.exponent)
        out.put(f"{key}.critical_exponent", res.tail.critical)
        out.put(f"{key}.tail_analytic", res.tail.analytic)
        out.put(f"{key}.membership", res.tail.verdict)
    if args.trace:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", SlowDecayWarning)
            tr = trace_formula(sigma)
        out.put("trace", complex(tr))
        out.put("trace.slow_decay", any(issubclass(w.category, SlowDecayWarning) for w in caught))
    if args.sobolev:
        so = sobolev_order(sigma)
        out.put("sobolev.m_est", so.m_est)
        out.put("sobolev.C_est", so.C_est)


def cmd_nuclearity(args, out: _Out) -> None:
    if not 0 < args.r <= 1:
        raise ValueError(f"--r must lie in (0, 1], got {fmt(args.r)}")
    kind = CONTROL_ALIASES.get(args.control.lower())
    if kind is None:
        raise ValueError(f"unknown control {args.control!r}; choose from uniform, hormander, group_sqrt_dim, empirical")
    sigma = _read_sym(args.symbol_file)
    part = sigma.partition
    if kind == "empirical":
        control = LambdaControl.empirical(part, build_quadrature(part))
    else:
        control = LambdaControl(kind, args.constant)
    rep = nuclearity_sum(sigma, args.r, args.p1, args.p2, control, form=args.form)
    out.put("manifold", part.manifold.name)
    out.put("r", float(args.r))
    out.put("p1", float(args.p1))
    out.put("p2", float(args.p2))
    out.put("control", kind)
    out.put("form", rep.form)
    out.put("partial_sum", rep.partial_sum)
    out.put("tail_exponent", rep.tail_exponent)
    out.put("tail_analytic", rep.analytic)
    out.put("threshold_alpha", "none" if rep.threshold_alpha is None else rep.threshold_alpha)
    out.put("verdict", rep.verdict)


def cmd_convert(args, out: _Out) -> None:
    kind = sniff(args.input)
    if kind == "group":
        tau = read_group_symbol(args.input)
        top = max(tau.reps)
        part = enumerate_partition("su2", top * (top + 2) / 4)
        sigma = tau_to_sigma(tau, part)
        write_symbol(sigma, args.out)
        out.put("converted", "group-symbol -> symbol")
    else:
        sigma = read_symbol(args.input)
        tau = sigma_to_tau(sigma, tol=args.tol)
        write_group_symbol(tau, args.out)
        out.put("converted", "symbol -> group-symbol")
    out.put("written", args.out)


def cmd_kernel(args, out: _Out) -> None:
    sigma = _read_sym(args.symbol_file)
    part = sigma.partition
    band = part.max_lambda if args.grid_size is None else args.grid_size
    grid = build_quadrature(part, band_limit=band)
    K = synthesize(sigma, grid)
    out.put("manifold", part.manifold.name)
    out.put("band_limit", float(band))
    out.put("nodes", grid.size)
    out.put("kernel.trace", kernel_trace(K))
    out.put("symbol.schatten2", schatten(sigma, 2.0).value)
    for p1, p2 in args.mixed_norm or []:
        mn = mixed_norm(K, p1, p2)
        key = f"mixed_norm.{fmt(p1)}.{fmt(p2)}"
        out.put(f"{key}.xy", mn.xy)
        out.put(f"{key}.yx", mn.yx)
        out.put(f"{key}.max", mn.lp1p2)
    n = grid.size
    for s in range(min(args.samples, n)):
        i, j = s, (3 * s + 1) % n
        x = " ".join(fmt(c) for c in grid.nodes[i])
        y = " ".join(fmt(c) for c in grid.nodes[j])
        out.put(f"sample.{s}", f"x {x} y {y} K {fmt(K.values[i, j].real)} {fmt(K.values[i, j].imag)}")
    if args.out:
        export_kernel(K, args.out)
        out.put("written", args.out)


def cmd_invariance(args, out: _Out) -> None:
    if args.operator == "symbol":
        if not args.symbol:
            raise ValueError("--symbol FILE is required for --operator symbol")
        sigma = _read_sym(args.symbol)
        part = sigma.partition
        rep = check_invariance(lambda c: apply(sigma, c), part, tol=args.tol)
    else:
        if args.manifold is None or args.cutoff is None:
            raise ValueError("--manifold and --cutoff are required")
        man = parse_manifold(args.manifold)
        part = enumerate_partition(man, args.cutoff)
        if args.operator in ("translate", "multiply"):
            if man.kind != "torus":
                raise ValueError(f"--operator {args.operator} needs a torus manifold")
            if args.operator == "translate":
                shift = args.shift if args.shift else [0.0] * man.dim
                if len(shift) not in (1, man.dim):
                    raise ValueError(f"--shift needs 1 or {man.dim} values")
                grid = build_quadrature(part)
                op = torus_translation(grid, shift)
            else:
                j = args.character if args.character else [1] + [0] * (man.dim - 1)
                if len(j) != man.dim:
                    raise ValueError(f"--character needs {man.dim} integers")
                # widen the grid so the shifted band is not aliased
                reach = math.sqrt(part.max_lambda) + math.sqrt(sum(c * c for c in j))
                grid = build_quadrature(part, band_limit=reach**2)
                op = character_multiplication(grid, j)
        elif args.operator in ("left-translate", "right-translate"):
            if man.kind != "su2":
                raise ValueError(f"--operator {args.operator} needs su2")
            h = args.euler if args.euler else [0.3, 0.7, 1.1]
            grid = build_quadrature(part)
            op = (left_translation if args.operator == "left-translate" else right_translation)(grid, h)
        else:
            raise ValueError(f"unknown operator {args.operator!r}")
        rep = check_invariance(grid_operator(op, part, grid), part, tol=args.tol)
    out.put("manifold", part.manifold.name)
    out.put("operator", args.operator)
    out.put("levels", len(part))
    out.put("max_offblock", rep.max_offblock)
    out.put("tolerance", float(rep.tolerance))
    out.put("invariant", rep.verdict)


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="specmult", description="Fourier multipliers on the torus and SU(2).")
    ap.add_argument("--version", action="version", version=f"specmult {__version__}")
    ap.add_argument("--kv", action="store_true", help="print key=value lines")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("partition", help="eigenvalue levels and Weyl-law diagnostics")
    sp.add_argument("--manifold", required=True)
    sp.add_argument("--cutoff", type=float, required=True)
    sp.set_defaults(func=cmd_partition)

    sp = sub.add_parser("symbol", help="write an identity or power symbol file")
    sp.add_argument("--manifold", required=True)
    sp.add_argument("--cutoff", type=float, required=True)
    sp.add_argument("--kind", choices=("identity", "power"), default="power")
    sp.add_argument("--alpha", type=float, help="power symbol of (I + E)^(-alpha/nu)")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_symbol)

    sp = sub.add_parser("analyze", help="L2 bound, Schatten norms, trace, Sobolev order")
    sp.add_argument("symbol_file")
    sp.add_argument("--l2", action="store_true")
    sp.add_argument("--schatten", type=_positive, action="append", metavar="R")
    sp.add_argument("--trace", action="store_true")
    sp.add_argument("--sobolev", action="store_true")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("nuclearity", help="r-nuclearity sufficiency sum")
    sp.add_argument("symbol_file")
    sp.add_argument("--r", type=float, required=True)
    sp.add_argument("--p1", type=_exponent, default=2.0)
    sp.add_argument("--p2", type=_exponent, default=2.0)
    sp.add_argument("--control", default="uniform")
    sp.add_argument("--constant", type=_positive, default=1.0)
    sp.add_argument("--form", choices=("full", "diagonal", "basis_free"), default="full")
    sp.set_defaults(func=cmd_nuclearity)

    sp = sub.add_parser("convert", help="group symbol <-> symbol")
    sp.add_argument("input")
    sp.add_argument("--out", required=True)
    sp.add_argument("--tol", type=_positive, default=1e-10)
    sp.set_defaults(func=cmd_convert)

    sp = sub.add_parser("kernel", help="synthesize the integral kernel on a grid")
    sp.add_argument("symbol_file")
    sp.add_argument("--grid-size", type=float, help="grid band limit (default: largest retained eigenvalue)")
    sp.add_argument("--mixed-norm", type=_exponent, nargs=2, action="append", metavar=("P1", "P2"))
    sp.add_argument("--samples", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_kernel)

    sp = sub.add_parser("invariance", help="test whether an operator preserves every eigenspace")
    sp.add_argument("--operator", required=True, choices=("translate", "multiply", "left-translate", "right-translate", "symbol"))
    sp.add_argument("--manifold")
    sp.add_argument("--cutoff", type=float)
    sp.add_argument("--shift", type=float, nargs="+")
    sp.add_argument("--character", type=int, nargs="+")
    sp.add_argument("--euler", type=float, nargs=3)
    sp.add_argument("--symbol")
    sp.add_argument("--tol", type=_positive, default=1e-9)
    sp.set_defaults(func=cmd_invariance)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    out = _Out(args.kv)
    try:
        args.func(args, out)
    except ConvergenceError as exc:
        print(f"specmult: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        print(f"specmult: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out.flush()
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
