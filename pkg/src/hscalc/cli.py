"""Command-line entry point: ``hscalc <subcommand> --config run.ini``."""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from contextlib import contextmanager
from dataclasses import asdict, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .calculus import (
    QuadratureSpec,
    char_one_check,
    hs_apply_extended,
    hs_contour_apply,
    operator_info,
    semibounded_apply,
)
from .config import RunConfig, load_config, parse_real_list
from .errors import HSCalcError, NonConvergenceWarning
from .functions import HalfLineFunction
from .operators import TestOperator, bound_grid, fit_resolvent_bound, write_matrix
from .seeley import seeley_coefficients, seeley_extend
from .smt import (
    SmtReport,
    convergence_table,
    error_ratios,
    verify_batch,
    write_reports,
    write_table,
)


def _n_arg(text: str):
    if text == "auto":
        return "auto"
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("--n must be 'auto' or an integer") from None


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", type=Path, help="INI file with [function], [operator], [quadrature]")
    p.add_argument("--tol", type=float, help="target tolerance (overrides config)")
    p.add_argument("--levels", type=int, help="refinement levels (overrides config)")
    p.add_argument("--n", type=_n_arg, help="Taylor order: auto or an integer")
    p.add_argument("--out", type=Path, help="directory for result files")
    p.add_argument("--json", action="store_true", help="print a JSON-line summary")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="hscalc", description="Helffer-Sjostrand functional calculus for matrices")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("apply", parents=[common], help="compute f(H)")
    p.add_argument("--method", choices=("area", "contour", "semibounded"), default="area")
    p.add_argument("--eps", type=float, default=0.5, help="disc margin for --method contour")

    sub.add_parser("verify-smt", parents=[common], help="check spectral mapping on every function x operator")

    p = sub.add_parser("convergence-table", parents=[common], help="error against the exact oracle per level")
    p.add_argument("--nx", type=int, help="starting x-resolution")

    p = sub.add_parser("seeley-extend", parents=[common], help="Seeley coefficients and extension values")
    p.add_argument("--K", type=int, default=5, help="number of matched derivatives")
    p.add_argument("--range", default="-2.5,1", help="x-range for the value table")
    p.add_argument("--points", type=int, default=71)
    p.add_argument("--orders", type=int, default=2, help="derivatives to dump")

    sub.add_parser("fit-bound", parents=[common], help="fit the resolvent bound c, alpha")

    p = sub.add_parser("char-one", parents=[common], help="deviation of chi(H) from I")
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--eps", type=float, default=0.25)
    return ap


def _load(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    quad = cfg.quad
    if args.tol is not None:
        quad = replace(quad, target_tol=args.tol)
    if args.levels is not None:
        quad = replace(quad, levels=args.levels)
    cfg.quad = quad
    if args.n is not None:
        cfg.n = None if args.n == "auto" else args.n
    return cfg


@contextmanager
def _output(args, name: str):
    if args.out is None:
        yield sys.stdout
        return
    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / name, "w", newline="") as fh:
        yield fh


def _emit(args, summary: str, payload: dict) -> None:
    print(json.dumps(payload) if args.json else summary)


def _info(spec):
    if isinstance(spec.matrix, TestOperator):
        return operator_info(spec.matrix)
    return operator_info(spec.matrix, enclosure=spec.enclosure)


def cmd_apply(args) -> int:
    cfg = _load(args)
    phi = cfg.function()
    spec = cfg.operator()
    if args.method == "area":
        res = hs_apply_extended(phi, _info(spec), cfg.n, cfg.quad)
    elif args.method == "contour":
        res = hs_contour_apply(phi.function, spec.matrix, args.eps, cfg.quad, cfg.n,
                               enclosure=spec.enclosure)
        res = replace(res, value=res.value + phi.scalar * np.eye(res.value.shape[0]))
    else:
        res = semibounded_apply(HalfLineFunction.restrict(phi.function), spec.matrix, None, cfg.n,
                                cfg.quad, enclosure=spec.enclosure)
        res = replace(res, value=res.value + phi.scalar * np.eye(res.value.shape[0]))
    with _output(args, "result.txt") as fh:
        write_matrix(res.value, fh)
    _emit(args, res.summary(), {"levels": res.levels_used, "est": res.error_estimate,
                                "n": res.n_used, "cells": res.cells, "converged": res.converged})
    return 0 if res.converged else 1


def cmd_verify_smt(args) -> int:
    cfg = _load(args)
    if not cfg.functions or not cfg.operators:
        raise HSCalcError("verify-smt needs at least one function and one operator section")
    pairs = []
    for spec in cfg.operators.values():
        if not isinstance(spec.matrix, TestOperator):
            raise HSCalcError(f"operator {spec.name}: spectral mapping needs eigs (a factory operator)")
        pairs.extend((phi, spec.matrix) for phi in cfg.functions.values())
    reports = verify_batch(pairs, cfg.n, cfg.quad)
    tol = cfg.quad.target_tol
    ok = all(r.ok(tol) for r in reports)
    with _output(args, "smt.csv") as fh:
        write_reports(reports, fh)
    if args.json:
        for r in reports:
            print(json.dumps({**asdict(r), "ok": r.ok(tol)}))
    worst = max((max(r.offdiag_norm, r.reverse_defect, r.forward_defect) for r in reports), default=0.0)
    summary = f"pairs={len(reports)} worst={worst:.3e} tol={tol:g} {'PASS' if ok else 'FAIL'}"
    _emit(args, summary, {"pairs": len(reports), "worst": worst, "tol": tol, "ok": ok})
    return 0 if ok else 1


def cmd_convergence(args) -> int:
    cfg = _load(args)
    spec = cfg.operator()
    if not isinstance(spec.matrix, TestOperator):
        raise HSCalcError("convergence-table needs a factory operator (exact oracle)")
    quad = cfg.quad if args.nx is None else replace(cfg.quad, nx=args.nx)
    levels = max(cfg.quad.levels, 3)
    rows = convergence_table(cfg.function().function, spec.matrix, levels, cfg.n, quad)
    with _output(args, "convergence.csv") as fh:
        write_table(rows, fh)
    ratios = error_ratios(rows)
    summary = f"levels={len(rows)} final_error={rows[-1].error:.3e} ratios=" + ",".join(f"{r:.2f}" for r in ratios)
    _emit(args, summary, {"levels": len(rows), "final_error": rows[-1].error, "ratios": ratios})
    return 0


def cmd_seeley(args) -> int:
    coeffs = seeley_coefficients(args.K)
    lines = [f"K={coeffs.K}"] + [f"a_{k} = {a}    b_{k} = {b}" for k, (a, b) in enumerate(zip(coeffs.a, coeffs.b))]
    resid = coeffs.moment_residuals()
    lines.append("moment residuals: " + ("all zero" if not any(resid) else ", ".join(map(str, resid))))
    if args.config is None:
        print("\n".join(lines))
        return 0
    cfg = _load(args)
    f = HalfLineFunction.restrict(cfg.function().function)
    F = seeley_extend(f, coeffs)
    lo, hi = parse_real_list(args.range)
    xs = np.linspace(lo, hi, args.points)
    k = min(args.orders, F.max_order)
    D = F.derivs(xs, k)
    print("\n".join(lines), file=sys.stderr if args.out is None else sys.stdout)
    with _output(args, "seeley.csv") as fh:
        fh.write(",".join(["x"] + ["F" + "'" * r for r in range(k + 1)]) + "\n")
        for i, x in enumerate(xs):
            fh.write(",".join([f"{x:.17g}"] + [_fmt(D[r, i]) for r in range(k + 1)]) + "\n")
    return 0


def _fmt(v) -> str:
    v = complex(v)
    return f"{v.real:.17g}" if v.imag == 0 else f"{v.real:.17g}{v.imag:+.17g}j"


def cmd_fit_bound(args) -> int:
    cfg = _load(args)
    spec = cfg.operator()
    H = spec.matrix.H if isinstance(spec.matrix, TestOperator) else spec.matrix
    enc = spec.enclosure
    if enc is None:
        r = float(np.linalg.norm(H, 2))
        enc = (-r, r)
    fit = fit_resolvent_bound(H, bound_grid(enc))
    summary = f"c={fit.c:.6g} alpha={fit.alpha:.4f} max_ratio={fit.max_ratio:.4f}"
    if isinstance(spec.matrix, TestOperator):
        summary += f" kappa={spec.matrix.kappa:.6g}"
    _emit(args, summary, {"c": fit.c, "alpha": fit.alpha, "max_ratio": fit.max_ratio})
    return 0


def cmd_char_one(args) -> int:
    cfg = _load(args)
    spec = cfg.operator()
    info = _info(spec)
    if info.enclosure is None:
        raise HSCalcError("char-one needs a spectral enclosure")
    l, u = info.enclosure
    lo = args.lo if args.lo is not None else l - 0.5
    hi = args.hi if args.hi is not None else u + 0.5
    worst, dev_area, dev_contour, res = char_one_check(spec.matrix, lo, hi, args.eps, cfg.quad,
                                                       enclosure=spec.enclosure, details=True)
    tol = cfg.quad.target_tol
    ok = worst <= tol
    summary = f"area={dev_area:.3e} contour={dev_contour:.3e} {res.summary()} {'PASS' if ok else 'FAIL'}"
    _emit(args, summary, {"area": dev_area, "contour": dev_contour, "tol": tol, "ok": ok})
    return 0 if ok else 1


COMMANDS = {
    "apply": cmd_apply,
    "verify-smt": cmd_verify_smt,
    "convergence-table": cmd_convergence,
    "seeley-extend": cmd_seeley,
    "fit-bound": cmd_fit_bound,
    "char-one": cmd_char_one,
}


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NonConvergenceWarning)
            return COMMANDS[args.command](args)
    except (HSCalcError, OSError, KeyError) as exc:
        print(f"hscalc: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
