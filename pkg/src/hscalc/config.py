"""Run configuration read from an INI file.

Example::

    [function]
    kind = char
    a = -1
    b = 3
    eps = 0.25

    [operator]
    eigs = -1, 0, 1, 2
    conditioner = jordan_like
    delta = 0.1

    [quadrature]
    levels = 4
    tol = 1e-4
    n = auto

Several functions or operators may be listed as ``[function.NAME]`` /
``[operator.NAME]``; batch commands take the cartesian product.
"""

from __future__ import annotations

import configparser
import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .calculus import QuadratureSpec
from .errors import HSCalcError
from .functions import (
    CkFunction,
    ExtendedElement,
    approx_char,
    bracket_power,
    bump,
    custom_table,
    exp_poly,
    rational,
    resolvent_function,
)
from .operators import TestOperator, make_test_operator, read_matrix

FUNCTION_KINDS = ("rational", "bump", "char", "bracket_power", "custom-table", "resolvent", "exp-poly")


def parse_complex_list(text: str) -> list[complex]:
    out = []
    for tok in text.replace(";", ",").split(","):
        tok = tok.strip().replace(" ", "")
        if tok:
            out.append(complex(tok.replace("i", "j")))
    return out


def parse_real_list(text: str) -> list[float]:
    vals = parse_complex_list(text)
    if any(v.imag for v in vals):
        raise HSCalcError(f"expected real numbers, got {text!r}")
    return [v.real for v in vals]


def _real(v: complex) -> Union[float, complex]:
    return v.real if v.imag == 0 else v


def _read_table(path: Path) -> tuple[list[float], list[complex]]:
    xs, ys = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                x = float(row[0])
            except ValueError:
                continue  # header
            xs.append(x)
            ys.append(complex(row[1].strip().replace("i", "j")))
    return xs, ys


def build_function(sec, base: Path = Path(".")) -> ExtendedElement:
    kind = sec.get("kind", "").strip().lower().replace("_", "-")
    order = sec.getint("max_order", 16)
    if kind == "rational":
        f = rational(parse_complex_list(sec["num"]), parse_complex_list(sec["den"]), max_order=order)
    elif kind == "bump":
        f = bump(sec.getfloat("a"), sec.getfloat("b"), max_order=order)
    elif kind == "char":
        f = approx_char(sec.getfloat("a"), sec.getfloat("b"), sec.getfloat("eps"),
                        kernel=sec.get("kernel", "exp"), max_order=order)
    elif kind == "bracket-power":
        f = bracket_power(sec.getfloat("beta"), max_order=order)
    elif kind == "resolvent":
        f = resolvent_function(parse_complex_list(sec["z"])[0], max_order=order)
    elif kind == "exp-poly":
        f = exp_poly(parse_real_list(sec["coeffs"]), max_order=order)
    elif kind == "custom-table":
        if "file" in sec:
            xs, ys = _read_table(base / sec["file"])
        else:
            xs = parse_real_list(sec["xs"])
            ys = parse_complex_list(sec["ys"])
        f = custom_table(xs, [_real(y) for y in ys])
    else:
        raise HSCalcError(f"unknown function kind {kind!r}; expected one of {', '.join(FUNCTION_KINDS)}")
    if "name" in sec:
        f = f.with_name(sec["name"])
    scalar = parse_complex_list(sec.get("scalar", "0"))[0]
    return ExtendedElement(_real(scalar), f)


@dataclass(frozen=True)
class OperatorSpec:
    """Either a TestOperator or a plain matrix with an optional enclosure."""

    name: str
    matrix: Union[TestOperator, np.ndarray]
    enclosure: Optional[tuple[float, float]] = None


def build_operator(name: str, sec, base: Path = Path(".")) -> OperatorSpec:
    if "matrix" in sec or "matrix_file" in sec:
        if "matrix_file" in sec:
            with open(base / sec["matrix_file"]) as fh:
                M = read_matrix(fh)
        else:
            rows = [r for r in sec["matrix"].split(";") if r.strip()]
            M = np.array([[complex(t.replace("i", "j")) for t in r.split()] for r in rows])
        enc = tuple(parse_real_list(sec["enclosure"])) if "enclosure" in sec else None
        return OperatorSpec(name, M, enc)
    eigs = parse_real_list(sec["eigs"])
    T = make_test_operator(eigs, sec.get("conditioner", "unitary"), seed=sec.getint("seed", 0),
                           delta=sec.getfloat("delta", 0.1), label=sec.get("label"))
    return OperatorSpec(name, T, T.enclosure)


@dataclass
class RunConfig:
    functions: dict[str, ExtendedElement] = field(default_factory=dict)
    operators: dict[str, OperatorSpec] = field(default_factory=dict)
    quad: QuadratureSpec = QuadratureSpec()
    n: Union[int, str, None] = None

    def function(self) -> ExtendedElement:
        if not self.functions:
            raise HSCalcError("config has no [function] section")
        return next(iter(self.functions.values()))

    def operator(self) -> OperatorSpec:
        if not self.operators:
            raise HSCalcError("config has no [operator] section")
        return next(iter(self.operators.values()))


def _parse_n(text: Optional[str]):
    if text is None or text.strip().lower() in ("", "auto"):
        return None
    return int(text)


def load_config(path: Union[str, Path]) -> RunConfig:
    path = Path(path)
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise HSCalcError(f"cannot read config file {path}")
    return config_from_parser(cp, path.parent)


def config_from_parser(cp: configparser.ConfigParser, base: Path = Path(".")) -> RunConfig:
    cfg = RunConfig()
    for name in cp.sections():
        head, _, tail = name.partition(".")
        if head == "function":
            cfg.functions[tail or "f"] = build_function(cp[name], base)
        elif head == "operator":
            cfg.operators[tail or "H"] = build_operator(tail or "H", cp[name], base)
        elif head == "quadrature":
            q = cp[name]
            nx = q.get("nx", "auto")
            cfg.quad = QuadratureSpec(
                nx=None if nx.strip().lower() == "auto" else int(nx),
                ny=q.getint("ny", 32),
                levels=q.getint("levels", 4),
                target_tol=q.getfloat("tol", 1e-4),
                y_grading=q.getint("y_grading", 2),
            )
            cfg.n = _parse_n(q.get("n"))
        else:
            raise HSCalcError(f"unknown config section [{name}]")
    return cfg
