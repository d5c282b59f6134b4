"""Affine metric formulas over finite types."""

import json
from fractions import Fraction

from . import _core
from ._core import (
    ConstructionError,
    EvalError,
    Formula,
    ParseError,
    bell,
    build_theta,
    canonical_type,
    count_types,
    named_sets,
    parse,
    run_cli,
    types,
)

__all__ = [
    "ConstructionError",
    "EvalError",
    "Formula",
    "ParseError",
    "bell",
    "build_theta",
    "canonical_type",
    "count_types",
    "derive",
    "evaluate",
    "explain",
    "named_sets",
    "parse",
    "run_cli",
    "types",
    "verify",
    "verify_formula",
]


def evaluate(formula, type_, ell=4):
    if isinstance(formula, str):
        formula = parse(formula)
    return Fraction(formula.eval(type_, ell))


def derive():
    out = _core.derive()
    coeffs = json.loads(out["coefficients"])
    return {"rank": out["rank"], "coefficients": {k: Fraction(v) for k, v in coeffs.items()}}


def verify(n, mode="algorithmic", literal=False, ell=4, sample=None, seed=None, workers=0):
    return json.loads(_core.verify(n, mode, literal, ell, sample, seed, workers))


def verify_formula(formula, ell=4, sample=None, seed=None, workers=0):
    if isinstance(formula, str):
        formula = parse(formula)
    return json.loads(_core.verify_formula(formula, ell, sample, seed, workers))


def explain(name, ell=4):
    return json.loads(_core.explain(name, ell))
