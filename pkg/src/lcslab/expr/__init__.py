"""Scalar expression language with exact first and second derivatives."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import nodes, symbolic
from .errors import (
    ArityError,
    DomainError,
    ExpressionError,
    NonFiniteError,
    ParseError,
    UnknownIdentifierError,
)
from .evaluate import check_finite, evaluate_node
from .jets import Jet2, JetBasis, Taylor, as_taylor, inverse, jeinsum, jet_basis, stack
from .parser import parse_node


@dataclass(frozen=True)
class Expression:
    """Parsed scalar function of an ordered list of named variables."""

    root: nodes.Node
    variables: tuple[str, ...]

    @property
    def source(self) -> str:
        return nodes.to_source(self.root)

    def __str__(self) -> str:
        return self.source

    @property
    def is_constant(self) -> bool:
        return not nodes.free_indices(self.root)

    def __call__(self, *args):
        return self.evaluate(args)

    def evaluate(self, args):
        """Evaluate at floats or at jets (one entry per variable)."""
        if len(args) != len(self.variables):
            raise ValueError(
                f"expected {len(self.variables)} arguments, got {len(args)}"
            )
        return check_finite(evaluate_node(self.root, args))

    def derivative(self, name: str) -> "Expression":
        return Expression(symbolic.derivative(self.root, self.variables.index(name)), self.variables)

    def rebind(self, variables) -> "Expression":
        """Same function, re-expressed over a (super)set of variable names."""
        variables = tuple(variables)
        index_of = {name: i for i, name in enumerate(variables)}
        missing = {self.variables[i] for i in nodes.free_indices(self.root)} - set(index_of)
        if missing:
            raise ValueError(f"variables {sorted(missing)} not in {variables}")
        return Expression(nodes.rebind(self.root, index_of), variables)

    @classmethod
    def constant(cls, value: float, variables=()) -> "Expression":
        return cls(nodes.Number(float(value)), tuple(variables))


def parse(source: str, variables=()) -> Expression:
    variables = tuple(variables)
    return Expression(parse_node(source, variables), variables)


def eval_jet2(expr: Expression, point) -> Jet2:
    point = np.asarray(point, dtype=float).reshape(-1)
    if point.shape[0] != len(expr.variables):
        raise ValueError(f"point has {point.shape[0]} entries, expression has {len(expr.variables)} variables")
    n = point.shape[0]
    if n == 0:
        value = float(expr.evaluate(()))
        return Jet2(value, np.zeros(0), np.zeros((0, 0)))
    seeds = Taylor.variables(point, 2)
    out = expr.evaluate(list(seeds))
    if not isinstance(out, Taylor):
        return Jet2(float(out), np.zeros(n), np.zeros((n, n)))
    return Jet2.from_taylor(out)


def fd_jet2(expr: Expression, point, step: float = 1e-4) -> Jet2:
    """Central-difference value, gradient and Hessian (plain float evaluations).

    Fallback and independent check for ``eval_jet2``.  The gradient uses
    step ``step / 10``; truncation and roundoff put both parts near 1e-8.
    """
    x0 = np.asarray(point, dtype=float).reshape(-1)
    n = x0.shape[0]
    if n != len(expr.variables):
        raise ValueError(f"point has {n} entries, expression has {len(expr.variables)} variables")

    def f(x):
        return float(expr.evaluate(tuple(float(v) for v in x)))

    f0 = f(x0)
    eye = np.eye(n)
    hg = step / 10
    grad = np.array([(f(x0 + hg * eye[i]) - f(x0 - hg * eye[i])) / (2 * hg) for i in range(n)])
    hess = np.empty((n, n))
    for i in range(n):
        hess[i, i] = (f(x0 + step * eye[i]) - 2 * f0 + f(x0 - step * eye[i])) / step ** 2
        for j in range(i):
            a, b = step * eye[i], step * eye[j]
            v = (f(x0 + a + b) - f(x0 + a - b) - f(x0 - a + b) + f(x0 - a - b)) / (4 * step ** 2)
            hess[i, j] = hess[j, i] = v
    return Jet2(f0, grad, hess)


__all__ = [
    "ArityError",
    "DomainError",
    "Expression",
    "ExpressionError",
    "Jet2",
    "JetBasis",
    "NonFiniteError",
    "ParseError",
    "Taylor",
    "UnknownIdentifierError",
    "as_taylor",
    "eval_jet2",
    "fd_jet2",
    "inverse",
    "jeinsum",
    "jet_basis",
    "parse",
    "stack",
]
