"""Evaluate expression trees over floats or Taylor jets."""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, NonFiniteError
from .jets import Taylor
from .nodes import BinOp, Call, Constant, Neg, Node, Number, Var


def _float_call(name: str, x: float) -> float:
    if name == "log" and x <= 0:
        raise DomainError("log", x)
    if name == "sqrt" and x < 0:
        raise DomainError("sqrt", x)
    try:
        out = getattr(math, name)(x)
    except ValueError as exc:
        raise DomainError(name, x) from exc
    except OverflowError as exc:
        raise NonFiniteError(f"overflow in {name}({x!r})") from exc
    return out


def _float_pow(a: float, b: float) -> float:
    try:
        return math.pow(a, b)
    except ValueError as exc:
        raise DomainError("power", a) from exc
    except OverflowError as exc:
        raise NonFiniteError(f"overflow in {a!r}^{b!r}") from exc


def evaluate_node(node: Node, args):
    """Evaluate ``node``; ``args[i]`` is the value of variable index ``i``.

    Constant subtrees always evaluate to plain floats, so an exponent like
    the 3 in ``t^3`` is recognised as an integer power.
    """
    if isinstance(node, Number):
        return node.value
    if isinstance(node, Var):
        return args[node.index]
    if isinstance(node, Constant):
        return node.value
    if isinstance(node, Neg):
        return -evaluate_node(node.operand, args)
    if isinstance(node, Call):
        x = evaluate_node(node.arg, args)
        if isinstance(x, Taylor):
            return getattr(x, node.func)()
        return _float_call(node.func, x)
    if isinstance(node, BinOp):
        a = evaluate_node(node.left, args)
        b = evaluate_node(node.right, args)
        op = node.op
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if not isinstance(b, Taylor) and b == 0:
                raise DomainError("division", 0.0)
            return a / b
        if op == "^":
            if isinstance(a, Taylor) or isinstance(b, Taylor):
                return a**b
            return _float_pow(a, b)
    raise TypeError(f"cannot evaluate {node!r}")


def check_finite(value):
    data = value.coef if isinstance(value, Taylor) else np.asarray(value)
    if not np.all(np.isfinite(data)):
        raise NonFiniteError("expression evaluated to a non-finite value")
    return value
