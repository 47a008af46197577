"""Symbolic partial derivatives of expression trees.

Only the zero/one bookkeeping needed to keep derivative trees small is done;
there is no general simplifier.
"""

from __future__ import annotations

from .nodes import BinOp, Call, Constant, Neg, Node, Number, Var, free_indices

ZERO = Number(0.0)
ONE = Number(1.0)


def _is(node: Node, value: float) -> bool:
    return isinstance(node, Number) and node.value == value


def add(a: Node, b: Node) -> Node:
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    return BinOp("+", a, b)


def sub(a: Node, b: Node) -> Node:
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return neg(b)
    return BinOp("-", a, b)


def neg(a: Node) -> Node:
    if isinstance(a, Number):
        return Number(-a.value)
    if isinstance(a, Neg):
        return a.operand
    return Neg(a)


def mul(a: Node, b: Node) -> Node:
    if _is(a, 0.0) or _is(b, 0.0):
        return ZERO
    if _is(a, 1.0):
        return b
    if _is(b, 1.0):
        return a
    return BinOp("*", a, b)


def div(a: Node, b: Node) -> Node:
    if _is(a, 0.0):
        return ZERO
    if _is(b, 1.0):
        return a
    return BinOp("/", a, b)


def power(a: Node, b: Node) -> Node:
    if _is(b, 1.0):
        return a
    return BinOp("^", a, b)


def derivative(node: Node, index: int) -> Node:
    """d(node)/d(variable number ``index``)."""
    if isinstance(node, (Number, Constant)):
        return ZERO
    if isinstance(node, Var):
        return ONE if node.index == index else ZERO
    if index not in free_indices(node):
        return ZERO
    if isinstance(node, Neg):
        return neg(derivative(node.operand, index))
    if isinstance(node, BinOp):
        a, b = node.left, node.right
        da, db = derivative(a, index), derivative(b, index)
        if node.op == "+":
            return add(da, db)
        if node.op == "-":
            return sub(da, db)
        if node.op == "*":
            return add(mul(da, b), mul(a, db))
        if node.op == "/":
            return sub(div(da, b), div(mul(a, db), power(b, Number(2.0))))
        if node.op == "^":
            if not free_indices(b):
                lowered = sub(b, ONE) if not isinstance(b, Number) else Number(b.value - 1.0)
                return mul(mul(b, power(a, lowered)), da)
            # a^b = exp(b log a)
            return mul(node, add(mul(db, Call("log", a)), div(mul(b, da), a)))
    if isinstance(node, Call):
        u = node.arg
        du = derivative(u, index)
        f = node.func
        if f == "sin":
            outer = Call("cos", u)
        elif f == "cos":
            outer = neg(Call("sin", u))
        elif f == "tan":
            outer = div(ONE, power(Call("cos", u), Number(2.0)))
        elif f == "exp":
            outer = node
        elif f == "log":
            outer = div(ONE, u)
        elif f == "sqrt":
            outer = div(ONE, mul(Number(2.0), node))
        elif f == "sinh":
            outer = Call("cosh", u)
        elif f == "cosh":
            outer = Call("sinh", u)
        elif f == "tanh":
            outer = sub(ONE, power(node, Number(2.0)))
        else:
            raise ValueError(f"no derivative rule for {f}")
        return mul(outer, du)
    raise TypeError(f"cannot differentiate {node!r}")
