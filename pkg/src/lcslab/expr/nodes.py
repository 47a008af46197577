"""Immutable expression trees."""

from __future__ import annotations

import math
from dataclasses import dataclass

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh")
CONSTANTS = {"pi": math.pi, "e": math.e}


@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Constant:
    name: str

    @property
    def value(self) -> float:
        return CONSTANTS[self.name]


@dataclass(frozen=True)
class Var:
    name: str
    index: int


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Number | Constant | Var | Neg | BinOp | Call


def to_source(node: Node) -> str:
    """Fully parenthesized source text; parsing it back gives an equal tree."""
    if isinstance(node, Number):
        return repr(float(node.value))
    if isinstance(node, Constant):
        return node.name
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def free_indices(node: Node) -> frozenset[int]:
    if isinstance(node, Var):
        return frozenset((node.index,))
    if isinstance(node, Neg):
        return free_indices(node.operand)
    if isinstance(node, BinOp):
        return free_indices(node.left) | free_indices(node.right)
    if isinstance(node, Call):
        return free_indices(node.arg)
    return frozenset()


def rebind(node: Node, index_of: dict[str, int]) -> Node:
    """Return a copy whose variable indices follow ``index_of``."""
    if isinstance(node, Var):
        return Var(node.name, index_of[node.name])
    if isinstance(node, Neg):
        return Neg(rebind(node.operand, index_of))
    if isinstance(node, BinOp):
        return BinOp(node.op, rebind(node.left, index_of), rebind(node.right, index_of))
    if isinstance(node, Call):
        return Call(node.func, rebind(node.arg, index_of))
    return node


def substitute(node: Node, replacements: dict[str, Node]) -> Node:
    if isinstance(node, Var):
        return replacements.get(node.name, node)
    if isinstance(node, Neg):
        return Neg(substitute(node.operand, replacements))
    if isinstance(node, BinOp):
        return BinOp(
            node.op,
            substitute(node.left, replacements),
            substitute(node.right, replacements),
        )
    if isinstance(node, Call):
        return Call(node.func, substitute(node.arg, replacements))
    return node
