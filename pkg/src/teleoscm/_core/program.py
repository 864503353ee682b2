"""Compilation of expression trees to a flat stack program.

The program is what the evaluation kernels execute over whole columns. Each
stack slot carries a value and an error flag; the flag marks rows where a
division by zero happened on the path that was actually selected.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ..expr import BinOp, Compare, Expression, If, Logic, Neg, Not, Num, Var

CONST, LOAD, NEG, ADD, SUB, MUL, DIV = 0, 1, 2, 3, 4, 5, 6
LT, LE, GT, GE, EQ, NE = 7, 8, 9, 10, 11, 12
AND, OR, NOT, IF = 13, 14, 15, 16

_BINARY = {"+": ADD, "-": SUB, "*": MUL, "/": DIV}
_COMPARE = {"<": LT, "<=": LE, ">": GT, ">=": GE, "==": EQ, "!=": NE}
_LOGIC = {"and": AND, "or": OR}


@dataclass(frozen=True)
class Program:
    codes: np.ndarray  # int32
    args: np.ndarray  # int32
    consts: np.ndarray  # float64
    depth: int


def compile_expression(expr: Expression, slots: Mapping[str, int]) -> Program:
    """Compile ``expr``; ``slots`` maps variable names to column indices."""
    codes: list[int] = []
    args: list[int] = []
    consts: list[float] = []
    depth = 0
    max_depth = 0

    def emit(code: int, arg: int, delta: int) -> None:
        nonlocal depth, max_depth
        codes.append(code)
        args.append(arg)
        depth += delta
        max_depth = max(max_depth, depth)

    def walk(node: Expression) -> None:
        if isinstance(node, Num):
            consts.append(node.value)
            emit(CONST, len(consts) - 1, 1)
        elif isinstance(node, Var):
            emit(LOAD, slots[node.name], 1)
        elif isinstance(node, Neg):
            walk(node.operand)
            emit(NEG, 0, 0)
        elif isinstance(node, Not):
            walk(node.operand)
            emit(NOT, 0, 0)
        elif isinstance(node, BinOp):
            walk(node.left)
            walk(node.right)
            emit(_BINARY[node.op], 0, -1)
        elif isinstance(node, Compare):
            walk(node.left)
            walk(node.right)
            emit(_COMPARE[node.op], 0, -1)
        elif isinstance(node, Logic):
            walk(node.left)
            walk(node.right)
            emit(_LOGIC[node.op], 0, -1)
        elif isinstance(node, If):
            walk(node.cond)
            walk(node.then)
            walk(node.orelse)
            emit(IF, 0, -2)
        else:
            raise TypeError(f"not an expression node: {node!r}")

    walk(expr)
    return Program(
        np.asarray(codes, dtype=np.int32),
        np.asarray(args, dtype=np.int32),
        np.asarray(consts, dtype=np.float64),
        max_depth,
    )
