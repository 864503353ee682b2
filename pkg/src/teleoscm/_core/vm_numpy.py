"""Vectorized numpy interpreter for compiled programs (no compiled code needed)."""

from __future__ import annotations

import numpy as np

from . import program as op


def run_program(codes, args, consts, columns, out, err) -> None:
    """Evaluate a program over every row of ``columns`` (shape vars x rows).

    Writes values into ``out`` and per-row division-by-zero flags into ``err``.
    """
    n = columns.shape[1]
    vals: list[np.ndarray] = []
    errs: list[np.ndarray | None] = []
    with np.errstate(all="ignore"):
        for code, arg in zip(codes.tolist(), args.tolist()):
            if code == op.CONST:
                vals.append(np.full(n, consts[arg]))
                errs.append(None)
            elif code == op.LOAD:
                vals.append(columns[arg])
                errs.append(None)
            elif code == op.NEG:
                vals[-1] = -vals[-1]
            elif code == op.NOT:
                vals[-1] = (vals[-1] == 0.0).astype(np.float64)
            elif code == op.IF:
                b, eb = vals.pop(), errs.pop()
                a, ea = vals.pop(), errs.pop()
                c, ec = vals.pop(), errs.pop()
                take = c != 0.0
                vals.append(np.where(take, a, b))
                if ea is None and eb is None:
                    picked = None
                else:
                    picked = np.where(
                        take,
                        ea if ea is not None else False,
                        eb if eb is not None else False,
                    )
                errs.append(_or(ec, picked))
            else:
                b, eb = vals.pop(), errs.pop()
                a, ea = vals.pop(), errs.pop()
                e = _or(ea, eb)
                if code == op.ADD:
                    v = a + b
                elif code == op.SUB:
                    v = a - b
                elif code == op.MUL:
                    v = a * b
                elif code == op.DIV:
                    zero = b == 0.0
                    v = a / np.where(zero, 1.0, b)
                    if zero.any():
                        v = np.where(zero, np.nan, v)
                        e = _or(e, zero)
                elif code == op.LT:
                    v = (a < b).astype(np.float64)
                elif code == op.LE:
                    v = (a <= b).astype(np.float64)
                elif code == op.GT:
                    v = (a > b).astype(np.float64)
                elif code == op.GE:
                    v = (a >= b).astype(np.float64)
                elif code == op.EQ:
                    v = (a == b).astype(np.float64)
                elif code == op.NE:
                    v = (a != b).astype(np.float64)
                elif code == op.AND:
                    v = ((a != 0.0) & (b != 0.0)).astype(np.float64)
                elif code == op.OR:
                    v = ((a != 0.0) | (b != 0.0)).astype(np.float64)
                else:
                    raise ValueError(f"bad opcode {code}")
                vals.append(v)
                errs.append(e)
    out[:] = vals[-1]
    err[:] = errs[-1] if errs[-1] is not None else 0


def _or(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a | b
