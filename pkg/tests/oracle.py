"""Independent check of operator identities with sympy.

Operators are turned into sympy callables acting on an undetermined
function u(x, y, ...); two operators are equal iff their actions agree.
"""

from __future__ import annotations

import sympy as sp

from iltkit import Lpdo, RationalExpr


def to_sympy(f: RationalExpr, symbols: dict):
    return sp.sympify(str(f).replace("^", "**"), locals=symbols)


def action(A: Lpdo, symbols: dict):
    tower = A.tower
    syms = [symbols[v] for v in tower.vars]
    terms = [(idx, to_sympy(c, symbols)) for idx, c in A.items()]

    def act(expr):
        total = 0
        for idx, c in terms:
            d = expr
            for s, e in zip(syms, idx):
                if e:
                    d = sp.diff(d, s, e)
            total += c * d
        return total

    return act


def generic(tower):
    symbols = {v: sp.Symbol(v) for v in tower.vars}
    u = sp.Function("u")(*symbols.values())
    return symbols, u


def is_zero(expr) -> bool:
    return sp.expand(sp.numer(sp.together(sp.expand(expr)))) == 0
