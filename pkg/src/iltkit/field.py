"""The differential coefficient field.

Coefficients live in Q(x1..xn, t1..tm): rational functions in the
independent variables and in user-declared transcendental generators whose
partial derivatives are given by a table.  Polynomials are python-flint
``fmpq_mpoly`` values in a graded-lex context over ``vars + generators``.

A :class:`RationalExpr` is kept in canonical form: numerator and
denominator coprime, denominator monic under graded-lex.  Two expressions
over the same tower are equal as field elements iff their canonical forms
coincide.  That equivalence assumes the declared generators are
algebraically independent over Q(x); the library does not check it.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Iterable, Mapping

import flint

from .errors import (
    DivisionByZero,
    IntegrabilityViolation,
    NameCollision,
    TowerMismatch,
    UnknownVariable,
)

__all__ = ["FieldTower", "RationalExpr", "arith"]

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def _to_fmpq(value) -> flint.fmpq:
    if isinstance(value, flint.fmpq):
        return value
    if isinstance(value, int):
        return flint.fmpq(value)
    if isinstance(value, Fraction):
        return flint.fmpq(value.numerator, value.denominator)
    raise TypeError(f"cannot use {type(value).__name__} as an exact rational")


class FieldTower:
    """Independent variables plus a chain of declared generators.

    Build one with ``FieldTower(["x", "y"])`` and extend it with
    :meth:`declare_generator`; every extension returns a new tower.
    """

    __slots__ = ("vars", "generators", "names", "_ctx", "_index", "_partials",
                 "_gens", "zero", "one")

    def __init__(self, vars: Iterable[str]):
        self._setup(tuple(vars), ())

    def _setup(self, vars, generators):
        names = vars + generators
        if not vars:
            raise ValueError("a tower needs at least one independent variable")
        for name in names:
            if not isinstance(name, str) or not _NAME_RE.match(name):
                raise NameCollision(f"invalid name {name!r}")
        if len(set(names)) != len(names):
            raise NameCollision(f"duplicate names in {names}")
        for name in names:
            if name.startswith("D") and name[1:] in vars:
                raise NameCollision(f"{name!r} would shadow the derivation D{name[1:]}")
        self.vars = vars
        self.generators = generators
        self.names = names
        self._ctx = flint.fmpq_mpoly_ctx.get(names, "deglex")
        self._index = {name: i for i, name in enumerate(names)}
        self._partials = {}
        gens = self._ctx.gens()
        one = self._ctx.from_dict({(0,) * len(names): 1})
        self._gens = {name: RationalExpr._raw(self, g, one) for name, g in zip(names, gens)}
        self.zero = RationalExpr._raw(self, self._ctx.from_dict({}), one)
        self.one = RationalExpr._raw(self, one, one)

    # -- construction -----------------------------------------------------

    def declare_generator(self, name: str,
                          partials: Mapping[str, "RationalExpr | int | Fraction | str"]) -> "FieldTower":
        """Return a new tower extended by a generator ``name``.

        ``partials`` maps variable names to the generator's partial
        derivatives, expressed over this tower or over the extended one (the
        new generator may appear in them).  Missing variables mean zero.
        Strings are parsed against the extended tower.
        """
        if name in self.names or (name.startswith("D") and name[1:] in self.vars):
            raise NameCollision(f"name {name!r} already used in the tower")
        for var in partials:
            if var not in self.vars:
                raise UnknownVariable(f"{var!r} is not an independent variable")
        tower = object.__new__(FieldTower)
        tower._setup(self.vars, self.generators + (name,))
        for gen, table in self._partials.items():
            tower._partials[gen] = {v: tower._project(e) for v, e in table.items()}
        table = {}
        for var in self.vars:
            value = partials.get(var, 0)
            if isinstance(value, str):
                from .text import parse_expr
                value = parse_expr(value, tower)
            table[var] = tower.coerce(value)
        tower._partials[name] = table
        for i, u in enumerate(self.vars):
            for v in self.vars[i + 1:]:
                lhs = tower.derive(table[v], u)
                rhs = tower.derive(table[u], v)
                if lhs != rhs:
                    raise IntegrabilityViolation(name, (u, v), lhs - rhs)
        return tower

    # -- element access ---------------------------------------------------

    def symbol(self, name: str) -> "RationalExpr":
        try:
            return self._gens[name]
        except KeyError:
            raise UnknownVariable(f"{name!r} is not a variable or generator of this tower") from None

    var = symbol

    def const(self, value) -> "RationalExpr":
        if isinstance(value, RationalExpr):
            return self.coerce(value)
        c = _to_fmpq(value)
        return RationalExpr._raw(self, self._ctx.constant(c), self.one.num)

    def coerce(self, value) -> "RationalExpr":
        """Bring ``value`` into this tower.

        Accepts numbers, and expressions over this tower or over a tower this
        one extends (same variables, generator list a prefix of ours).
        """
        if isinstance(value, RationalExpr):
            other = value.tower
            if other is self:
                return value
            if other == self:
                return RationalExpr._raw(self, value.num, value.den)
            if other.vars != self.vars or self.generators[:len(other.generators)] != other.generators:
                raise TowerMismatch(f"cannot coerce from {other} to {self}")
            for gen in other.generators:
                for v in self.vars:
                    a, b = other._partials[gen][v], self._partials[gen][v]
                    if a.num.project_to_context(self._ctx) != b.num or \
                            a.den.project_to_context(self._ctx) != b.den:
                        raise TowerMismatch(f"generator {gen!r} has different partials in the two towers")
            return self._project(value)
        return self.const(value)

    def _project(self, value: "RationalExpr") -> "RationalExpr":
        num = value.num.project_to_context(self._ctx)
        den = value.den.project_to_context(self._ctx)
        return RationalExpr(self, num, den)

    def expr(self, text: str) -> "RationalExpr":
        from .text import parse_expr
        return parse_expr(text, self)

    def partials(self, generator: str) -> dict[str, "RationalExpr"]:
        try:
            return dict(self._partials[generator])
        except KeyError:
            raise UnknownVariable(f"{generator!r} is not a generator") from None

    def var_index(self, var: str) -> int:
        try:
            i = self._index[var]
        except KeyError:
            raise UnknownVariable(f"{var!r} is not an independent variable") from None
        if i >= len(self.vars):
            raise UnknownVariable(f"{var!r} is a generator, not an independent variable")
        return i

    # -- derivation -------------------------------------------------------

    def derive(self, f: "RationalExpr", var: str) -> "RationalExpr":
        """Partial derivative of ``f`` with respect to the variable ``var``."""
        if f.tower is not self and f.tower != self:
            raise TowerMismatch("expression belongs to a different tower")
        i = self.var_index(var)
        num, den = f.num, f.den
        if num.is_zero():
            return self.zero
        dn = num.derivative(i)
        dd = den.derivative(i)
        if not self.generators:
            if dd.is_zero():
                return RationalExpr(self, dn, den)
            return RationalExpr(self, dn * den - num * dd, den * den)
        result = RationalExpr(self, dn * den - num * dd, den * den)
        nv = len(self.vars)
        ndeg = num.degrees()
        ddeg = den.degrees()
        for k, gen in enumerate(self.generators):
            j = nv + k
            if ndeg[j] == 0 and ddeg[j] == 0:
                continue
            partial = self._partials[gen][var]
            if partial.num.is_zero():
                continue
            dgn = num.derivative(j)
            dgd = den.derivative(j)
            result = result + RationalExpr(self, dgn * den - num * dgd, den * den) * partial
        return result

    # -- misc -------------------------------------------------------------

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, FieldTower):
            return NotImplemented
        if self.vars != other.vars or self.generators != other.generators:
            return False
        for gen in self.generators:
            mine, theirs = self._partials[gen], other._partials[gen]
            for v in self.vars:
                a, b = mine[v], theirs[v]
                if not (a.num == b.num and a.den == b.den):
                    return False
        return True

    def __hash__(self):
        return hash((self.vars, self.generators))

    def __repr__(self):
        if not self.generators:
            return f"FieldTower({list(self.vars)!r})"
        gens = ", ".join(
            f"{g}: {{{', '.join(f'{v}: {e}' for v, e in self._partials[g].items())}}}"
            for g in self.generators)
        return f"FieldTower({list(self.vars)!r}, generators={{{gens}}})"


class RationalExpr:
    """An element of the coefficient field, immutable and canonical."""

    __slots__ = ("tower", "num", "den", "_hash")

    def __init__(self, tower: FieldTower, num, den=None):
        ctx = tower._ctx
        if den is None:
            den = ctx.constant(1)
        if den.is_zero():
            raise DivisionByZero("zero denominator")
        if num.is_zero():
            den = ctx.constant(1)
        elif den.is_constant():
            c = den.leading_coefficient()
            if c != 1:
                num = num / c
                den = ctx.constant(1)
        else:
            g = num.gcd(den)
            if not g.is_one():
                num = num / g
                den = den / g
            c = den.leading_coefficient()
            if c != 1:
                num = num / c
                den = den / c
        self.tower = tower
        self.num = num
        self.den = den
        self._hash = None

    @classmethod
    def _raw(cls, tower, num, den):
        self = object.__new__(cls)
        self.tower = tower
        self.num = num
        self.den = den
        self._hash = None
        return self

    # -- arithmetic -------------------------------------------------------

    def _other(self, other):
        if isinstance(other, RationalExpr):
            if other.tower is not self.tower and other.tower != self.tower:
                raise TowerMismatch("expressions belong to different towers")
            return other
        try:
            return self.tower.const(other)
        except TypeError:
            return NotImplemented

    def __add__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        if other.num.is_zero():
            return self
        if self.num.is_zero():
            return other
        if self.den == other.den:
            if self.den.is_one():
                return RationalExpr._raw(self.tower, self.num + other.num, self.den)
            return RationalExpr(self.tower, self.num + other.num, self.den)
        return RationalExpr(self.tower, self.num * other.den + other.num * self.den,
                            self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalExpr._raw(self.tower, -self.num, self.den)

    def __sub__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        if self.num.is_zero() or other.num.is_zero():
            return self.tower.zero
        if self.den.is_one() and other.den.is_one():
            return RationalExpr._raw(self.tower, self.num * other.num, self.den)
        return RationalExpr(self.tower, self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self) -> "RationalExpr":
        if self.num.is_zero():
            raise DivisionByZero("inverse of zero")
        return RationalExpr(self.tower, self.den, self.num)

    def __truediv__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        if other.num.is_zero():
            raise DivisionByZero(f"division of {self} by zero")
        return RationalExpr(self.tower, self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        return other / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        return RationalExpr._raw(self.tower, self.num ** k, self.den ** k)

    def derive(self, var: str) -> "RationalExpr":
        return self.tower.derive(self, var)

    # -- predicates -------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self.num.is_one() and self.den.is_one()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def is_polynomial(self) -> bool:
        return self.den.is_one()

    def depends_on(self, name: str) -> bool:
        j = self.tower._index[name]
        return bool(self.num.degrees()[j] or self.den.degrees()[j])

    def is_negative(self) -> bool:
        """Sign of the graded-lex leading coefficient of the numerator."""
        return not self.num.is_zero() and self.num.leading_coefficient() < 0

    def as_fraction(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not a constant")
        c = self.num.leading_coefficient() if not self.num.is_zero() else flint.fmpq(0)
        return Fraction(int(c.p), int(c.q))

    def sqrt(self) -> "RationalExpr | None":
        """Square root in the field, or None when there is none."""
        try:
            n = self.num.sqrt()
            d = self.den.sqrt()
        except Exception:
            return None
        return RationalExpr(self.tower, n, d)

    def substitute(self, values: Mapping[str, "RationalExpr"], target: FieldTower | None = None) -> "RationalExpr":
        """Replace symbols by expressions over ``target`` (default: own tower).

        Symbols absent from ``values`` map to the symbol of the same name in
        ``target``.
        """
        target = target or self.tower
        images = []
        for name in self.tower.names:
            if name in values:
                images.append(target.coerce(values[name]))
            else:
                images.append(target.symbol(name))
        return _evaluate(self.num, images, target) / _evaluate(self.den, images, target)

    # -- comparison & text ------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, RationalExpr):
            if other.tower is not self.tower and other.tower != self.tower:
                return False
            return self.num == other.num and self.den == other.den
        if isinstance(other, (int, Fraction)):
            return self.den.is_one() and self.num == self.tower.const(other).num
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((tuple(self.num.terms()), tuple(self.den.terms())))
        return self._hash

    def __str__(self):
        return format_rational(self)

    def __repr__(self):
        return f"RationalExpr({format_rational(self)!r})"


def _evaluate(poly, images, target):
    result = target.zero
    powers = {}
    for monom, coeff in poly.terms():
        term = target.const(coeff)
        for i, e in enumerate(monom):
            if e:
                e = int(e)
                key = (i, e)
                if key not in powers:
                    powers[key] = images[i] ** e
                term = term * powers[key]
        result = result + term
    return result


def arith(op: str, lhs: RationalExpr, rhs: RationalExpr | None = None) -> RationalExpr:
    """Field operation by name: add, sub, mul, div or neg."""
    if op == "add":
        return lhs + rhs
    if op == "sub":
        return lhs - rhs
    if op == "mul":
        return lhs * rhs
    if op == "div":
        return lhs / rhs
    if op == "neg":
        return -lhs
    raise ValueError(f"unknown field operation {op!r}")


# -- canonical text ---------------------------------------------------------

def _rational_str(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _monomial_str(monom, names) -> str:
    parts = []
    for name, e in zip(names, monom):
        if e == 1:
            parts.append(name)
        elif e:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def poly_terms(poly, names):
    """Signed term strings of a polynomial in graded-lex order."""
    out = []
    for monom, coeff in poly.terms():
        c = Fraction(int(coeff.p), int(coeff.q))
        mono = _monomial_str(monom, names)
        a = abs(c)
        if not mono:
            body = _rational_str(a)
        elif a == 1:
            body = mono
        else:
            body = f"{_rational_str(a)}*{mono}"
        out.append((c < 0, body))
    return out


def join_terms(terms) -> str:
    if not terms:
        return "0"
    neg, body = terms[0]
    s = f"-{body}" if neg else body
    for neg, body in terms[1:]:
        s += f" - {body}" if neg else f" + {body}"
    return s


def _integer_form(num, den):
    coeffs = list(num.coeffs()) + list(den.coeffs())
    scale = reduce(lcm, (int(c.q) for c in coeffs), 1)
    content = reduce(gcd, (int(c.p) * scale // int(c.q) for c in coeffs), 0)
    factor = flint.fmpq(scale, content)
    return num * factor, den * factor


def format_rational(f: RationalExpr) -> str:
    """Canonical text: a polynomial, or ``num/den`` with integer coefficients."""
    names = f.tower.names
    if f.den.is_one():
        return join_terms(poly_terms(f.num, names))
    num, den = _integer_form(f.num, f.den)
    nterms = poly_terms(num, names)
    dterms = poly_terms(den, names)
    ns = join_terms(nterms)
    if len(nterms) > 1:
        ns = f"({ns})"
    ds = join_terms(dterms)
    bare = len(dterms) == 1 and (
        den.is_constant() or (den.leading_coefficient() == 1 and "*" not in ds))
    if not bare:
        ds = f"({ds})"
    return f"{ns}/{ds}"
