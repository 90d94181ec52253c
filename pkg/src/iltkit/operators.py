"""Linear partial differential operators over a field tower.

An :class:`Lpdo` is a sparse map from multi-indices (tuples of derivative
exponents, one slot per independent variable of the tower) to nonzero
coefficients, always read in normal order: coefficient to the left of the
derivations.  ``*`` is operator composition, so ``A * B`` is A∘B and
``f * A`` multiplies on the left by a function.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb
from typing import Iterable, Mapping

from .errors import (
    NotAPerfectSquare,
    NotFirstOrder,
    NotInverse,
    NotQuadratic,
    SingularJacobian,
    TowerMismatch,
    UnknownVariable,
    VarCoefficientZero,
    ZeroGauge,
    ZeroOperator,
)
from .field import FieldTower, RationalExpr
from .linalg import determinant

__all__ = [
    "Lpdo", "PrincipalSymbol", "multi_index", "compose", "commutator",
    "principal_symbol", "apply", "right_divide", "conjugate", "change_vars",
    "factor_symbol_quadratic",
]


def _index_key(idx):
    # graded lex, largest first
    return (-sum(idx), tuple(-e for e in idx))


def multi_index(tower: FieldTower, exponents: Mapping[str, int]) -> tuple[int, ...]:
    """Tuple form of a ``{var: exponent}`` map."""
    idx = [0] * len(tower.vars)
    for var, e in exponents.items():
        if e < 0:
            raise ValueError("negative derivative exponent")
        idx[tower.var_index(var)] = e
    return tuple(idx)


def _sub_indices(alpha):
    """All gamma <= alpha componentwise."""
    out = [()]
    for a in alpha:
        out = [g + (k,) for g in out for k in range(a + 1)]
    return out


class Lpdo:
    __slots__ = ("tower", "_terms", "_hash")

    def __init__(self, tower: FieldTower, terms: Mapping | Iterable = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[tuple, RationalExpr] = {}
        n = len(tower.vars)
        for idx, c in items:
            if isinstance(idx, Mapping):
                idx = multi_index(tower, idx)
            idx = tuple(idx)
            if len(idx) != n:
                raise ValueError(f"multi-index {idx} does not match {n} variables")
            c = tower.coerce(c)
            if idx in acc:
                acc[idx] = acc[idx] + c
            else:
                acc[idx] = c
        self.tower = tower
        self._terms = {k: acc[k] for k in sorted(acc, key=_index_key) if not acc[k].is_zero()}
        self._hash = None

    @classmethod
    def _from_sorted(cls, tower, terms):
        self = object.__new__(cls)
        self.tower = tower
        self._terms = terms
        self._hash = None
        return self

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, tower: FieldTower) -> "Lpdo":
        return cls._from_sorted(tower, {})

    @classmethod
    def function(cls, f, tower: FieldTower | None = None) -> "Lpdo":
        """The zero-order operator of multiplication by ``f``."""
        if tower is None:
            tower = f.tower
        return cls(tower, {(0,) * len(tower.vars): f})

    @classmethod
    def derivation(cls, tower: FieldTower, var: str, power: int = 1) -> "Lpdo":
        return cls(tower, {multi_index(tower, {var: power}): 1})

    @classmethod
    def derivation_index(cls, tower: FieldTower, index: tuple[int, ...]) -> "Lpdo":
        """The monomial D^index."""
        return cls(tower, {tuple(index): 1})

    # -- inspection -------------------------------------------------------

    @property
    def terms(self) -> dict[tuple, RationalExpr]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    @property
    def order(self) -> int | None:
        """Largest total degree; None for the zero operator."""
        if not self._terms:
            return None
        return max(sum(k) for k in self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def coeff(self, index) -> RationalExpr:
        if isinstance(index, Mapping):
            index = multi_index(self.tower, index)
        return self._terms.get(tuple(index), self.tower.zero)

    def function_part(self) -> RationalExpr:
        return self.coeff((0,) * len(self.tower.vars))

    def as_function(self) -> RationalExpr | None:
        """The coefficient if this is a zero-order operator, else None."""
        if self.is_zero():
            return self.tower.zero
        if self.order == 0:
            return self.function_part()
        return None

    def derivation_vars(self) -> set[str]:
        """Variables whose derivations occur in some term."""
        return {v for k in self._terms for v, e in zip(self.tower.vars, k) if e}

    def homogeneous_part(self, degree: int) -> "Lpdo":
        return Lpdo._from_sorted(self.tower, {k: c for k, c in self._terms.items() if sum(k) == degree})

    def map_coefficients(self, fn) -> "Lpdo":
        return Lpdo(self.tower, {k: fn(c) for k, c in self._terms.items()})

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Lpdo):
            if other.tower is not self.tower and other.tower != self.tower:
                raise TowerMismatch("operators belong to different towers")
            return other
        if isinstance(other, (RationalExpr, int, Fraction)):
            return Lpdo.function(self.tower.coerce(other), self.tower)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc = dict(self._terms)
        for k, c in other._terms.items():
            acc[k] = acc[k] + c if k in acc else c
        return Lpdo._from_sorted(self.tower, {k: acc[k] for k in sorted(acc, key=_index_key)
                                              if not acc[k].is_zero()})

    __radd__ = __add__

    def __neg__(self):
        return Lpdo._from_sorted(self.tower, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return compose(self, other)

    def __rmul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return compose(other, self)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        result = Lpdo.function(self.tower.one, self.tower)
        for _ in range(k):
            result = compose(result, self)
        return result

    def __call__(self, f):
        return apply(self, f)

    def __eq__(self, other):
        if isinstance(other, Lpdo):
            if other.tower is not self.tower and other.tower != self.tower:
                return False
            return self._terms == other._terms
        if isinstance(other, (RationalExpr, int, Fraction)):
            return self == self._coerce(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(self._terms.items()))
        return self._hash

    def __str__(self):
        from .text import format_operator
        return format_operator(self)

    def __repr__(self):
        return f"Lpdo({str(self)!r})"


class PrincipalSymbol:
    """Homogeneous polynomial in the formal variables xi_v (commutative)."""

    __slots__ = ("tower", "degree", "terms")

    def __init__(self, tower: FieldTower, degree: int | None, terms: Mapping[tuple, RationalExpr]):
        self.tower = tower
        self.degree = degree
        self.terms = {k: c for k, c in sorted(terms.items(), key=lambda kc: _index_key(kc[0]))
                      if not c.is_zero()}
        for k in self.terms:
            if sum(k) != degree:
                raise ValueError("principal symbol must be homogeneous")

    def is_zero(self) -> bool:
        return not self.terms

    def __mul__(self, other: "PrincipalSymbol") -> "PrincipalSymbol":
        acc: dict[tuple, RationalExpr] = {}
        for a, ca in self.terms.items():
            for b, cb in other.terms.items():
                k = tuple(i + j for i, j in zip(a, b))
                acc[k] = acc[k] + ca * cb if k in acc else ca * cb
        return PrincipalSymbol(self.tower, self.degree + other.degree, acc)

    def __eq__(self, other):
        if not isinstance(other, PrincipalSymbol):
            return NotImplemented
        return self.degree == other.degree and self.terms == other.terms

    def __hash__(self):
        return hash((self.degree, tuple(self.terms.items())))

    def __str__(self):
        from .text import format_terms
        return format_terms(self.tower, self.terms, atom="xi_", sep="*")

    def __repr__(self):
        return f"PrincipalSymbol({str(self)!r})"


# -- operations -------------------------------------------------------------

def _same_tower(a: Lpdo, b: Lpdo):
    if a.tower is not b.tower and a.tower != b.tower:
        raise TowerMismatch("operators belong to different towers")


class _Derivatives:
    """Memoized mixed partials D^gamma f."""

    __slots__ = ("tower", "cache")

    def __init__(self, tower):
        self.tower = tower
        self.cache = {}

    def get(self, f: RationalExpr, gamma: tuple) -> RationalExpr:
        if not any(gamma):
            return f
        key = (id(f), gamma)
        hit = self.cache.get(key)
        if hit is not None:
            return hit[1]
        i = next(j for j, e in enumerate(gamma) if e)
        lower = gamma[:i] + (gamma[i] - 1,) + gamma[i + 1:]
        prev = self.get(f, lower)
        value = self.tower.zero if prev.is_zero() else prev.derive(self.tower.vars[i])
        self.cache[key] = (f, value)   # keep f alive so id() stays unique
        return value


def _den_key(f: RationalExpr, memo: dict):
    """Hashable stand-in for a denominator; None for 1."""
    i = id(f)
    if i not in memo:
        memo[i] = None if f.den.is_one() else str(f.den)
    return memo[i]


def compose(A: Lpdo, B: Lpdo) -> Lpdo:
    """A∘B by the generalized Leibniz rule."""
    _same_tower(A, B)
    tower = A.tower
    ders = _Derivatives(tower)
    # per output index, raw numerators summed over a shared (uncancelled) denominator;
    # canonicalizing once per group avoids a gcd on every product and sum
    acc: dict[tuple, dict] = {}
    dkeys: dict[int, str | None] = {}
    for alpha, a in A._terms.items():
        subs = _sub_indices(alpha)
        for beta, b in B._terms.items():
            for gamma in subs:
                db = ders.get(b, gamma)
                if db.is_zero():
                    continue
                mult = 1
                for ai, gi in zip(alpha, gamma):
                    if gi:
                        mult *= comb(ai, gi)
                num = a.num * db.num
                if mult != 1:
                    num = num * mult
                ka, kb = _den_key(a, dkeys), _den_key(db, dkeys)
                if ka is None:
                    key, den = (None, kb), db.den
                elif kb is None:
                    key, den = (ka, None), a.den
                else:
                    key, den = (ka, kb) if ka <= kb else (kb, ka), None
                k = tuple(ai - gi + bi for ai, gi, bi in zip(alpha, gamma, beta))
                groups = acc.setdefault(k, {})
                if key in groups:
                    groups[key][0] += num
                else:
                    groups[key] = [num, den if den is not None else a.den * db.den]
    terms = {}
    for k in sorted(acc, key=_index_key):
        num = den = None
        for n, d in acc[k].values():
            if n.is_zero():
                continue
            if num is None:
                num, den = n, d
            else:
                num, den = num * d + n * den, den * d
        if num is not None and not num.is_zero():
            terms[k] = RationalExpr(tower, num, den)
    return Lpdo._from_sorted(tower, terms)


def commutator(A: Lpdo, B: Lpdo) -> Lpdo:
    """[A, B] = A∘B − B∘A."""
    return compose(A, B) - compose(B, A)


def principal_symbol(A: Lpdo) -> PrincipalSymbol:
    if A.is_zero():
        raise ZeroOperator("the zero operator has no principal symbol")
    d = A.order
    return PrincipalSymbol(A.tower, d, {k: c for k, c in A._terms.items() if sum(k) == d})


def symbols_equal(A: Lpdo, B: Lpdo) -> bool:
    """Principal symbols agree; two zero operators count as equal."""
    if A.is_zero() or B.is_zero():
        return A.is_zero() and B.is_zero()
    return principal_symbol(A) == principal_symbol(B)


def apply(A: Lpdo, f: RationalExpr) -> RationalExpr:
    """A acting on the function f."""
    tower = A.tower
    f = tower.coerce(f)
    if f.tower is not tower and f.tower != tower:
        raise TowerMismatch("function belongs to a different tower")
    ders = _Derivatives(tower)
    result = tower.zero
    for alpha, a in A._terms.items():
        d = ders.get(f, alpha)
        if not d.is_zero():
            result = result + a * d
    return result


def right_divide(L: Lpdo, M: Lpdo, var: str) -> tuple[Lpdo, Lpdo]:
    """Right division by a first-order M eliminating D_var: L = Q∘M + R.

    The remainder R contains no derivative in ``var``.
    """
    _same_tower(L, M)
    tower = L.tower
    if M.order != 1:
        raise NotFirstOrder(f"divisor must be first order, got order {M.order}")
    v = tower.var_index(var)
    ev = tuple(1 if i == v else 0 for i in range(len(tower.vars)))
    lead = M.coeff(ev)
    if lead.is_zero():
        raise VarCoefficientZero(f"divisor has no D{var} term")
    inv = lead.inverse()
    rem = L
    quotient: dict[tuple, RationalExpr] = {}
    while True:
        cands = [k for k in rem._terms if k[v] > 0]
        if not cands:
            break
        k = max(cands, key=lambda i: (i[v], sum(i), i))
        c = rem._terms[k] * inv
        q = tuple(e - 1 if i == v else e for i, e in enumerate(k))
        quotient[q] = quotient[q] + c if q in quotient else c
        rem = rem - compose(Lpdo._from_sorted(tower, {q: c}), M)
    return Lpdo(tower, quotient), rem


def conjugate(L: Lpdo, lam: RationalExpr) -> Lpdo:
    """The gauge transform λ⁻¹∘L∘λ."""
    tower = L.tower
    lam = tower.coerce(lam)
    if lam.is_zero():
        raise ZeroGauge("gauge factor must be nonzero")
    if lam.is_one():
        return L
    return compose(compose(Lpdo.function(lam.inverse(), tower), L), Lpdo.function(lam, tower))


def change_vars(L: Lpdo, fwd: Mapping[str, RationalExpr], inv: Mapping[str, RationalExpr],
                target: FieldTower | None = None) -> Lpdo:
    """Push L forward along the coordinate change X = fwd(x), x = inv(X).

    ``fwd`` maps each new variable name to an expression in the old
    variables; ``inv`` maps each old variable to an expression in the new
    ones.  When the new names coincide with the old ones the result lives in
    the same tower; otherwise a fresh tower over the new names is used
    unless ``target`` is given.
    """
    source = L.tower
    if source.generators:
        raise TowerMismatch("change of variables is only supported on towers without generators")
    if target is None:
        target = source if set(fwd) == set(source.vars) else FieldTower(list(fwd))
    if set(inv) != set(source.vars):
        raise UnknownVariable(f"inverse map must cover exactly {source.vars}")
    if set(fwd) != set(target.vars):
        raise UnknownVariable(f"forward map must cover exactly {target.vars}")
    fwd = {k: source.coerce(e) for k, e in fwd.items()}
    inv = {k: target.coerce(e) for k, e in inv.items()}
    for X in target.vars:
        if fwd[X].substitute(inv, target) != target.var(X):
            raise NotInverse(f"fwd∘inv is not the identity on {X}")
    for x in source.vars:
        if inv[x].substitute(fwd, source) != source.var(x):
            raise NotInverse(f"inv∘fwd is not the identity on {x}")
    jac = [[fwd[X].derive(x).substitute(inv, target) for x in source.vars] for X in target.vars]
    if determinant(target, jac).is_zero():
        raise SingularJacobian("Jacobian of the coordinate change vanishes")
    images = []
    for j, x in enumerate(source.vars):
        images.append(Lpdo(target, {multi_index(target, {X: 1}): jac[i][j]
                                    for i, X in enumerate(target.vars)}))
    powers: dict[tuple[int, int], Lpdo] = {}

    def power(j, e):
        if (j, e) not in powers:
            powers[(j, e)] = images[j] ** e
        return powers[(j, e)]

    result = Lpdo.zero(target)
    for alpha, c in L._terms.items():
        term = Lpdo.function(c.substitute(inv, target), target)
        for j, e in enumerate(alpha):
            if e:
                term = compose(term, power(j, e))
        result = result + term
    return result


def factor_symbol_quadratic(L: Lpdo, var_pair: tuple[str, str]) -> tuple[PrincipalSymbol, PrincipalSymbol]:
    """Split a binary quadratic principal symbol into two linear factors.

    Returns linear forms (f1, f2) with f1·f2 = Sym L.  The leading
    coefficient goes into f1.  Raises NotAPerfectSquare when the
    discriminant has no square root in the field.
    """
    tower = L.tower
    if L.order != 2:
        raise NotQuadratic(f"operator has order {L.order}, expected 2")
    u, v = var_pair
    iu, iv = tower.var_index(u), tower.var_index(v)
    sym = principal_symbol(L)
    for k in sym.terms:
        if any(e for i, e in enumerate(k) if i not in (iu, iv)):
            raise NotQuadratic(f"symbol involves variables other than {u}, {v}")
    a = sym.terms.get(multi_index(tower, {u: 2}), tower.zero)
    b = sym.terms.get(multi_index(tower, {u: 1, v: 1}), tower.zero)
    c = sym.terms.get(multi_index(tower, {v: 2}), tower.zero)
    eu = multi_index(tower, {u: 1})
    ev = multi_index(tower, {v: 1})

    def linear(p, q):
        return PrincipalSymbol(tower, 1, {eu: p, ev: q})

    if a.is_zero():
        # xi_v * (b xi_u + c xi_v)
        return linear(b, c), linear(tower.zero, tower.one)
    root = (b * b - 4 * a * c).sqrt()
    if root is None:
        raise NotAPerfectSquare(f"discriminant {b * b - 4 * a * c} is not a square")
    r1 = (-b + root) / (2 * a)
    r2 = (-b - root) / (2 * a)
    # a (xi_u - r1 xi_v)(xi_u - r2 xi_v)
    return linear(a, -a * r1), linear(tower.one, -r2)
