import random

import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from iltkit import (
    FieldTower, Lpdo, apply, change_vars, commutator, compose, conjugate, factor_symbol_quadratic,
    parse_operator, principal_symbol, right_divide, symbols_equal,
)
from iltkit.errors import (
    NotAPerfectSquare, NotFirstOrder, NotInverse, NotQuadratic, TowerMismatch,
    VarCoefficientZero, ZeroGauge, ZeroOperator,
)

import oracle
from randgen import rand_operator, rand_rational

T = FieldTower(["x", "y", "z"])
T2 = FieldTower(["x", "y"])


def P(text, tower=T):
    return parse_operator(text, tower)


L_EXAMPLE = "x^2*Dx*Dy + x*y*Dx*Dz - x^3*Dz^2 + Dx + 2*x*Dy + 2*y*Dz + 2/x"


def test_compose_examples():
    assert compose(P("Dx"), P("x")) - compose(P("x"), P("Dx")) == P("1")
    assert compose(P("Dx + y"), P("Dy + x")) == P("Dx*Dy + x*Dx + y*Dy + x*y + 1")
    got = compose(P("x^2*Dy + x*y*Dz + 1"), P("Dx + 2/x"))
    assert str(got) == "x^2*Dx*Dy + x*y*Dx*Dz + Dx + 2*x*Dy + 2*y*Dz + 2/x"
    assert got - P("x^3*Dz^2") == P(L_EXAMPLE)


def test_compose_on_test_functions():
    A = compose(P("Dx + y"), P("Dy + x"))
    for f in ["1", "x", "y", "x*y", "x^2*y"]:
        f = T.expr(f)
        assert apply(A, f) == apply(P("Dx + y"), apply(P("Dy + x"), f))


def test_commutator_examples():
    assert commutator(P("Dx"), P("Dy")).is_zero()
    assert commutator(P("x^3*Dz^2"), P("Dx + 2/x")) == P("-3*x^2*Dz^2")
    rng = random.Random(3)
    A = rand_operator(rng, T)
    assert commutator(A, A).is_zero()


def test_principal_symbol_examples():
    assert str(principal_symbol(P("Dx*Dy + x*Dx"))) == "xi_x*xi_y"
    assert str(principal_symbol(P(L_EXAMPLE))) == "x^2*xi_x*xi_y + x*y*xi_x*xi_z - x^3*xi_z^2"
    with pytest.raises(ZeroOperator):
        principal_symbol(Lpdo.zero(T))


def test_apply_examples():
    G = T2.declare_generator("g", {"x": 0, "y": "g"})
    g, x = G.symbol("g"), G.symbol("x")
    assert apply(parse_operator("Dx + 2/x", G), x ** 2 * g) == 4 * x * g
    assert apply(P("Dx^2 + x*Dy + 7"), 0).is_zero()
    assert apply(P("Dx*Dy + x*y*Dx"), 1).is_zero()
    assert apply(P("Dx*Dy + x*y*Dx", T2), T2.expr("x*y")) == T2.expr("x*y^2 + 1")


def test_right_divide_examples():
    Q, R = right_divide(P("Dx^2"), P("Dx + x"), "x")
    assert (Q, R) == (P("Dx - x"), P("x^2 - 1"))
    a, b, c, r = (T2.expr(s) for s in ("x*y", "y + 1", "x^2", "1/(x + y)"))
    L = Lpdo(T2, {(2, 0): 1, (1, 0): a, (0, 1): b, (0, 0): c})
    Q, R = right_divide(L, Lpdo(T2, {(1, 0): 1, (0, 0): r}), "x")
    assert Q == Lpdo(T2, {(1, 0): 1, (0, 0): a - r})
    assert R == Lpdo(T2, {(0, 1): b, (0, 0): c - r.derive("x") + r * r - a * r})
    M = P("Dx + y*Dz + 1")
    assert right_divide(M, M, "x") == (P("1"), Lpdo.zero(T))


def test_right_divide_errors():
    with pytest.raises(NotFirstOrder):
        right_divide(P("Dx^3"), P("Dx^2"), "x")
    with pytest.raises(VarCoefficientZero):
        right_divide(P("Dx^3"), P("Dy + 1"), "x")


def test_conjugate_examples():
    assert conjugate(P("Dx^2"), T.expr("x")) == P("Dx^2 + 2/x*Dx")
    L = P(L_EXAMPLE)
    assert conjugate(L, 1) == L
    with pytest.raises(ZeroGauge):
        conjugate(L, 0)


def test_change_vars_examples():
    A = P("Dx*Dy + x*Dz + y", T)
    ident = {v: T.symbol(v) for v in T.vars}
    assert change_vars(A, ident, ident) == A
    U = FieldTower(["X"])
    assert change_vars(parse_operator("Dx", FieldTower(["x"])), {"X": FieldTower(["x"]).expr("2*x")},
                       {"x": U.expr("X/2")}) == parse_operator("2*DX", U)
    N = FieldTower(["X", "Y"])
    fwd = {"X": T2.expr("x + y^2"), "Y": T2.expr("y")}
    inv = {"x": N.expr("X - Y^2"), "y": N.expr("Y")}
    assert change_vars(P("Dy", T2), fwd, inv) == parse_operator("2*Y*DX + DY", N)


def test_change_vars_oracle():
    # D_y u(x + y^2, y) computed by sympy equals the pushed-forward operator applied to u(X, Y)
    X, Y, x, y = sp.symbols("X Y x y")
    u = sp.Function("u")
    lhs = sp.diff(u(x + y ** 2, y), y).subs({x: X - Y ** 2, y: Y})
    rhs = 2 * Y * sp.Derivative(u(X, Y), X) + sp.Derivative(u(X, Y), Y)
    lhs = lhs.doit()
    assert sp.simplify(lhs.rewrite(sp.Derivative) - rhs.doit()) == 0


def test_change_vars_errors():
    N = FieldTower(["X", "Y"])
    with pytest.raises(NotInverse):
        change_vars(P("Dy", T2), {"X": T2.expr("x"), "Y": T2.expr("y^2")}, {"x": N.expr("X"), "y": N.expr("Y")})
    # a collapsing map has no rational inverse, so the inverse check fires first
    with pytest.raises(NotInverse):
        change_vars(P("Dy", T2), {"X": T2.expr("x + y"), "Y": T2.expr("x + y")},
                    {"x": N.expr("X"), "y": N.expr("Y")})


def test_change_vars_respects_composition():
    rng = random.Random(11)
    N = FieldTower(["X", "Y"])
    fwd = {"X": T2.expr("x + y^2"), "Y": T2.expr("y")}
    inv = {"x": N.expr("X - Y^2"), "y": N.expr("Y")}
    for _ in range(20):
        A, B = rand_operator(rng, T2, 1), rand_operator(rng, T2, 2)
        assert change_vars(compose(A, B), fwd, inv) == compose(change_vars(A, fwd, inv), change_vars(B, fwd, inv))


def test_factor_symbol_quadratic():
    a, b = factor_symbol_quadratic(P("Dx*Dy + x*Dx", T2), ("x", "y"))
    assert a * b == principal_symbol(P("Dx*Dy", T2))
    L = P("Dx^2 - x^2*Dy^2 + Dy", T2)
    a, b = factor_symbol_quadratic(L, ("x", "y"))
    assert {str(a), str(b)} == {"xi_x - x*xi_y", "xi_x + x*xi_y"}
    assert a * b == principal_symbol(L)
    with pytest.raises(NotAPerfectSquare):
        factor_symbol_quadratic(P("Dx^2 - x*Dy^2", T2), ("x", "y"))
    with pytest.raises(NotQuadratic):
        factor_symbol_quadratic(P("Dx^3", T2), ("x", "y"))


def test_tower_mismatch():
    with pytest.raises(TowerMismatch):
        compose(P("Dx"), P("Dx", T2))


# -- independent oracle: operators acting on a generic function -------------

@pytest.mark.parametrize("seed", range(15))
def test_compose_matches_sympy_action(seed):
    rng = random.Random(seed)
    A, B = rand_operator(rng, T2, 2), rand_operator(rng, T2, 2)
    S, u = oracle.generic(T2)
    lhs = oracle.action(compose(A, B), S)(u)
    rhs = oracle.action(A, S)(oracle.action(B, S)(u))
    assert oracle.is_zero(lhs - rhs)


# -- properties ---------------------------------------------------------------

def _ops(seed, n=3, orders=(2, 2, 2)):
    rng = random.Random(seed)
    return [rand_operator(rng, T, o) for o in orders]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32))
def test_associativity(seed):
    A, B, C = _ops(seed)
    assert compose(compose(A, B), C) == compose(A, compose(B, C))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32))
def test_symbol_multiplicative_and_order_additive(seed):
    A, B = _ops(seed, orders=(2, 2))[:2]
    AB = compose(A, B)
    assert not AB.is_zero()
    assert AB.order == A.order + B.order
    assert principal_symbol(AB) == principal_symbol(A) * principal_symbol(B)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32))
def test_apply_composition(seed):
    rng = random.Random(seed)
    A, B = rand_operator(rng, T, 2), rand_operator(rng, T, 2)
    f = rand_rational(rng, T)
    assert apply(compose(A, B), f) == apply(A, apply(B, f))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32))
def test_right_divide_reconstruction(seed):
    rng = random.Random(seed)
    L = rand_operator(rng, T, 3)
    var = rng.choice(T.vars)
    M = rand_operator(rng, T, 1) + Lpdo.derivation(T, var)
    if M.coeff(tuple(int(v == var) for v in T.vars)).is_zero():
        M = M + Lpdo.derivation(T, var)
    Q, R = right_divide(L, M, var)
    assert compose(Q, M) + R == L
    assert all(idx[T.var_index(var)] == 0 for idx, _ in R.items())


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_conjugate_preserves_symbol(seed):
    rng = random.Random(seed)
    L = rand_operator(rng, T, 2)
    lam = rand_rational(rng, T, nonzero=True)
    C = conjugate(L, lam)
    assert symbols_equal(C, L)
    assert compose(Lpdo.function(lam, T), C) == compose(L, Lpdo.function(lam, T))
