"""Classical differential transformations, each expressed as an ILT.

Conventions for the plane operators: variables ``x`` and ``y`` (override
with ``xvar``/``yvar``), and

    hyperbolic  L = Dx∘Dy + a·Dx + b·Dy + c
    parabolic   L = Dx^2  + a·Dx + b·Dy + c
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .errors import (
    AlphaNotASolution, CoefficientDependsOnX, ConditionViolated, DegeneratePetren, DegenerateSeeds,
    DivisibleByM, InputError, InternalInconsistency, NoDecomposition, NoIlt, NotFirstOrder,
    NotFirstOrderM, NotUnivariate, ProportionalInputs, PsiNotProportional, SeedNotASolution,
    SeedNotAnnihilated, SeedNotEigen, ZeroB, ZeroGauge, ZeroInvariant,
)
from .field import FieldTower, RationalExpr
from .ilt import IltCertificate, build_transform, detect_psi
from .linalg import solve
from .operators import Lpdo, apply, commutator, compose, conjugate, multi_index, right_divide

__all__ = [
    "LaplaceData", "laplace_invariants", "laplace_operator", "laplace_transform", "CascadeStep",
    "CascadeReport", "cascade", "gauge_as_ilt", "lodo_divmod", "LodoEuclid", "lodo_euclid",
    "lodo_transform_as_ilt", "SchrodingerDarboux", "schrodinger_darboux", "parabolic_operator",
    "darboux_hyperbolic", "darboux_parabolic", "euler_darboux", "petren_operator", "petren_transform",
    "DiniData", "dini_decompose", "dini_to_ilt",
]


def _tower_of(*items, default=("x", "y")) -> FieldTower:
    """The richest tower among the arguments; a plain tower when none carry one."""
    towers = [i.tower for i in items if isinstance(i, (RationalExpr, Lpdo))]
    if not towers:
        return FieldTower(default)
    return max(towers, key=lambda t: len(t.generators))


def _fn(f, tower) -> Lpdo:
    return Lpdo.function(tower.coerce(f), tower)


def _D(tower, var, power=1) -> Lpdo:
    return Lpdo.derivation(tower, var, power)


def _ilt_from_split(X1: Lpdo, X2: Lpdo, H: Lpdo) -> IltCertificate:
    """Certificate for L = X1∘X2 − H with ψ read off [H, X2]; ψ = 0 when H = 0."""
    psi = X1.tower.zero if H.is_zero() else detect_psi(H, X2)
    return build_transform(X1, X2, H, psi)


# -- Laplace ----------------------------------------------------------------

@dataclass(frozen=True)
class LaplaceData:
    a: RationalExpr
    b: RationalExpr
    c: RationalExpr
    h: RationalExpr
    k: RationalExpr

    @classmethod
    def from_coeffs(cls, a, b, c, xvar="x", yvar="y") -> "LaplaceData":
        tower = _tower_of(a, b, c, default=(xvar, yvar))
        a, b, c = (tower.coerce(v) for v in (a, b, c))
        h, k = laplace_invariants(a, b, c, xvar, yvar)
        return cls(a, b, c, h, k)

    def operator(self, xvar="x", yvar="y") -> Lpdo:
        return laplace_operator(self.a, self.b, self.c, xvar, yvar)


def laplace_invariants(a, b, c, xvar="x", yvar="y") -> tuple[RationalExpr, RationalExpr]:
    """h = a_x + ab − c and k = b_y + ab − c."""
    tower = _tower_of(a, b, c, default=(xvar, yvar))
    a, b, c = (tower.coerce(v) for v in (a, b, c))
    return a.derive(xvar) + a * b - c, b.derive(yvar) + a * b - c


def laplace_operator(a, b, c, xvar="x", yvar="y") -> Lpdo:
    tower = _tower_of(a, b, c, default=(xvar, yvar))
    Dx, Dy = _D(tower, xvar), _D(tower, yvar)
    return compose(Dx, Dy) + compose(_fn(a, tower), Dx) + compose(_fn(b, tower), Dy) + _fn(c, tower)


def _laplace_split(a, b, c, direction, xvar, yvar):
    tower = _tower_of(a, b, c, default=(xvar, yvar))
    a, b, c = (tower.coerce(v) for v in (a, b, c))
    h, k = laplace_invariants(a, b, c, xvar, yvar)
    Dx, Dy = _D(tower, xvar), _D(tower, yvar)
    if direction == "X":
        return Dx + b, Dy + a, h
    if direction == "Y":
        return Dy + a, Dx + b, k
    raise InputError(f"direction must be 'X' or 'Y', got {direction!r}")


def laplace_transform(a, b, c, direction: str = "X", xvar="x", yvar="y") -> IltCertificate:
    """The classical Laplace X- or Y-transformation as a certificate."""
    X1, X2, inv = _laplace_split(a, b, c, direction, xvar, yvar)
    if inv.is_zero():
        name = "h" if direction == "X" else "k"
        raise ZeroInvariant(f"Laplace invariant {name} vanishes; the {direction}-transformation is undefined")
    return build_transform(X1, X2, Lpdo.function(inv, X1.tower), detect_psi(Lpdo.function(inv, X1.tower), X2))


def _abc_of(L: Lpdo, xvar, yvar):
    tower = L.tower
    return (L.coeff(multi_index(tower, {xvar: 1})), L.coeff(multi_index(tower, {yvar: 1})),
            L.function_part())


@dataclass(frozen=True)
class CascadeStep:
    step: int
    a: RationalExpr
    b: RationalExpr
    c: RationalExpr
    h: RationalExpr
    k: RationalExpr
    status: str

    def to_json(self) -> dict:
        return {"step": self.step, "a": str(self.a), "b": str(self.b), "c": str(self.c),
                "h": str(self.h), "k": str(self.k), "status": self.status}


@dataclass(frozen=True)
class CascadeReport:
    status: str  # Factored or Exhausted
    steps: list[CascadeStep]
    certificates: list[IltCertificate]
    factors: tuple[Lpdo, Lpdo] | None = None

    def to_json(self) -> list[dict]:
        return [s.to_json() for s in self.steps]


def cascade(a, b, c, direction: str = "X", max_steps: int = 10, xvar="x", yvar="y") -> CascadeReport:
    """Iterate the Laplace transformation until the invariant vanishes or steps run out."""
    if max_steps < 0:
        raise InputError("max_steps must be non-negative")
    tower = _tower_of(a, b, c, default=(xvar, yvar))
    a, b, c = (tower.coerce(v) for v in (a, b, c))
    steps, certs = [], []
    for i in range(max_steps + 1):
        h, k = laplace_invariants(a, b, c, xvar, yvar)
        inv = h if direction == "X" else k
        if inv.is_zero():
            X1, X2, _ = _laplace_split(a, b, c, direction, xvar, yvar)
            steps.append(CascadeStep(i, a, b, c, h, k, "Factored"))
            return CascadeReport("Factored", steps, certs, (X1, X2))
        if i == max_steps:
            steps.append(CascadeStep(i, a, b, c, h, k, "Exhausted"))
            break
        steps.append(CascadeStep(i, a, b, c, h, k, "Transformed"))
        cert = laplace_transform(a, b, c, direction, xvar, yvar)
        certs.append(cert)
        a, b, c = _abc_of(cert.L1, xvar, yvar)
    return CascadeReport("Exhausted", steps, certs)


# -- gauge ------------------------------------------------------------------

def gauge_as_ilt(L: Lpdo, lam, phi) -> IltCertificate:
    """λ⁻¹∘L∘λ with X2 = λ⁻¹, X1 = L∘λ + φλ, H = φ and ψ = 0."""
    tower = L.tower
    lam, phi = tower.coerce(lam), tower.coerce(phi)
    if lam.is_zero():
        raise ZeroGauge("gauge factor must be nonzero")
    X2 = Lpdo.function(lam.inverse(), tower)
    X1 = compose(L, Lpdo.function(lam, tower)) + phi * lam
    cert = build_transform(X1, X2, Lpdo.function(phi, tower), tower.zero)
    if cert.L1 != conjugate(L, lam):
        raise InternalInconsistency("gauge certificate disagrees with direct conjugation")
    return cert


# -- ordinary operators -----------------------------------------------------

def _univariate_var(*ops: Lpdo) -> str:
    used = set().union(*(op.derivation_vars() for op in ops))
    if len(used) > 1:
        raise NotUnivariate(f"operators differentiate in several variables: {sorted(used)}")
    if used:
        return used.pop()
    return ops[0].tower.vars[0]


def _lead(A: Lpdo) -> RationalExpr:
    return next(iter(A.items()))[1]


def lodo_divmod(A: Lpdo, B: Lpdo, var: str | None = None) -> tuple[Lpdo, Lpdo]:
    """Right Euclidean division A = Q∘B + R with ord R < ord B, any ord B."""
    if B.is_zero():
        raise ZeroDivisionError("division by the zero operator")
    var = var or _univariate_var(A, B)
    tower = A.tower
    m, inv = B.order, _lead(B).inverse()
    Q, R = Lpdo.zero(tower), A
    while not R.is_zero() and R.order >= m:
        term = compose(_fn(_lead(R) * inv, tower), _D(tower, var, R.order - m))
        Q = Q + term
        R = R - compose(term, B)
    return Q, R


def _monic(A: Lpdo):
    c = _lead(A)
    return compose(_fn(c.inverse(), A.tower), A), c


@dataclass(frozen=True)
class LodoEuclid:
    rgcd: Lpdo
    lclm: Lpdo
    L_bar: Lpdo  # K = L_bar∘M
    M_bar: Lpdo  # K = M_bar∘L
    s: Lpdo      # s∘L + t∘M = rgcd
    t: Lpdo


def lodo_euclid(L: Lpdo, M: Lpdo) -> LodoEuclid:
    """Extended noncommutative Euclid: monic rGCD, monic lLCM with cofactors, Bezout data."""
    if L.is_zero() or M.is_zero():
        raise InputError("operands must be nonzero")
    var = _univariate_var(L, M)
    tower = L.tower
    one, zero = Lpdo.function(tower.one, tower), Lpdo.zero(tower)
    r0, r1 = L, M
    s0, s1, t0, t1 = one, zero, zero, one
    while not r1.is_zero():
        q, r = lodo_divmod(r0, r1, var)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - compose(q, s1)
        t0, t1 = t1, t0 - compose(q, t1)
    G, g = _monic(r0)
    ginv = _fn(g.inverse(), tower)
    K, kc = _monic(compose(s1, L))
    kinv = _fn(kc.inverse(), tower)
    return LodoEuclid(rgcd=G, lclm=K, L_bar=-compose(kinv, t1), M_bar=compose(kinv, s1),
                      s=compose(ginv, s0), t=compose(ginv, t0))


def lodo_transform_as_ilt(L: Lpdo, M: Lpdo) -> IltCertificate:
    """L → L1 by a first-order M with rGCD(L, M) = 1."""
    if M.order != 1:
        raise NotFirstOrderM(f"M must have order 1, got {M.order}")
    var = _univariate_var(L, M)
    Q, R = right_divide(L, M, var)
    if R.is_zero():
        raise DivisibleByM("M right-divides L, so rGCD(L, M) != 1")
    cert = _ilt_from_split(Q, M, -R)
    # both sides of M1∘L = L1∘M must be a left multiple of the monic lLCM
    K = lodo_euclid(L, M).lclm
    P = compose(cert.M1, L)
    if compose(_fn(_lead(P), L.tower), K) != P:
        raise InternalInconsistency("M1∘L is not a multiple of lLCM(L, M)")
    return cert


@dataclass(frozen=True)
class SchrodingerDarboux:
    u: RationalExpr
    u_tilde: RationalExpr
    L: Lpdo
    L_tilde: Lpdo
    certificate: IltCertificate
    alternate: IltCertificate


def schrodinger_darboux(v, var: str = "x") -> SchrodingerDarboux:
    """Darboux transformation of −D² + u with u = v² + v', via A = −D + v."""
    tower = _tower_of(v, default=(var,))
    v = tower.coerce(v)
    u, u_t = v * v + v.derive(var), v * v - v.derive(var)
    D = _D(tower, var)
    L, L_t = -(D ** 2) + u, -(D ** 2) + u_t
    A, At = -D + v, D + v
    cert = build_transform(At, A, Lpdo.zero(tower), tower.zero)
    alt = build_transform(At + 1, A, A, tower.zero)
    if cert.L != L or cert.L1 != L_t or alt.L1 != L_t:
        raise InternalInconsistency("factorization does not reproduce the potentials")
    return SchrodingerDarboux(u, u_t, L, L_t, cert, alt)


# -- Darboux transformations on the plane -----------------------------------

def parabolic_operator(a, b, c, xvar="x", yvar="y") -> Lpdo:
    tower = _tower_of(a, b, c, default=(xvar, yvar))
    Dx, Dy = _D(tower, xvar), _D(tower, yvar)
    return Dx ** 2 + compose(_fn(a, tower), Dx) + compose(_fn(b, tower), Dy) + _fn(c, tower)


def _seed_operator(seeds, tower, xvar, yvar) -> Lpdo:
    """First-order M with M z = 0 for every seed.

    One seed gives Dx − z_x/z.  Two seeds give the Wronskian-type
    determinant with rows (u, z1, z2) and columns (u, u_y, u_x), divided by
    the (z, z_y) minor.
    """
    if len(seeds) == 1:
        z = seeds[0]
        if z.is_zero():
            raise DegenerateSeeds("the seed is identically zero")
        return _D(tower, xvar) - z.derive(xvar) / z
    if len(seeds) != 2:
        raise InputError("one or two seeds are supported")
    z1, z2 = seeds
    z1x, z1y, z2x, z2y = z1.derive(xvar), z1.derive(yvar), z2.derive(xvar), z2.derive(yvar)
    wx = z1 * z2x - z1x * z2
    wy = z1 * z2y - z1y * z2
    if wx.is_zero() or wy.is_zero():
        raise DegenerateSeeds("seeds are not independent: a 2x2 determinant vanishes")
    q = -wx / wy
    r = (z1y * z2x - z1x * z2y) / wy
    return _D(tower, xvar) + compose(_fn(q, tower), _D(tower, yvar)) + r


def _check_seeds(L: Lpdo, seeds):
    for z in seeds:
        res = apply(L, z)
        if not res.is_zero():
            raise SeedNotASolution(f"L applied to seed {z} gives {res}, not 0")


def _darboux_split(L: Lpdo, M: Lpdo, seeds, xvar) -> IltCertificate:
    Q, R = right_divide(L, M, xvar)
    H = -R
    if H.is_zero():
        raise DegenerateSeeds("H vanishes: M divides L")
    try:
        psi = detect_psi(H, M)
    except NoIlt as e:
        raise PsiNotProportional(f"[H, M] is not proportional to H for valid seeds: {e}") from e
    cert = build_transform(Q, M, H, psi)
    for z in seeds:
        if not (apply(M, z).is_zero() and apply(H, z).is_zero()):
            raise InternalInconsistency(f"seed {z} is not annihilated by M and H")
    return cert


def darboux_hyperbolic(a, b, c, seeds: Sequence, xvar="x", yvar="y") -> IltCertificate:
    """First-order Darboux transformation of Dx∘Dy + a·Dx + b·Dy + c from one or two seeds."""
    tower = _tower_of(a, b, c, *seeds, default=(xvar, yvar))
    a, b, c = (tower.coerce(v) for v in (a, b, c))
    seeds = [tower.coerce(z) for z in seeds]
    L = laplace_operator(a, b, c, xvar, yvar)
    _check_seeds(L, seeds)
    M = _seed_operator(seeds, tower, xvar, yvar)
    if len(seeds) == 1:
        z = seeds[0]
        alpha = b + z.derive(xvar) / z
        if alpha.is_zero():
            raise DegenerateSeeds("alpha = b + z_x/z vanishes")
    return _darboux_split(L, M, seeds, xvar)


def darboux_parabolic(a, b, c, seeds: Sequence, xvar="x", yvar="y") -> IltCertificate:
    """Darboux transformation of Dx^2 + a·Dx + b·Dy + c; one seed (q = 0) or two (q != 0)."""
    tower = _tower_of(a, b, c, *seeds, default=(xvar, yvar))
    a, b, c = (tower.coerce(v) for v in (a, b, c))
    if b.is_zero():
        raise ZeroB("the Dy coefficient b must be nonzero")
    seeds = [tower.coerce(z) for z in seeds]
    L = parabolic_operator(a, b, c, xvar, yvar)
    _check_seeds(L, seeds)
    M = _seed_operator(seeds, tower, xvar, yvar)
    return _darboux_split(L, M, seeds, xvar)


def euler_darboux(A: Lpdo, B: Lpdo, h, c, xvar: str = "x") -> IltCertificate:
    """Euler-Darboux transformation of A + B generated by an eigenfunction A h = c h."""
    tower = A.tower
    h, c = tower.coerce(h), tower.coerce(c)
    others = [v for v in tower.vars if v != xvar]
    if A.derivation_vars() - {xvar} or any(f.depends_on(v) for _, f in A.items() for v in others):
        raise InputError(f"A must be an operator in {xvar} alone")
    if xvar in B.derivation_vars() or any(f.depends_on(xvar) for _, f in B.items()):
        raise CoefficientDependsOnX(f"B must not involve {xvar}")
    if not c.is_constant():
        raise InputError("c must be a constant")
    if h.is_zero():
        raise SeedNotEigen("h must be nonzero")
    res = apply(A, h) - c * h
    if not res.is_zero():
        raise SeedNotEigen(f"A h - c h = {res}, not 0")
    M = _D(tower, xvar) - h.derive(xvar) / h
    Q, phi = right_divide(A, M, xvar)
    if phi != Lpdo.function(c, tower):
        raise InternalInconsistency(f"division remainder {phi} differs from c = {c}")
    return build_transform(Q, M, -(B + c), tower.zero)


def petren_operator(A_coeffs: Sequence, B_coeffs: Sequence, xvar="x", yvar="y", tower=None) -> Lpdo:
    tower = tower or _tower_of(*A_coeffs, *B_coeffs, default=(xvar, yvar))
    Dx, Dy = _D(tower, xvar), _D(tower, yvar)
    L = Lpdo.zero(tower)
    for i, ai in enumerate(A_coeffs):
        L = L + compose(_fn(ai, tower), compose(Dx, Dy ** i))
    for i, bi in enumerate(B_coeffs):
        L = L + compose(_fn(bi, tower), Dy ** i)
    return L


def petren_transform(A_coeffs: Sequence, B_coeffs: Sequence, alpha0, xvar="x", yvar="y") -> IltCertificate:
    """Transformation of Σ A_i·Dx·Dy^i + Σ B_i·Dy^i by the substitution Dy − α0_y/α0."""
    tower = _tower_of(*A_coeffs, *B_coeffs, alpha0, default=(xvar, yvar))
    A = [tower.coerce(v) for v in A_coeffs]
    B = [tower.coerce(v) for v in B_coeffs]
    alpha0 = tower.coerce(alpha0)
    Dy = _D(tower, yvar)
    A_hat = Lpdo.zero(tower)
    for i, ai in enumerate(A):
        A_hat = A_hat + compose(_fn(ai, tower), Dy ** i)
    res = apply(A_hat, alpha0)
    if alpha0.is_zero() or not res.is_zero():
        raise SeedNotAnnihilated(f"Σ A_i Dy^i applied to α0 gives {res}, not 0")
    L = petren_operator(A, B, xvar, yvar, tower)
    if apply(L, alpha0).is_zero():
        raise DegeneratePetren("L annihilates α0")
    X2 = Dy - alpha0.derive(yvar) / alpha0
    Q, q = right_divide(A_hat, X2, yvar)
    if not q.is_zero():
        raise InternalInconsistency(f"Â has nonzero remainder {q} modulo X2")
    B_hat = Lpdo.zero(tower)
    for i in range(max(len(A), len(B))):
        bi = B[i] if i < len(B) else tower.zero
        ai = A[i] if i < len(A) else tower.zero
        B_hat = B_hat + compose(_fn(bi - ai.derive(xvar), tower), Dy ** i)
    R, r = right_divide(B_hat, X2, yvar)
    X1 = compose(_D(tower, xvar), Q) + R
    H = -r
    return build_transform(X1, X2, H, detect_psi(H, X2))


# -- Dini -------------------------------------------------------------------

@dataclass(frozen=True)
class DiniData:
    X1: Lpdo
    X2: Lpdo
    H: Lpdo
    kappa: RationalExpr
    rho: RationalExpr
    alpha: RationalExpr | None = field(default=None)

    @classmethod
    def from_operators(cls, X1: Lpdo, X2: Lpdo, H: Lpdo, alpha=None) -> "DiniData":
        kappa, rho = dini_decompose(H, X2)
        return cls(X1, X2, H, kappa, rho, alpha)

    def l_dini(self) -> Lpdo:
        """X2∘X1 − H + ϰ·X1 + ϱ."""
        t = self.X1.tower
        return compose(self.X2, self.X1) - self.H + compose(_fn(self.kappa, t), self.X1) + self.rho

    def certificate(self) -> IltCertificate:
        if self.alpha is None:
            raise InputError("alpha is required")
        return dini_to_ilt(self.X1, self.X2, self.H, self.kappa, self.rho, self.alpha)


def dini_decompose(H: Lpdo, X2: Lpdo) -> tuple[RationalExpr, RationalExpr]:
    """Exact (ϰ, ϱ) with [H, X2] = ϰ·H + ϱ·X2."""
    if H.order != 1 or X2.order != 1:
        raise NotFirstOrder("H and X2 must both be first order")
    tower = H.tower
    C = commutator(H, X2)
    keys = sorted(set(H.terms) | set(X2.terms) | set(C.terms), reverse=True)
    matrix = [[H.coeff(k), X2.coeff(k)] for k in keys]
    rhs = [C.coeff(k) for k in keys]
    sol = solve(tower, matrix, rhs)
    probe = solve(tower, matrix, [tower.zero] * len(keys))
    if probe is not None and probe.dimension > 0:
        raise ProportionalInputs("H and X2 are proportional")
    if sol is None:
        raise NoDecomposition("[H, X2] is not a combination of H and X2")
    return sol.particular[0], sol.particular[1]


def dini_to_ilt(X1: Lpdo, X2: Lpdo, H: Lpdo, kappa, rho, alpha) -> IltCertificate:
    """ILT for L = X1∘X2 − H from a Dini decomposition and a solution α of [X2, α] + ϰα = ϱ."""
    tower = X1.tower
    kappa, rho, alpha = (tower.coerce(v) for v in (kappa, rho, alpha))
    res42 = commutator(H, X2) - compose(_fn(kappa, tower), H) - compose(_fn(rho, tower), X2)
    if not res42.is_zero():
        raise ConditionViolated("[H, X2] != ϰH + ϱX2", res42)
    bracket = commutator(X2, _fn(alpha, tower)).as_function()
    res = bracket + kappa * alpha - rho
    if not res.is_zero():
        raise AlphaNotASolution(f"[X2, α] + ϰα - ϱ = {res}, not 0", res)
    H_t = H + compose(_fn(alpha, tower), X2)
    X1_t = X1 + alpha
    psi = kappa if H_t.is_zero() else detect_psi(H_t, X2)
    if psi != kappa:
        raise InternalInconsistency(f"detected ψ = {psi} differs from ϰ = {kappa}")
    cert = build_transform(X1_t, X2, H_t, psi)
    if cert.L1 != DiniData(X1, X2, H, kappa, rho).l_dini():
        raise InternalInconsistency("transformed operator differs from the Dini operator")
    return cert
