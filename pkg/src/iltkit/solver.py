"""Constructive intertwining: given L and a first-order M, find M1, L1 with M1∘L = L1∘M.

With the ansatz

    M1 = Σ_{|γ|≤1} m_γ D^γ,    L1 = top(L) + Σ_{|β|<ord L} l_β D^β

the identity is linear in the unknown functions, because every unknown
multiplies from the left and derivatives only ever hit known coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as cartesian

from .errors import ConditionViolated, InternalInconsistency, NoIlt, NotFirstOrderM, ZeroAlphaCoefficient
from .field import RationalExpr
from .ilt import IltCertificate, build_transform, detect_psi, verify_intertwining
from .linalg import solve
from .operators import Lpdo, _index_key, apply, compose, conjugate, right_divide

__all__ = [
    "IntertwiningSolution", "solve_intertwining", "system_residual", "LclmReport", "certify_lclm",
    "first_order_to_ilt", "kernel_check",
]


def _indices(n: int, max_order: int) -> list[tuple[int, ...]]:
    """All multi-indices with |γ| ≤ max_order, graded lex, largest first."""
    out = [g for g in cartesian(range(max_order + 1), repeat=n) if sum(g) <= max_order]
    return sorted(out, key=_index_key, reverse=True)


@dataclass(frozen=True)
class IntertwiningSolution:
    status: str  # Unique, NonUnique or None
    L1: Lpdo | None = None
    M1: Lpdo | None = None
    dimension: int = 0
    directions: list[tuple[Lpdo, Lpdo]] = field(default_factory=list)  # (ΔM1, ΔL1)
    diagnostics: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        out = {"status": self.status, "dimension": self.dimension}
        if self.L1 is not None:
            out["L1"] = str(self.L1)
            out["M1"] = str(self.M1)
        if self.directions:
            out["directions"] = [{"M1": str(m), "L1": str(l)} for m, l in self.directions]
        if self.diagnostics:
            out["diagnostics"] = list(self.diagnostics)
        return out


def _unknowns(L: Lpdo, M: Lpdo):
    n = len(L.tower.vars)
    return _indices(n, 1), _indices(n, L.order - 1)


def _assemble(L: Lpdo, M: Lpdo):
    """Columns of the linear system, the right-hand side and the row index list."""
    m_idx, l_idx = _unknowns(L, M)
    tower = L.tower
    columns = []
    for g in m_idx:
        columns.append(compose(Lpdo.derivation_index(tower, g), L))
    for b in l_idx:
        columns.append(-compose(Lpdo.derivation_index(tower, b), M))
    top = L.homogeneous_part(L.order)
    rhs_op = compose(top, M)
    rows = set(rhs_op.terms)
    for col in columns:
        rows.update(col.terms)
    rows = sorted(rows, key=_index_key, reverse=True)
    matrix = [[col.coeff(r) for col in columns] for r in rows]
    rhs = [rhs_op.coeff(r) for r in rows]
    return m_idx, l_idx, top, matrix, rhs, rows


def _operator(tower, indices, values) -> Lpdo:
    return Lpdo(tower, {g: v for g, v in zip(indices, values) if not v.is_zero()})


def solve_intertwining(L: Lpdo, M: Lpdo) -> IntertwiningSolution:
    """Solve M1∘L = L1∘M with ord M1 ≤ 1 and Sym L1 = Sym L by elimination."""
    if M.order != 1:
        raise NotFirstOrderM(f"M must have order 1, got {M.order}")
    if L.order is None or L.order < 1:
        raise NotFirstOrderM("L must have order at least 1")
    tower = L.tower
    m_idx, l_idx, top, matrix, rhs, _ = _assemble(L, M)
    sol = solve(tower, matrix, rhs)
    if sol is None:
        return IntertwiningSolution("None", diagnostics=["linear system is inconsistent"])
    k = len(m_idx)
    M1 = _operator(tower, m_idx, sol.particular[:k])
    L1 = top + _operator(tower, l_idx, sol.particular[k:])
    diagnostics = []
    if M1.order != 1:
        diagnostics.append(f"solved M1 has order {M1.order}, not 1")
    directions = [(_operator(tower, m_idx, v[:k]), _operator(tower, l_idx, v[k:])) for v in sol.nullspace]
    status = "Unique" if sol.dimension == 0 else "NonUnique"
    return IntertwiningSolution(status, L1, M1, sol.dimension, directions, diagnostics)


def system_residual(L: Lpdo, M: Lpdo, solution: IntertwiningSolution) -> list[RationalExpr]:
    """Row-by-row residual of the assembled system at the returned solution."""
    m_idx, l_idx, top, matrix, rhs, _ = _assemble(L, M)
    tower = L.tower
    values = [solution.M1.coeff(g) for g in m_idx] + [(solution.L1 - top).coeff(b) for b in l_idx]
    out = []
    for row, b in zip(matrix, rhs):
        acc = -b
        for a, u in zip(row, values):
            acc = acc + a * u
        out.append(acc)
    return out or [tower.zero]


@dataclass(frozen=True)
class LclmReport:
    product_identity: bool
    orders_equal: bool
    symbols_equal: bool
    not_divisible: bool
    residual: Lpdo

    @property
    def certified(self) -> bool:
        return self.product_identity and self.orders_equal and self.symbols_equal and self.not_divisible

    def to_json(self) -> dict:
        return {
            "product_identity": self.product_identity,
            "orders_equal": self.orders_equal,
            "symbols_equal": self.symbols_equal,
            "not_divisible": self.not_divisible,
            "certified": self.certified,
            "residual": str(self.residual),
        }


def certify_lclm(L: Lpdo, M: Lpdo, L1: Lpdo, M1: Lpdo) -> LclmReport:
    """Check the hypotheses under which M1∘L = L1∘M is the left lcm of L and M."""
    rep = verify_intertwining(M1, L, L1, M)
    not_div = True
    if M.order == 1:
        var = next(v for v in M.tower.vars
                   if not M.coeff(tuple(int(w == v) for w in M.tower.vars)).is_zero())
        not_div = not right_divide(L, M, var)[1].is_zero()
    return LclmReport(rep.product_identity, rep.orders_equal, rep.symbols_equal, not_div, rep.residual)


def first_order_to_ilt(L: Lpdo, M: Lpdo, M1: Lpdo, L1: Lpdo, var: str) -> IltCertificate:
    """Normalize a first-order intertwining into an ILT of L to α⁻¹∘L1∘α.

    α is the coefficient of D_var in M and X2 = α⁻¹∘M.
    """
    tower = L.tower
    res = compose(M1, L) - compose(L1, M)
    if not res.is_zero():
        raise ConditionViolated("M1∘L != L1∘M", res)
    alpha = M.coeff(tuple(int(w == var) for w in tower.vars))
    if alpha.is_zero():
        raise ZeroAlphaCoefficient(f"M has no D{var} term")
    inv = Lpdo.function(alpha.inverse(), tower)
    X2 = compose(inv, M)
    Q, R = right_divide(L, X2, var)
    H = -R
    if H.is_zero():
        psi = (compose(inv, M1) - X2).as_function()
        if psi is None:
            raise InternalInconsistency("normalized M1 - X2 is not a function")
    else:
        try:
            psi = detect_psi(H, X2)
        except NoIlt as e:
            raise InternalInconsistency(f"no ILT although one is guaranteed: {e}") from e
    cert = build_transform(Q, X2, H, psi)
    if cert.L1 != conjugate(L1, alpha):
        raise InternalInconsistency("ILT target differs from the conjugated L1")
    return cert


def kernel_check(L: Lpdo, M: Lpdo, seeds, H: Lpdo | None = None) -> list[dict]:
    """For each seed: whether L, M and (if given) H annihilate it."""
    tower = L.tower
    out = []
    for z in seeds:
        z = tower.coerce(z)
        out.append({
            "seed": str(z),
            "L": apply(L, z).is_zero(),
            "M": apply(M, z).is_zero(),
            "H": None if H is None else apply(H, z).is_zero(),
        })
    return out
