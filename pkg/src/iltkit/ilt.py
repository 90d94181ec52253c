"""Intertwining Laplace transformations.

Given a splitting L = X1∘X2 − H where the commutator [H, X2] equals ψ·H
for a function ψ, the transformed operator is

    L1 = X2∘X1 + ψ·X1 − H

and the pair is intertwined by M = X2, M1 = X2 + ψ:  M1∘L = L1∘M.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .errors import ConditionViolated, InputError, NoIlt, SeedDependsOnVar, ZeroH, ZeroTheta
from .field import FieldTower, RationalExpr
from .operators import Lpdo, change_vars, commutator, compose, symbols_equal

__all__ = [
    "IltCertificate", "IntertwiningReport", "h_from_factors", "detect_psi",
    "build_transform", "verify_intertwining", "generate",
]


@dataclass(frozen=True)
class IntertwiningReport:
    product_identity: bool
    orders_equal: bool
    symbols_equal: bool
    residual: Lpdo

    @property
    def passed(self) -> bool:
        return self.product_identity and self.orders_equal and self.symbols_equal

    def to_json(self) -> dict:
        return {
            "product_identity": self.product_identity,
            "orders_equal": self.orders_equal,
            "symbols_equal": self.symbols_equal,
            "residual": str(self.residual),
            "passed": self.passed,
        }


def verify_intertwining(M1: Lpdo, L: Lpdo, L1: Lpdo, M: Lpdo) -> IntertwiningReport:
    """Check M1∘L = L1∘M together with the order and symbol conditions."""
    residual = compose(M1, L) - compose(L1, M)
    return IntertwiningReport(
        product_identity=residual.is_zero(),
        orders_equal=L.order == L1.order and M.order == M1.order,
        symbols_equal=symbols_equal(L, L1),
        residual=residual,
    )


@dataclass(frozen=True)
class IltCertificate:
    X1: Lpdo
    X2: Lpdo
    H: Lpdo
    psi: RationalExpr
    L: Lpdo
    L1: Lpdo
    M: Lpdo
    M1: Lpdo

    @property
    def tower(self) -> FieldTower:
        return self.L.tower

    def checks(self) -> dict[str, bool]:
        """Each defining identity, evaluated exactly."""
        X1, X2, H, psi = self.X1, self.X2, self.H, self.psi
        psi_op = Lpdo.function(psi, self.tower)
        return {
            "splitting": (compose(X1, X2) - H - self.L).is_zero(),
            "commutation": (compose(H, X2) - compose(X2 + psi_op, H)).is_zero(),
            "transformed": (compose(X2, X1) + compose(psi_op, X1) - H - self.L1).is_zero(),
            "intertwining": (compose(self.M1, self.L) - compose(self.L1, self.M)).is_zero(),
            "symbol": symbols_equal(self.L, self.L1),
        }

    def is_valid(self) -> bool:
        return all(self.checks().values())

    def first_factor_identity(self) -> bool:
        """[X1, X2] − ψ·X1 = L − L1."""
        lhs = commutator(self.X1, self.X2) - compose(Lpdo.function(self.psi, self.tower), self.X1)
        return (lhs - (self.L - self.L1)).is_zero()

    def to_json(self) -> dict:
        failed = [k for k, ok in self.checks().items() if not ok]
        out = {k: str(getattr(self, k)) for k in ("X1", "X2", "H", "psi", "L", "L1", "M", "M1")}
        out["verified"] = not failed
        if failed:
            out["failed"] = failed
        return out


def h_from_factors(L: Lpdo, X1: Lpdo, X2: Lpdo) -> Lpdo:
    """H = X1∘X2 − L; any order is allowed."""
    return compose(X1, X2) - L


def detect_psi(H: Lpdo, X2: Lpdo) -> RationalExpr:
    """The function ψ with [H, X2] = ψ·H, or NoIlt.

    The candidate is read off the graded-lex largest term of H and then
    checked against the whole commutator.
    """
    if H.is_zero():
        raise ZeroH("H is zero; ψ is not determined")
    C = commutator(H, X2)
    idx, h = next(iter(H.items()))
    psi = C.coeff(idx) / h
    residual = C - compose(Lpdo.function(psi, H.tower), H)
    if not residual.is_zero():
        msg = "[H, X2] is not a function multiple of H"
        if X2.order is not None and X2.order > 1:
            msg += "; X2 has order > 1, where an operator-valued ω is not supported"
        raise NoIlt(msg, residual)
    return psi


def build_transform(X1: Lpdo, X2: Lpdo, H: Lpdo, psi: RationalExpr) -> IltCertificate:
    """Assemble and validate the certificate for (X1, X2, H, ψ)."""
    tower = X1.tower
    if X2.is_zero():
        raise InputError("X2 must be nonzero")
    psi = tower.coerce(psi)
    psi_op = Lpdo.function(psi, tower)
    residual = compose(H, X2) - compose(X2 + psi_op, H)
    if not residual.is_zero():
        raise ConditionViolated("H∘X2 != (X2 + ψ)∘H", residual)
    L = compose(X1, X2) - H
    L1 = compose(X2, X1) + compose(psi_op, X1) - H
    cert = IltCertificate(X1=X1, X2=X2, H=H, psi=psi, L=L, L1=L1, M=X2, M1=X2 + psi_op)
    failed = [k for k, ok in cert.checks().items() if not ok]
    if failed:
        raise ConditionViolated(f"certificate identities failed: {', '.join(failed)}")
    return cert


def generate(Htilde: Lpdo, theta1: RationalExpr, theta2: RationalExpr, X1: Lpdo, rect_var: str,
             maps: tuple[Mapping, Mapping] | None = None) -> IltCertificate:
    """Build an ILT from a seed operator whose coefficients ignore ``rect_var``.

    H = θ1∘H̃∘θ2 and X2 = D + θ2'/θ2 (derivatives along ``rect_var``), with
    ψ = −θ1'/θ1 − θ2'/θ2.  ``maps`` is an optional (fwd, inv) coordinate
    change applied to X2, H and ψ; X1 must then live in the target tower.
    """
    tower = Htilde.tower
    for idx, c in Htilde.items():
        if not c.derive(rect_var).is_zero():
            raise SeedDependsOnVar(f"coefficient {c} of the seed depends on {rect_var}")
    theta1 = tower.coerce(theta1)
    theta2 = tower.coerce(theta2)
    if theta1.is_zero() or theta2.is_zero():
        raise ZeroTheta("θ1 and θ2 must be nonzero")
    H = compose(compose(Lpdo.function(theta1, tower), Htilde), Lpdo.function(theta2, tower))
    alpha = theta2.derive(rect_var) / theta2
    psi = -theta1.derive(rect_var) / theta1 - alpha
    X2 = Lpdo.derivation(tower, rect_var) + alpha
    if maps is not None:
        fwd, inv = maps[0], maps[1]
        target = X1.tower
        X2 = change_vars(X2, fwd, inv, target)
        H = change_vars(H, fwd, inv, target)
        psi = psi.substitute(inv, target)
    return build_transform(X1, X2, H, psi)
