"""Exception hierarchy.

Two families matter to callers: :class:`InputError` (malformed input or a
violated precondition, CLI exit code 2) and :class:`VerificationError`
(the mathematics says no: an identity fails, a seed is not a solution,
no transformation exists; CLI exit code 1).
"""


class IltError(Exception):
    exit_code = 1


class InputError(IltError):
    exit_code = 2


class VerificationError(IltError):
    exit_code = 1


# -- coefficient field ------------------------------------------------------

class DivisionByZero(InputError, ZeroDivisionError):
    pass


class UnknownVariable(InputError):
    pass


class NameCollision(InputError):
    pass


class TowerMismatch(InputError):
    pass


class IntegrabilityViolation(InputError):
    def __init__(self, generator, pair, residual=None):
        self.generator = generator
        self.pair = pair
        self.residual = residual
        u, v = pair
        msg = f"generator {generator!r}: D_{u}(D_{v} {generator}) != D_{v}(D_{u} {generator})"
        if residual is not None:
            msg += f" (difference {residual})"
        super().__init__(msg)


# -- operator algebra -------------------------------------------------------

class ZeroOperator(InputError):
    pass


class NotFirstOrder(InputError):
    pass


class VarCoefficientZero(InputError):
    pass


class ZeroGauge(InputError):
    pass


class NotInverse(InputError):
    pass


class SingularJacobian(InputError):
    pass


class NotQuadratic(InputError):
    pass


class NotAPerfectSquare(VerificationError):
    pass


class NotUnivariate(InputError):
    pass


# -- ILT engine -------------------------------------------------------------

class ZeroH(InputError):
    pass


class NoIlt(VerificationError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConditionViolated(VerificationError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SeedDependsOnVar(InputError):
    pass


class ZeroTheta(InputError):
    pass


class InternalInconsistency(VerificationError):
    """A construction that theory guarantees came out wrong."""


# -- classical catalogue ----------------------------------------------------

class ZeroInvariant(VerificationError):
    pass


class DivisibleByM(VerificationError):
    pass


class SeedNotASolution(VerificationError):
    pass


class DegenerateSeeds(VerificationError):
    pass


class PsiNotProportional(InternalInconsistency):
    pass


class ZeroB(InputError):
    pass


class SeedNotEigen(VerificationError):
    pass


class CoefficientDependsOnX(InputError):
    pass


class SeedNotAnnihilated(VerificationError):
    pass


class DegeneratePetren(VerificationError):
    pass


class ProportionalInputs(InputError):
    pass


class NoDecomposition(VerificationError):
    pass


class AlphaNotASolution(VerificationError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


# -- intertwining solver ----------------------------------------------------

class NotFirstOrderM(InputError):
    pass


class ZeroAlphaCoefficient(InputError):
    pass


# -- text frontend ----------------------------------------------------------

class ExprSyntaxError(InputError):
    def __init__(self, message, text="", pos=0):
        self.text = text
        self.pos = pos
        before = text[:pos]
        self.line = before.count("\n") + 1
        self.column = pos - (before.rfind("\n") + 1) + 1
        super().__init__(f"{message} at line {self.line}, column {self.column}")


class UnknownSymbol(InputError):
    pass


class NegativeExponent(InputError):
    pass


class WorkspaceError(InputError):
    pass
