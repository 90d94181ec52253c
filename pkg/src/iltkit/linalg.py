"""Gaussian elimination over the coefficient field."""

from __future__ import annotations

from dataclasses import dataclass

from .field import FieldTower, RationalExpr


def _weight(e: RationalExpr):
    return (e.num.total_degree() + e.den.total_degree(), len(e.num) + len(e.den))


def rref(rows: list[list[RationalExpr]], ncols: int | None = None):
    """Reduced row echelon form, returned with the pivot column list.

    Only the first ``ncols`` columns are used for pivots (pass the number of
    unknowns for an augmented matrix).  Among candidate pivots in a column
    the lightest entry wins; ties go to the earliest row.
    """
    m = [list(r) for r in rows]
    if not m:
        return m, []
    ncols = len(m[0]) if ncols is None else ncols
    pivots = []
    r = 0
    for col in range(ncols):
        if r == len(m):
            break
        best = None
        for i in range(r, len(m)):
            e = m[i][col]
            if not e.is_zero():
                w = _weight(e)
                if best is None or w < best[0]:
                    best = (w, i)
        if best is None:
            continue
        i = best[1]
        m[r], m[i] = m[i], m[r]
        inv = m[r][col].inverse()
        m[r] = [e * inv if not e.is_zero() else e for e in m[r]]
        for k in range(len(m)):
            if k != r:
                f = m[k][col]
                if not f.is_zero():
                    row_r = m[r]
                    m[k] = [a - f * b if not b.is_zero() else a for a, b in zip(m[k], row_r)]
        pivots.append(col)
        r += 1
    return m, pivots


@dataclass(frozen=True)
class LinearSolution:
    particular: list[RationalExpr]
    nullspace: list[list[RationalExpr]]

    @property
    def dimension(self) -> int:
        return len(self.nullspace)


def solve(tower: FieldTower, matrix: list[list[RationalExpr]], rhs: list[RationalExpr]) -> LinearSolution | None:
    """Solve ``matrix @ u = rhs``; None when inconsistent.

    Free unknowns are set to zero in the particular solution; the nullspace
    basis has one vector per free unknown, in reduced-echelon form.
    """
    n = len(matrix[0]) if matrix else 0
    aug = [list(row) + [b] for row, b in zip(matrix, rhs)]
    red, pivots = rref(aug, n)
    for row in red[len(pivots):]:
        if not row[n].is_zero():
            return None
    particular = [tower.zero] * n
    for r, col in enumerate(pivots):
        particular[col] = red[r][n]
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        vec = [tower.zero] * n
        vec[f] = tower.one
        for r, col in enumerate(pivots):
            vec[col] = -red[r][f]
        basis.append(vec)
    return LinearSolution(particular, basis)


def determinant(tower: FieldTower, matrix: list[list[RationalExpr]]) -> RationalExpr:
    m = [list(r) for r in matrix]
    n = len(m)
    det = tower.one
    for col in range(n):
        piv = next((i for i in range(col, n) if not m[i][col].is_zero()), None)
        if piv is None:
            return tower.zero
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        p = m[col][col]
        det = det * p
        inv = p.inverse()
        for i in range(col + 1, n):
            f = m[i][col]
            if not f.is_zero():
                f = f * inv
                m[i] = [a - f * b for a, b in zip(m[i], m[col])]
    return det
