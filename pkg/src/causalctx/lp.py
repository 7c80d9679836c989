"""Exact rational linear programming.

Problems have the form::

    maximise  c . x
    subject   A_eq x  = b_eq
              A_le x <= b_le
              x >= 0

and are solved by a dense two-phase simplex over ``Fraction`` with Bland's
rule.  Every result carries a certificate that :func:`verify_certificate`
re-checks in exact arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

Matrix = list[list[Fraction]]


def _frac_row(row) -> list[Fraction]:
    return [Fraction(v) for v in row]


@dataclass
class RationalLP:
    objective: list[Fraction]
    eq_rows: Matrix = field(default_factory=list)
    eq_rhs: list[Fraction] = field(default_factory=list)
    le_rows: Matrix = field(default_factory=list)
    le_rhs: list[Fraction] = field(default_factory=list)

    def __post_init__(self):
        self.objective = _frac_row(self.objective)
        self.eq_rows = [_frac_row(r) for r in self.eq_rows]
        self.le_rows = [_frac_row(r) for r in self.le_rows]
        self.eq_rhs = _frac_row(self.eq_rhs)
        self.le_rhs = _frac_row(self.le_rhs)
        n = len(self.objective)
        if len(self.eq_rows) != len(self.eq_rhs) or len(self.le_rows) != len(self.le_rhs):
            raise ValueError("row count and right-hand side length differ")
        for r in self.eq_rows + self.le_rows:
            if len(r) != n:
                raise ValueError(f"row of length {len(r)} in a problem with {n} variables")

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    @classmethod
    def feasibility(cls, eq_rows, eq_rhs, le_rows=(), le_rhs=()) -> "RationalLP":
        n = len(eq_rows[0]) if eq_rows else len(le_rows[0])
        return cls([0] * n, list(eq_rows), list(eq_rhs), list(le_rows), list(le_rhs))

    def scaled(self, eq_scale: Sequence, le_scale: Sequence) -> "RationalLP":
        """Copy with each row (and its rhs) multiplied by the given positive factor."""
        return RationalLP(
            self.objective,
            [[v * k for v in r] for r, k in zip(self.eq_rows, eq_scale)],
            [b * k for b, k in zip(self.eq_rhs, eq_scale)],
            [[v * k for v in r] for r, k in zip(self.le_rows, le_scale)],
            [b * k for b, k in zip(self.le_rhs, le_scale)],
        )


@dataclass
class LPResult:
    """``dual_certificate`` lists eq-row multipliers then le-row multipliers.

    For ``optimal`` it is an optimal dual solution; for ``infeasible`` a Farkas
    vector ``y`` with ``y.A >= 0`` and ``y.b < 0``.  ``ray`` is set only for
    ``unbounded``.
    """

    status: str
    primal: list[Fraction] | None
    dual_certificate: list[Fraction] | None
    objective_value: Fraction | None
    ray: list[Fraction] | None = None

    @property
    def feasible(self) -> bool:
        return self.status != "infeasible"


def _dot(u, v) -> Fraction:
    return sum((a * b for a, b in zip(u, v) if a and b), Fraction(0))


class _Tableau:
    def __init__(self, rows: Matrix, rhs: list[Fraction], basis: list[int]):
        self.T = rows
        self.rhs = rhs
        self.basis = basis

    def pivot(self, r: int, c: int) -> None:
        T, rhs = self.T, self.rhs
        prow = T[r]
        pv = prow[c]
        if pv != 1:
            inv = 1 / pv
            prow[:] = [v * inv if v else v for v in prow]
            rhs[r] *= inv
        nz = [j for j, v in enumerate(prow) if v]
        for i, row in enumerate(T):
            if i == r:
                continue
            f = row[c]
            if f:
                for j in nz:
                    row[j] -= f * prow[j]
                rhs[i] -= f * rhs[r]
        self.basis[r] = c

    def reduced(self, cost: list[Fraction], allowed: int) -> list[Fraction]:
        """z_j - c_j for the first ``allowed`` columns."""
        cb = [cost[b] for b in self.basis]
        out = []
        for j in range(allowed):
            z = Fraction(0)
            for i, row in enumerate(self.T):
                if cb[i] and row[j]:
                    z += cb[i] * row[j]
            out.append(z - cost[j])
        return out

    def run(self, cost: list[Fraction], allowed: int):
        """Maximise ``cost`` over columns ``< allowed`` with Bland's rule.

        Returns None at optimality or the entering column of an unbounded ray.
        """
        while True:
            d = self.reduced(cost, allowed)
            enter = next((j for j in range(allowed) if d[j] < 0), None)
            if enter is None:
                return None
            best, leave = None, None
            for i, row in enumerate(self.T):
                a = row[enter]
                if a > 0:
                    ratio = self.rhs[i] / a
                    if (best is None or ratio < best
                            or (ratio == best and self.basis[i] < self.basis[leave])):
                        best, leave = ratio, i
            if leave is None:
                return enter
            self.pivot(leave, enter)


def solve(lp: RationalLP) -> LPResult:
    n = lp.num_vars
    m_eq, m_le = len(lp.eq_rows), len(lp.le_rows)
    m = m_eq + m_le
    n_std = n + m_le  # structural + slack columns
    # each row gets one identity column: its slack when usable, else an artificial
    rows: Matrix = []
    rhs: list[Fraction] = []
    flip: list[int] = []
    art_rows: list[int] = []
    for i in range(m):
        if i < m_eq:
            a, b = list(lp.eq_rows[i]), lp.eq_rhs[i]
            slack = [Fraction(0)] * m_le
        else:
            k = i - m_eq
            a, b = list(lp.le_rows[k]), lp.le_rhs[k]
            slack = [Fraction(0)] * m_le
            slack[k] = Fraction(1)
        sign = -1 if b < 0 else 1
        if sign < 0:
            a = [-v for v in a]
            slack = [-v for v in slack]
            b = -b
        flip.append(sign)
        rows.append(a + slack)
        rhs.append(b)
        if not (i >= m_eq and sign > 0):
            art_rows.append(i)
    n_art = len(art_rows)
    identity_col: list[int] = []
    art_of_row = {r: n_std + k for k, r in enumerate(art_rows)}
    for i in range(m):
        ext = [Fraction(0)] * n_art
        if i in art_of_row:
            ext[art_of_row[i] - n_std] = Fraction(1)
            identity_col.append(art_of_row[i])
        else:
            identity_col.append(n + (i - m_eq))
        rows[i] = rows[i] + ext
    total = n_std + n_art
    tab = _Tableau(rows, rhs, list(identity_col))

    def duals(cost):
        cb = [cost[b] for b in tab.basis]
        y = []
        for r in range(m):
            col = identity_col[r]
            y.append(sum((cb[i] * tab.T[i][col] for i in range(m) if cb[i] and tab.T[i][col]),
                         Fraction(0)))
        return [f * v for f, v in zip(flip, y)]

    if n_art:
        cost1 = [Fraction(0)] * n_std + [Fraction(-1)] * n_art
        tab.run(cost1, total)
        value = sum((-tab.rhs[i] for i, b in enumerate(tab.basis) if b >= n_std), Fraction(0))
        if value < 0:
            return LPResult("infeasible", None, duals(cost1), None)
        # drive zero-level artificials out of the basis where possible
        for i, b in enumerate(tab.basis):
            if b >= n_std:
                c = next((j for j in range(n_std) if tab.T[i][j]), None)
                if c is not None:
                    tab.pivot(i, c)

    cost2 = list(lp.objective) + [Fraction(0)] * (m_le + n_art)
    enter = tab.run(cost2, n_std)
    x = [Fraction(0)] * n_std
    for i, b in enumerate(tab.basis):
        if b < n_std:
            x[b] = tab.rhs[i]
    primal = x[:n]
    if enter is not None:
        ray = [Fraction(0)] * n_std
        ray[enter] = Fraction(1)
        for i, b in enumerate(tab.basis):
            if b < n_std:
                ray[b] = -tab.T[i][enter]
        return LPResult("unbounded", primal, None, None, ray[:n])
    return LPResult("optimal", primal, duals(cost2), _dot(lp.objective, primal))


def verify_certificate(lp: RationalLP, result: LPResult) -> bool:
    """Re-check the certificate attached to ``result`` exactly."""
    n, m_eq = lp.num_vars, len(lp.eq_rows)
    rows = lp.eq_rows + lp.le_rows
    b = lp.eq_rhs + lp.le_rhs

    def primal_ok(x):
        return (x is not None and len(x) == n and all(v >= 0 for v in x)
                and all(_dot(r, x) == rb for r, rb in zip(lp.eq_rows, lp.eq_rhs))
                and all(_dot(r, x) <= rb for r, rb in zip(lp.le_rows, lp.le_rhs)))

    def col(y, j):
        return sum((y[i] * r[j] for i, r in enumerate(rows) if y[i] and r[j]), Fraction(0))

    if result.status == "optimal":
        y = result.dual_certificate
        if not primal_ok(result.primal) or y is None or len(y) != len(rows):
            return False
        if any(v < 0 for v in y[m_eq:]):
            return False
        if any(col(y, j) < lp.objective[j] for j in range(n)):
            return False
        return (_dot(lp.objective, result.primal) == result.objective_value
                == _dot(y, b))
    if result.status == "infeasible":
        y = result.dual_certificate
        if y is None or len(y) != len(rows) or any(v < 0 for v in y[m_eq:]):
            return False
        return all(col(y, j) >= 0 for j in range(n)) and _dot(y, b) < 0
    if result.status == "unbounded":
        r = result.ray
        if not primal_ok(result.primal) or r is None or any(v < 0 for v in r):
            return False
        return (all(_dot(row, r) == 0 for row in lp.eq_rows)
                and all(_dot(row, r) <= 0 for row in lp.le_rows)
                and _dot(lp.objective, r) > 0)
    return False
