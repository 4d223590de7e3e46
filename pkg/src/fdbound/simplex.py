"""Dense two-phase primal simplex over exact rationals with Bland's rule.

All variables are nonnegative. Arithmetic runs on ``gmpy2.mpq``; results
are returned as :class:`fractions.Fraction`.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from gmpy2 import mpq

__all__ = ["SimplexResult", "simplex_max"]

OPTIMAL = "optimal"
UNBOUNDED = "unbounded"
INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class SimplexResult:
    status: str
    value: Fraction | None = None
    x: tuple[Fraction, ...] | None = None
    pivots: int = 0


def _frac(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


class _Tableau:
    """Rows ``T[i]`` hold constraint coefficients; the last entry is the rhs.

    ``basis[i]`` is the basic column of row ``i``. The objective row holds
    reduced costs ``c_j - z_j`` (maximisation) with ``-z`` in the last slot.
    """

    def __init__(self, rows: list[list], basis: list[int], ncols: int):
        self.T = rows
        self.basis = basis
        self.ncols = ncols
        self.pivots = 0

    def set_objective(self, cost: Sequence) -> list:
        obj = [mpq(c) for c in cost] + [mpq(0)]
        for i, b in enumerate(self.basis):
            cb = obj[b]
            if cb:
                row = self.T[i]
                for j, a in enumerate(row):
                    if a:
                        obj[j] -= cb * a
        return obj

    def pivot(self, r: int, c: int, obj: list) -> None:
        T = self.T
        prow = T[r]
        p = prow[c]
        if p != 1:
            inv = 1 / p
            prow = [a * inv if a else a for a in prow]
            T[r] = prow
        nz = [j for j, a in enumerate(prow) if a]
        for i, row in enumerate(T):
            if i == r:
                continue
            f = row[c]
            if f:
                for j in nz:
                    row[j] -= f * prow[j]
        f = obj[c]
        if f:
            for j in nz:
                obj[j] -= f * prow[j]
        self.basis[r] = c
        self.pivots += 1

    def run(self, obj: list, allowed: int) -> str:
        """Bland's rule on columns ``< allowed``."""
        T = self.T
        while True:
            enter = -1
            for j in range(allowed):
                if obj[j] > 0:
                    enter = j
                    break
            if enter < 0:
                return OPTIMAL
            best = None
            leave = -1
            for i, row in enumerate(T):
                a = row[enter]
                if a > 0:
                    ratio = row[-1] / a
                    if best is None or ratio < best or (ratio == best and self.basis[i] < self.basis[leave]):
                        best, leave = ratio, i
            if leave < 0:
                return UNBOUNDED
            self.pivot(leave, enter, obj)


def simplex_max(
    cost: Sequence,
    rows: Sequence[tuple[dict[int, object], str, object]],
    nvars: int,
) -> SimplexResult:
    """Maximise ``cost·x`` subject to ``rows`` and ``x >= 0``.

    Each row is ``(coeffs, rel, rhs)`` with ``rel`` in ``{"<=", "=", ">="}``
    and ``coeffs`` a sparse map from variable index to rational.
    """
    norm = []
    for coeffs, rel, rhs in rows:
        coeffs = {j: mpq(Fraction(a)) for j, a in coeffs.items() if a}
        rhs = mpq(Fraction(rhs))
        if rel not in ("<=", "=", ">="):
            raise ValueError(f"bad relation {rel!r}")
        if rhs < 0:
            coeffs = {j: -a for j, a in coeffs.items()}
            rhs = -rhs
            rel = {"<=": ">=", ">=": "<=", "=": "="}[rel]
        if not coeffs:
            if (rel == "=" and rhs != 0) or (rel == ">=" and rhs > 0):
                return SimplexResult(INFEASIBLE)
            continue
        norm.append((coeffs, rel, rhs))

    m = len(norm)
    n_slack = sum(1 for _, rel, _ in norm if rel != "=")
    n_art = sum(1 for _, rel, _ in norm if rel != "<=")
    ncols = nvars + n_slack + n_art
    art0 = nvars + n_slack
    T: list[list] = []
    basis: list[int] = []
    s = nvars
    a = art0
    zero = mpq(0)
    for coeffs, rel, rhs in norm:
        row = [zero] * (ncols + 1)
        for j, v in coeffs.items():
            row[j] = v
        row[-1] = rhs
        if rel == "<=":
            row[s] = mpq(1)
            basis.append(s)
            s += 1
        else:
            if rel == ">=":
                row[s] = mpq(-1)
                s += 1
            row[a] = mpq(1)
            basis.append(a)
            a += 1
        T.append(row)
    tab = _Tableau(T, basis, ncols)

    if n_art:
        phase1 = [0] * art0 + [-1] * n_art
        obj = tab.set_objective(phase1)
        tab.run(obj, ncols)
        if obj[-1] != 0:  # -z = sum of artificials at optimum
            return SimplexResult(INFEASIBLE, pivots=tab.pivots)
        # drive zero-valued artificials out of the basis
        for i in range(len(tab.T)):
            if tab.basis[i] >= art0:
                row = tab.T[i]
                col = next((j for j in range(art0) if row[j] != 0), -1)
                if col >= 0:
                    tab.pivot(i, col, obj)
        keep = [i for i in range(len(tab.T)) if tab.basis[i] < art0]
        tab.T = [tab.T[i][:art0] + [tab.T[i][-1]] for i in keep]
        tab.basis = [tab.basis[i] for i in keep]
        tab.ncols = art0

    cost_full = [Fraction(c) for c in cost] + [0] * (tab.ncols - nvars)
    obj = tab.set_objective(cost_full)
    status = tab.run(obj, tab.ncols)
    if status == UNBOUNDED:
        return SimplexResult(UNBOUNDED, pivots=tab.pivots)
    x = [mpq(0)] * nvars
    for i, b in enumerate(tab.basis):
        if b < nvars:
            x[b] = tab.T[i][-1]
    value = sum((mpq(Fraction(c)) * xi for c, xi in zip(cost, x)), mpq(0))
    return SimplexResult(OPTIMAL, _frac(value), tuple(_frac(v) for v in x), tab.pivots)
