"""Exact phase-one simplex for feasibility of ``A x = b, x >= 0``."""

from __future__ import annotations

from collections.abc import Sequence
from fractions import Fraction


def find_feasible_point(
    A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]
) -> list[Fraction] | None:
    """Return a nonnegative solution of ``A x = b`` or ``None`` if none exists.

    Every row gets an artificial variable and the sum of artificials is
    minimized with Bland's smallest-index rule, so pivoting cannot cycle.
    Redundant rows are harmless: their artificials stay basic at level zero.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for i in range(m):
        row = [Fraction(v) for v in A[i]]
        bi = Fraction(b[i])
        if bi < 0:
            row = [-v for v in row]
            bi = -bi
        row += [Fraction(int(k == i)) for k in range(m)]
        rows.append(row)
        rhs.append(bi)
    basis = [n + i for i in range(m)]
    width = n + m

    # Reduced costs of the phase-one objective (sum of artificials).
    cost = [Fraction(0)] * width
    for j in range(n):
        cost[j] = -sum((rows[i][j] for i in range(m)), Fraction(0))
    obj = -sum(rhs, Fraction(0))

    while True:
        enter = next((j for j in range(width) if cost[j] < 0), None)
        if enter is None:
            break
        leave = None
        best = None
        for i in range(m):
            a = rows[i][enter]
            if a > 0:
                ratio = rhs[i] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            # Unbounded direction; cannot happen for a bounded-below objective.
            raise AssertionError("phase-one objective unbounded")
        piv = rows[leave][enter]
        prow = [v / piv for v in rows[leave]]
        prhs = rhs[leave] / piv
        rows[leave], rhs[leave] = prow, prhs
        for i in range(m):
            if i != leave and rows[i][enter]:
                f = rows[i][enter]
                rows[i] = [v - f * pv for v, pv in zip(rows[i], prow)]
                rhs[i] -= f * prhs
        f = cost[enter]
        cost = [c - f * pv for c, pv in zip(cost, prow)]
        obj -= f * prhs
        basis[leave] = enter

    if obj != 0:
        return None
    x = [Fraction(0)] * n
    for i, j in enumerate(basis):
        if j < n:
            x[j] = rhs[i]
    return x
