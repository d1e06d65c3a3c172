"""Exact linear algebra over the scalar field, private to the package."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Dict, Hashable, List, Sequence, Tuple

from .errors import InconsistentSystem, PoleAtPoint, UnderdeterminedSystem
from .scalars import ONE, ZERO, Scalar


def _weight(s: Scalar) -> int:
    return len(s.num) + len(s.den)


def solve_linear_system(
    equations: Sequence[Tuple[Dict[Hashable, Scalar], Scalar]],
    unknowns: Sequence[Hashable],
    check_substitution: bool = True,
    seed: int = 11,
):
    """Solve sum(coeff[u] * x_u) = rhs exactly; the solution must be unique.

    Raises InconsistentSystem / UnderdeterminedSystem.  A randomized rational
    substitution re-checks the solution against elimination slips.
    """
    rows = [(dict(c), r) for c, r in equations]
    solution: Dict[Hashable, Scalar] = {}
    remaining = list(unknowns)
    while remaining:
        pivot_row = None
        pivot_var = None
        best = None
        for idx, (coeffs, _) in enumerate(rows):
            for var in coeffs:
                if var in solution:
                    continue
                w = _weight(coeffs[var])
                if best is None or w < best:
                    best = w
                    pivot_row = idx
                    pivot_var = var
            if best == 2:
                break
        if pivot_row is None:
            raise UnderdeterminedSystem(
                f"no equation constrains remaining unknowns {remaining!r}"
            )
        coeffs, rhs = rows.pop(pivot_row)
        piv = coeffs.pop(pivot_var)
        expr_coeffs = {v: -(c / piv) for v, c in coeffs.items()}
        expr_rhs = rhs / piv
        new_rows = []
        for c2, r2 in rows:
            if pivot_var in c2:
                factor = c2.pop(pivot_var)
                for v, c in expr_coeffs.items():
                    cc = c2.get(v, ZERO) + factor * c
                    if cc.is_zero():
                        c2.pop(v, None)
                    else:
                        c2[v] = cc
                r2 = r2 - factor * expr_rhs
            new_rows.append((c2, r2))
        rows = new_rows
        for v in list(solution):
            prev_c, prev_r = solution[v]
            if pivot_var in prev_c:
                factor = prev_c.pop(pivot_var)
                for vv, c in expr_coeffs.items():
                    cc = prev_c.get(vv, ZERO) + factor * c
                    if cc.is_zero():
                        prev_c.pop(vv, None)
                    else:
                        prev_c[vv] = cc
                prev_r = prev_r + factor * expr_rhs
                solution[v] = (prev_c, prev_r)
        solution[pivot_var] = (expr_coeffs, expr_rhs)
        remaining.remove(pivot_var)
    values: Dict[Hashable, Scalar] = {}
    for v, (coeffs, rhs) in solution.items():
        if coeffs:
            raise UnderdeterminedSystem(f"unknown {v!r} depends on free unknowns")
        values[v] = rhs
    for coeffs, rhs in rows:
        resid = -rhs
        for v, c in coeffs.items():
            resid = resid + c * values[v]
        if not resid.is_zero():
            raise InconsistentSystem("left-over equation has nonzero residual")
    if check_substitution:
        _substitution_check(equations, values, seed)
    return values


def _substitution_check(equations, values, seed):
    names = set()
    for coeffs, rhs in equations:
        for s in list(coeffs.values()) + [rhs]:
            names.update(s.variables())
    for s in values.values():
        names.update(s.variables())
    rng = random.Random(seed)
    for _ in range(8):
        point = {n: Fraction(rng.randint(2, 40), rng.randint(1, 7)) for n in names}
        try:
            for coeffs, rhs in equations:
                lhs = Fraction(0)
                for v, c in coeffs.items():
                    lhs += c.evaluate(point) * values[v].evaluate(point)
                if lhs != rhs.evaluate(point):
                    raise InconsistentSystem(
                        "randomized substitution check failed; elimination bug"
                    )
            return
        except PoleAtPoint:
            continue
        except ZeroDivisionError:
            continue
    # could not find a pole-free random point; the exact elimination already
    # validated the left-over equations, so accept.
    return


def nullspace(matrix: List[List[Scalar]]):
    """Basis of the right nullspace of a Scalar matrix (list of column dicts)."""
    nrows = len(matrix)
    ncols = len(matrix[0]) if nrows else 0
    m = [row[:] for row in matrix]
    pivots: List[Tuple[int, int]] = []
    row = 0
    for col in range(ncols):
        sel = None
        best = None
        for r in range(row, nrows):
            if not m[r][col].is_zero():
                w = _weight(m[r][col])
                if best is None or w < best:
                    best = w
                    sel = r
        if sel is None:
            continue
        m[row], m[sel] = m[sel], m[row]
        piv = m[row][col]
        m[row] = [x / piv for x in m[row]]
        for r in range(nrows):
            if r != row and not m[r][col].is_zero():
                f = m[r][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[row])]
        pivots.append((row, col))
        row += 1
        if row == nrows:
            break
    pivot_cols = {c for _, c in pivots}
    free_cols = [c for c in range(ncols) if c not in pivot_cols]
    basis = []
    for fc in free_cols:
        vec = [ZERO] * ncols
        vec[fc] = ONE
        for r, c in pivots:
            vec[c] = -m[r][fc]
        basis.append(vec)
    return basis
