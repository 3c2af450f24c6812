"""Dense exact Gaussian elimination over Gaussian rationals.

Matrices are lists of row lists of GaussCoeff.  Dimensions here are tiny
(monomial-basis blocks), so plain fraction arithmetic with first-nonzero
pivoting is all that is needed; exactness makes pivot-size heuristics moot.
"""

from __future__ import annotations

from typing import List, Optional

from .coeffs import GC_ONE, GC_ZERO, GaussCoeff

Matrix = List[List[GaussCoeff]]
Vector = List[GaussCoeff]


def solve(matrix: Matrix, rhs: Vector) -> Optional[Vector]:
    """Solve the square system matrix * x = rhs; None when singular."""
    n = len(matrix)
    if n == 0:
        return []
    if any(len(row) != n for row in matrix) or len(rhs) != n:
        raise ValueError("solve expects a square matrix and matching rhs")
    a = [row[:] + [rhs[i]] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot_row = None
        for r in range(col, n):
            if a[r][col]:
                pivot_row = r
                break
        if pivot_row is None:
            return None
        if pivot_row != col:
            a[col], a[pivot_row] = a[pivot_row], a[col]
        inv = GC_ONE / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [vr - f * vc for vr, vc in zip(a[r], a[col])]
    return [a[i][n] for i in range(n)]


def invert(matrix: Matrix) -> Optional[Matrix]:
    """Exact inverse of a square matrix; None when singular."""
    n = len(matrix)
    a = [row[:] + [GC_ONE if i == j else GC_ZERO for j in range(n)]
         for i, row in enumerate(matrix)]
    for col in range(n):
        pivot_row = None
        for r in range(col, n):
            if a[r][col]:
                pivot_row = r
                break
        if pivot_row is None:
            return None
        if pivot_row != col:
            a[col], a[pivot_row] = a[pivot_row], a[col]
        inv = GC_ONE / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [vr - f * vc for vr, vc in zip(a[r], a[col])]
    return [row[n:] for row in a]


def matvec(matrix: Matrix, vec: Vector) -> Vector:
    out = []
    for row in matrix:
        acc = GC_ZERO
        for v, x in zip(row, vec):
            if v and x:
                acc = acc + v * x
        out.append(acc)
    return out


def solve_consistent(matrix: Matrix, rhs: Vector) -> Optional[Vector]:
    """One solution of a consistent (possibly singular) system; free vars = 0.

    Returns None when the system is inconsistent.
    """
    n_rows = len(matrix)
    n_cols = len(matrix[0]) if n_rows else 0
    a = [row[:] + [rhs[i]] for i, row in enumerate(matrix)]
    pivots = []
    r = 0
    for col in range(n_cols):
        pivot_row = None
        for rr in range(r, n_rows):
            if a[rr][col]:
                pivot_row = rr
                break
        if pivot_row is None:
            continue
        if pivot_row != r:
            a[r], a[pivot_row] = a[pivot_row], a[r]
        inv = GC_ONE / a[r][col]
        a[r] = [v * inv for v in a[r]]
        for rr in range(n_rows):
            if rr != r and a[rr][col]:
                f = a[rr][col]
                a[rr] = [va - f * vb for va, vb in zip(a[rr], a[r])]
        pivots.append((r, col))
        r += 1
        if r == n_rows:
            break
    for rr in range(r, n_rows):
        if a[rr][n_cols]:
            return None
    solution = [GC_ZERO] * n_cols
    for row, col in pivots:
        solution[col] = a[row][n_cols]
    return solution


def nullspace(matrix: Matrix, n_cols: int) -> List[Vector]:
    """Basis of the kernel of a (possibly rectangular) matrix.

    Free variables are assigned in increasing column order, one basis vector
    per free column, so the result is deterministic.
    """
    rows = [row[:] for row in matrix]
    n_rows = len(rows)
    pivots = []  # (row, col)
    r = 0
    for col in range(n_cols):
        pivot_row = None
        for rr in range(r, n_rows):
            if rows[rr][col]:
                pivot_row = rr
                break
        if pivot_row is None:
            continue
        if pivot_row != r:
            rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        inv = GC_ONE / rows[r][col]
        rows[r] = [v * inv for v in rows[r]]
        for rr in range(n_rows):
            if rr != r and rows[rr][col]:
                f = rows[rr][col]
                rows[rr] = [va - f * vb for va, vb in zip(rows[rr], rows[r])]
        pivots.append((r, col))
        r += 1
        if r == n_rows:
            break
    pivot_cols = {col for _, col in pivots}
    basis = []
    for free in range(n_cols):
        if free in pivot_cols:
            continue
        vec = [GC_ZERO] * n_cols
        vec[free] = GC_ONE
        for row, col in pivots:
            vec[col] = -rows[row][free]
        basis.append(vec)
    return basis
