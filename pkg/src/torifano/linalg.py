"""Dense linear algebra on small matrices, generic over the scalar type.

Everything operates on plain Python sequences so a single code path serves
both ``fractions.Fraction`` (exact, ``tol == 0``) and ``float`` (tolerance
based) inputs.  Matrices are sequences of row sequences.  Sizes stay below
eight in this package, so asymptotics are irrelevant; clarity and exactness
are not.
"""

from __future__ import annotations

from fractions import Fraction


def dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def _lift(x):
    # Plain ints would hit true division below; keep them exact.
    return Fraction(x) if isinstance(x, int) else x


def _lift_rows(matrix):
    return [[_lift(x) for x in row] for row in matrix]


def _pivot_row(rows, col, start, tol):
    """Index of the row with the largest pivot magnitude, or None."""
    best, best_mag = None, tol
    for r in range(start, len(rows)):
        mag = abs(rows[r][col])
        if mag > best_mag:
            best, best_mag = r, mag
    return best


def solve(matrix, rhs, tol=0):
    """Solve a square system exactly (Fraction) or with partial pivoting.

    Returns the solution as a tuple, or None when the matrix is singular
    (pivot magnitude <= tol).
    """
    n = len(matrix)
    rows = [[_lift(x) for x in row] + [_lift(b)] for row, b in zip(matrix, rhs)]
    for col in range(n):
        piv = _pivot_row(rows, col, col, tol)
        if piv is None:
            return None
        rows[col], rows[piv] = rows[piv], rows[col]
        pivot = rows[col][col]
        for r in range(col + 1, n):
            factor = rows[r][col] / pivot
            if factor:
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[col])]
    sol = [None] * n
    for col in range(n - 1, -1, -1):
        acc = rows[col][n] - sum(rows[col][j] * sol[j] for j in range(col + 1, n))
        sol[col] = acc / rows[col][col]
    return tuple(sol)

def det(matrix):
    """Determinant by fraction-preserving Gaussian elimination."""
    n = len(matrix)
    if n == 0:
        return Fraction(1)
    rows = _lift_rows(matrix)
    sign = 1
    result = rows[0][0] - rows[0][0]  # zero of the scalar type in play
    one = result + 1
    acc = one
    for col in range(n):
        piv = _pivot_row(rows, col, col, 0)
        if piv is None:
            return result
        if piv != col:
            rows[col], rows[piv] = rows[piv], rows[col]
            sign = -sign
        pivot = rows[col][col]
        acc = acc * pivot
        for r in range(col + 1, n):
            factor = rows[r][col] / pivot
            if factor:
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[col])]
    return sign * acc


def rank(matrix, tol=0):
    rows = _lift_rows(matrix)
    if not rows:
        return 0
    ncols = len(rows[0])
    r = 0
    for col in range(ncols):
        piv = _pivot_row(rows, col, r, tol)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pivot = rows[r][col]
        for k in range(r + 1, len(rows)):
            factor = rows[k][col] / pivot
            if factor:
                rows[k] = [a - factor * b for a, b in zip(rows[k], rows[r])]
        r += 1
        if r == len(rows):
            break
    return r


def kernel_vector(matrix, tol=0):
    """Some nonzero vector in the kernel, or None when the kernel is trivial.

    Row-reduces to echelon form, picks the first free column, and
    back-substitutes.  The scalar type of the input is preserved.
    """
    rows = _lift_rows(matrix)
    if not rows:
        return None
    ncols = len(rows[0])
    zero = rows[0][0] - rows[0][0]
    one = zero + 1
    pivots = []  # (row, col)
    r = 0
    for col in range(ncols):
        piv = _pivot_row(rows, col, r, tol)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pivot = rows[r][col]
        for k in range(r + 1, len(rows)):
            factor = rows[k][col] / pivot
            if factor:
                rows[k] = [a - factor * b for a, b in zip(rows[k], rows[r])]
        pivots.append((r, col))
        r += 1
        if r == len(rows):
            break
    pivot_cols = {col for _, col in pivots}
    free = [c for c in range(ncols) if c not in pivot_cols]
    if not free:
        return None
    f = free[0]
    vec = [zero] * ncols
    vec[f] = one
    for row_idx, col in reversed(pivots):
        acc = sum(rows[row_idx][j] * vec[j] for j in range(col + 1, ncols))
        vec[col] = -acc / rows[row_idx][col]
    return tuple(vec)


def affine_rank(points, tol=0):
    """Dimension of the affine hull of a point collection."""
    pts = list(points)
    if len(pts) <= 1:
        return 0 if pts else -1
    base = pts[0]
    diffs = [[a - b for a, b in zip(p, base)] for p in pts[1:]]
    return rank(diffs, tol)
