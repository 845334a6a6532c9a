"""Small dense linear algebra that works over Fraction or float entries.

numpy cannot carry Fraction through a solve, so the exact paths of the
library go through these routines. Float inputs use partial pivoting and a
relative zero threshold; Fraction inputs are handled exactly (threshold 0).
"""

from fractions import Fraction


def is_exact(values):
    return all(isinstance(v, (int, Fraction)) for v in values)


def _zero_threshold(rows, tol):
    if tol == 0:
        return 0
    scale = max((abs(v) for row in rows for v in row), default=0.0)
    return tol * max(scale, 1.0)


def rref(rows, tol=0):
    """Reduced row echelon form. Returns (matrix, pivot_columns)."""
    if tol == 0:
        mat = [[Fraction(v) for v in r] for r in rows]
    else:
        mat = [[float(v) for v in r] for r in rows]
    if not mat:
        return mat, []
    eps = _zero_threshold(mat, tol)
    n_rows, n_cols = len(mat), len(mat[0])
    pivots = []
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        if eps == 0:
            pivot = next((i for i in range(r, n_rows) if mat[i][c] != 0), None)
        else:
            best = max(range(r, n_rows), key=lambda i: abs(mat[i][c]))
            pivot = best if abs(mat[best][c]) > eps else None
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        lead = mat[r][c]
        mat[r] = [v / lead for v in mat[r]]
        for i in range(n_rows):
            if i != r and mat[i][c] != 0:
                factor = mat[i][c]
                mat[i] = [a - factor * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
    if eps:
        for row in mat:
            for k, v in enumerate(row):
                if abs(v) <= eps:
                    row[k] = 0.0
    return mat, pivots


def affine_solution(matrix, rhs, tol=0):
    """Solution set of ``matrix @ z = rhs`` as (particular, nullspace basis).

    Returns None when the system is inconsistent.
    """
    n_cols = len(matrix[0])
    aug = [list(row) + [b] for row, b in zip(matrix, rhs)]
    red, pivots = rref(aug, tol)
    if n_cols in pivots:
        return None
    zero = Fraction(0) if tol == 0 else 0.0
    particular = [zero] * n_cols
    for row, c in zip(red, pivots):
        particular[c] = row[n_cols]
    free = [c for c in range(n_cols) if c not in pivots]
    basis = []
    one = Fraction(1) if tol == 0 else 1.0
    for f in free:
        vec = [zero] * n_cols
        vec[f] = one
        for row, c in zip(red, pivots):
            vec[c] = -row[f]
        basis.append(vec)
    return particular, basis


def det(matrix):
    """Determinant by elimination; exact for Fraction entries."""
    exact = is_exact(v for row in matrix for v in row)
    mat = [[Fraction(v) if exact else float(v) for v in r] for r in matrix]
    n = len(mat)
    sign = 1
    result = Fraction(1) if exact else 1.0
    for c in range(n):
        if exact:
            pivot = next((i for i in range(c, n) if mat[i][c] != 0), None)
        else:
            pivot = max(range(c, n), key=lambda i: abs(mat[i][c]))
            if mat[pivot][c] == 0:
                pivot = None
        if pivot is None:
            return Fraction(0) if exact else 0.0
        if pivot != c:
            mat[c], mat[pivot] = mat[pivot], mat[c]
            sign = -sign
        lead = mat[c][c]
        result *= lead
        for i in range(c + 1, n):
            if mat[i][c] != 0:
                factor = mat[i][c] / lead
                mat[i] = [a - factor * b for a, b in zip(mat[i], mat[c])]
    return sign * result


def solve(matrix, rhs, tol=0):
    """Unique solution of a square system, or None if singular."""
    sol = affine_solution(matrix, rhs, tol)
    if sol is None or sol[1]:
        return None
    return sol[0]
