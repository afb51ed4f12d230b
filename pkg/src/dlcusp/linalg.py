"""Exact linear algebra helpers: integer matrices over Q, and matrices of
base-field codes over F_q.

Matrices are lists (or tuples) of rows.  Everything is Gaussian elimination
at sizes where nothing else is worth writing; there is deliberately no
floating point anywhere in this module.
"""

from __future__ import annotations

from fractions import Fraction

# ---------------------------------------------------------------------------
# integer / rational matrices


def int_identity(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def int_mat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    return [
        [sum(a[i][t] * b[t][j] for t in range(k)) for j in range(m)]
        for i in range(n)
    ]


def int_mat_vec(a, v):
    return tuple(sum(a[i][j] * v[j] for j in range(len(v))) for i in range(len(a)))


def int_mat_sub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def int_transpose(a):
    return [list(col) for col in zip(*a)]


def int_det(a) -> int:
    """Exact determinant by fraction-free expansion; n stays tiny."""
    n = len(a)
    if n == 1:
        return a[0][0]
    if n == 2:
        return a[0][0] * a[1][1] - a[0][1] * a[1][0]
    det = 0
    for j in range(n):
        if a[0][j]:
            minor = [row[:j] + row[j + 1 :] for row in a[1:]]
            det += (-1) ** j * a[0][j] * int_det(minor)
    return det


def int_mat_inverse(a):
    """Exact inverse of an integer matrix with det +-1, as integer rows."""
    n = len(a)
    d = int_det(a)
    if d not in (1, -1):
        raise ValueError(f"matrix is not unimodular (det {d})")
    cof = [
        [
            (-1) ** (i + j)
            * int_det([row[:j] + row[j + 1 :] for k, row in enumerate(a) if k != i])
            for j in range(n)
        ]
        for i in range(n)
    ]
    if n == 1:
        cof = [[1]]
    adj = int_transpose(cof)
    return [[x * d for x in row] for row in adj]


def rational_rank(rows) -> int:
    """Rank over Q of an integer (or Fraction) matrix."""
    m = [[Fraction(x) for x in row] for row in rows]
    rank = 0
    ncols = len(m[0]) if m else 0
    row = 0
    for col in range(ncols):
        pivot = next((r for r in range(row, len(m)) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[row], m[pivot] = m[pivot], m[row]
        pv = m[row][col]
        m[row] = [x / pv for x in m[row]]
        for r in range(len(m)):
            if r != row and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [x - factor * y for x, y in zip(m[r], m[row])]
        row += 1
        rank += 1
        if row == len(m):
            break
    return rank


def int_matrix_order(a, cap: int = 64) -> int:
    """Multiplicative order of an integer matrix, or raise past the cap."""
    n = len(a)
    ident = int_identity(n)
    acc = [row[:] for row in a]
    for k in range(1, cap + 1):
        if acc == ident:
            return k
        acc = int_mat_mul(acc, a)
    raise ValueError(f"matrix order exceeds {cap}")


# ---------------------------------------------------------------------------
# matrices of base-field codes over F_q (arithmetic through a FieldTower)


def fq_rref(rows, tower):
    """Reduced row echelon form; returns (rref rows, pivot column list)."""
    m = [list(r) for r in rows]
    if not m:
        return m, []
    ncols = len(m[0])
    pivots = []
    row = 0
    for col in range(ncols):
        pivot = next((r for r in range(row, len(m)) if m[r][col]), None)
        if pivot is None:
            continue
        m[row], m[pivot] = m[pivot], m[row]
        inv = tower.base_inv(m[row][col])
        m[row] = [tower.base_mul(inv, x) for x in m[row]]
        for r in range(len(m)):
            if r != row and m[r][col]:
                c = m[r][col]
                m[r] = [
                    tower.base_sub(x, tower.base_mul(c, y))
                    for x, y in zip(m[r], m[row])
                ]
        pivots.append(col)
        row += 1
        if row == len(m):
            break
    return m, pivots


def fq_nullspace(rows, tower):
    """Basis of the right null space, as vectors of codes."""
    m, pivots = fq_rref(rows, tower)
    ncols = len(rows[0]) if rows else 0
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [0] * ncols
        v[fc] = 1
        for r, pc in enumerate(pivots):
            v[pc] = tower.base_neg(m[r][fc])
        basis.append(tuple(v))
    return basis


def fq_solve(a_rows, b, tower):
    """One solution x of A x = b, or None when inconsistent."""
    n = len(a_rows)
    aug = [list(row) + [bv] for row, bv in zip(a_rows, b)]
    m, pivots = fq_rref(aug, tower)
    ncols = len(a_rows[0])
    for r in range(len(m)):
        if any(m[r][:ncols]):
            continue
        if m[r][ncols]:
            return None
    x = [0] * ncols
    for r, pc in enumerate(pivots):
        if pc == ncols:
            return None
        x[pc] = m[r][ncols]
    return tuple(x)


def fq_det(rows, tower):
    """Determinant of a square code matrix."""
    m = [list(r) for r in rows]
    n = len(m)
    det = 1
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col]), None)
        if pivot is None:
            return 0
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = tower.base_neg(det)
        det = tower.base_mul(det, m[col][col])
        inv = tower.base_inv(m[col][col])
        for r in range(col + 1, n):
            if m[r][col]:
                c = tower.base_mul(m[r][col], inv)
                m[r] = [
                    tower.base_sub(x, tower.base_mul(c, y))
                    for x, y in zip(m[r], m[col])
                ]
    return det


def fq_rank(rows, tower) -> int:
    _, pivots = fq_rref(rows, tower)
    return len(pivots)
