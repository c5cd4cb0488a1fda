"""Small dense linear algebra over p-adic fields.

Matrices are lists of rows.  p-adic elimination pivots on the entry of least
valuation in each column and treats entries of valuation >= a threshold as
zero, so rounding noise in the last digits never becomes a pivot.
"""

import logging
import math
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .errors import ConvergenceViolation, LogDivergence, ShapeMismatch
from .padic import (
    AtLeast,
    FieldDescriptor,
    PadicScalar,
    exp_term_count,
    factorial_valuation,
    ilog,
)


logger = logging.getLogger(__name__)

Matrix = List[List[PadicScalar]]
Vector = List[PadicScalar]


def identity(field: FieldDescriptor, n: int) -> Matrix:
    return [[field.one() if i == j else field.zero() for j in range(n)] for i in range(n)]


def zeros(field: FieldDescriptor, rows: int, cols: int) -> Matrix:
    return [[field.zero() for _ in range(cols)] for _ in range(rows)]


def from_rows(field: FieldDescriptor, rows: Sequence[Sequence]) -> Matrix:
    """Matrix with entries coerced into field (ints, Fractions or scalars)."""
    return [[field(x) for x in row] for row in rows]


def shape(a: Matrix) -> Tuple[int, int]:
    return len(a), (len(a[0]) if a else 0)


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if shape(a)[1] != shape(b)[0]:
        raise ShapeMismatch(f"cannot multiply {shape(a)} by {shape(b)}")
    cols = list(zip(*b))
    out = []
    for row in a:
        out_row = []
        for col in cols:
            acc = None
            for x, y in zip(row, col):
                if x.is_zero() or y.is_zero():
                    continue
                acc = x * y if acc is None else acc + x * y
            out_row.append(acc if acc is not None else row[0].parent.zero())
        out.append(out_row)
    return out


def matvec(a: Matrix, v: Vector) -> Vector:
    return [row[0] for row in matmul(a, [[x] for x in v])]


def matadd(a: Matrix, b: Matrix) -> Matrix:
    if shape(a) != shape(b):
        raise ShapeMismatch(f"cannot add {shape(a)} and {shape(b)}")
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def matsub(a: Matrix, b: Matrix) -> Matrix:
    if shape(a) != shape(b):
        raise ShapeMismatch(f"cannot subtract {shape(b)} from {shape(a)}")
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def scale(a: Matrix, c) -> Matrix:
    return [[x * c for x in row] for row in a]


def transpose(a: Matrix) -> Matrix:
    return [list(col) for col in zip(*a)]


def commutator(a: Matrix, b: Matrix) -> Matrix:
    return matsub(matmul(a, b), matmul(b, a))


def entrywise(a: Matrix, fn) -> Matrix:
    return [[fn(x) for x in row] for row in a]


def change_field(a: Matrix, field: FieldDescriptor) -> Matrix:
    """Re-parent every entry (same extension, other precision)."""
    return [[PadicScalar(field, x.coeffs, x.shift) for x in row] for row in a]


def min_valuation(a: Matrix) -> Fraction:
    """Least entry valuation; AtLeast(N) when every entry is zero."""
    values = [x.valuation() for row in a for x in row if not x.is_zero()]
    if not values:
        field = a[0][0].parent
        return AtLeast(field.precision)
    return min(values)


def distance(a: Matrix, b: Matrix) -> Fraction:
    """min val of a - b, the agreement between two matrices."""
    return min_valuation(matsub(a, b))


def default_threshold(field: FieldDescriptor) -> int:
    return max(1, field.precision // 2)


def row_reduce(a: Matrix, threshold: Optional[Fraction] = None) -> Tuple[Matrix, List[int]]:
    """Reduced row echelon form with least-valuation pivoting, and the pivot columns."""
    if not a:
        return [], []
    field = a[0][0].parent
    threshold = default_threshold(field) if threshold is None else threshold
    r_mat = [list(row) for row in a]
    rows, cols = shape(r_mat)

    def negligible(x: PadicScalar) -> bool:
        return x.is_zero() or x.valuation() >= threshold

    pivots: List[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        best = None
        for i in range(r, rows):
            x = r_mat[i][c]
            if negligible(x):
                continue
            if best is None or x.valuation() < r_mat[best][c].valuation():
                best = i
        if best is None:
            continue
        r_mat[r], r_mat[best] = r_mat[best], r_mat[r]
        inv = r_mat[r][c].inverse()
        r_mat[r] = [x * inv for x in r_mat[r]]
        for i in range(rows):
            if i != r and not r_mat[i][c].is_zero():
                factor = r_mat[i][c]
                r_mat[i] = [x - factor * y for x, y in zip(r_mat[i], r_mat[r])]
        pivots.append(c)
        r += 1
    return r_mat, pivots


def rank(a: Matrix, threshold: Optional[Fraction] = None) -> int:
    return len(row_reduce(a, threshold)[1])


def kernel(a: Matrix, threshold: Optional[Fraction] = None) -> List[Vector]:
    """Kernel basis, each vector scaled so its first non-negligible entry is 1."""
    if not a:
        return []
    field = a[0][0].parent
    threshold = default_threshold(field) if threshold is None else threshold
    reduced, pivots = row_reduce(a, threshold)
    cols = shape(a)[1]
    basis = []
    for free in (c for c in range(cols) if c not in pivots):
        v = [field.zero() for _ in range(cols)]
        v[free] = field.one()
        for row, c in enumerate(pivots):
            x = reduced[row][free]
            if not x.is_zero() and x.valuation() < threshold:
                v[c] = -x
        lead = next(x for x in v if not x.is_zero() and x.valuation() < threshold)
        inv = lead.inverse()
        basis.append([x * inv for x in v])
    return basis


def mat_log(m: Matrix) -> Matrix:
    """log(M) by the Mercator series in X = M - Id, at lifted precision."""
    n = len(m)
    field = m[0][0].parent
    x = matsub(m, identity(field, n))
    t = min_valuation(x)
    if isinstance(t, AtLeast):
        return zeros(field, n, n)
    if t <= 0:
        raise LogDivergence(f"M - Id has valuation {t}, the logarithm series does not converge")
    estimate = math.ceil((field.precision + 8) / t) + 1
    guard = ilog(estimate, field.p) + 2
    work = field.with_precision(field.precision + guard)
    xw = change_field(x, work)
    total = zeros(work, n, n)
    power = xw
    k = 1
    target = field.precision + 1
    while k * t < target + ilog(k, field.p):
        term = [[y.divide_by_int(k) for y in row] for row in power]
        total = matadd(total, term) if k % 2 else matsub(total, term)
        k += 1
        power = matmul(power, xw)
    logger.debug(f"mat_log: {k - 1} terms at precision {work.precision}")
    return change_field(total, field)


def mat_exp(a: Matrix) -> Matrix:
    """exp(A) by the truncated exponential series, for val(A) > 1/(p-1)."""
    n = len(a)
    field = a[0][0].parent
    t = min_valuation(a)
    if isinstance(t, AtLeast):
        return identity(field, n)
    bound = Fraction(1, field.p - 1)
    if t <= bound:
        raise ConvergenceViolation(f"exp needs val(A) > {bound}, got {t}")
    terms = exp_term_count(t - bound, field.precision)
    work = field.with_precision(field.precision + factorial_valuation(terms, field.p) + 2)
    aw = change_field(a, work)
    total = identity(work, n)
    term = identity(work, n)
    for k in range(1, terms + 1):
        term = [[y.divide_by_int(k) for y in row] for row in matmul(term, aw)]
        total = matadd(total, term)
    return change_field(total, field)


def to_text(a: Matrix) -> str:
    return "[" + "; ".join(", ".join(x.to_text() for x in row) for row in a) + "]"
