"""sl2 and SL2(Z_p) representations.

Representations of the Lie algebra are triples (D1, D2, H) of exact rational
matrices (``sympy.Matrix``) with

    [D1, D2] = H,   [H, D1] = 2 D1,   [H, D2] = -2 D2.

On Sym^k with basis v_i = e1^(k-i) e2^i (i = 0..k) the operators are
D1 v_i = (k-i) v_(i+1), D2 v_i = i v_(i-1) and H v_i = (2i - k) v_i, so D1
raises weights by 2 and the lowest weight vector of a copy of Sym^k lies in
ker D2 on the weight -k space.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import sympy

from .errors import (
    ConvergenceViolation,
    EvenPrimeUnsupported,
    NonIntegralSpectrum,
    NonSemisimpleInput,
    NonUnitDelta,
    NotDetOne,
    RelationsViolated,
)
from .linalg import Matrix, distance, from_rows, matmul, transpose
from .padic import FieldDescriptor, PadicScalar, rational_reconstruction, vp


logger = logging.getLogger(__name__)

Number = Union[int, Fraction]


# -- group elements --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SL2Element:
    """A 2x2 matrix ((a, b), (c, d)) over a field descriptor with det 1 to precision."""

    matrix: Matrix

    @classmethod
    def from_entries(cls, field: FieldDescriptor, a, b, c, d) -> "SL2Element":
        return cls(from_rows(field, [[a, b], [c, d]]))

    @classmethod
    def identity(cls, field: FieldDescriptor) -> "SL2Element":
        return cls.from_entries(field, 1, 0, 0, 1)

    @classmethod
    def random(cls, field: FieldDescriptor, rng) -> "SL2Element":
        """a a unit, b and c integral, d = (1 + bc)/a."""
        a = field.random_unit(rng)
        b = field.random_element(rng)
        c = field.random_element(rng)
        return cls([[a, b], [c, (b * c + 1) / a]])

    @property
    def field(self) -> FieldDescriptor:
        return self.matrix[0][0].parent

    def entries(self) -> Tuple[PadicScalar, PadicScalar, PadicScalar, PadicScalar]:
        (a, b), (c, d) = self.matrix
        return a, b, c, d

    def det(self) -> PadicScalar:
        a, b, c, d = self.entries()
        return a * d - b * c

    def __mul__(self, other: "SL2Element") -> "SL2Element":
        return SL2Element(matmul(self.matrix, other.matrix))

    def to_dict(self) -> dict:
        return {"matrix": [[x.to_text() for x in row] for row in self.matrix]}


# -- Lie algebra representations --------------------------------------------


@dataclass(frozen=True, eq=False)
class Sl2Triple:
    """A representation of sl2 given by the matrices of D1, D2 and H."""

    d1: sympy.Matrix
    d2: sympy.Matrix
    h: sympy.Matrix

    @property
    def dimension(self) -> int:
        return self.h.rows

    def to_dict(self) -> dict:
        def rows(m: sympy.Matrix) -> List[List[str]]:
            return [[str(m[i, j]) for j in range(m.cols)] for i in range(m.rows)]

        return {"dim": self.dimension, "D1": rows(self.d1), "D2": rows(self.d2), "H": rows(self.h)}

    @classmethod
    def from_dict(cls, data: dict) -> "Sl2Triple":
        dim = int(data["dim"])

        def matrix(key: str) -> sympy.Matrix:
            m = sympy.Matrix([[sympy.Rational(str(x)) for x in row] for row in data[key]])
            if m.shape != (dim, dim):
                raise ValueError(f"{key} has shape {m.shape}, expected {dim}x{dim}")
            return m

        return cls(matrix("D1"), matrix("D2"), matrix("H"))


@dataclass(frozen=True, eq=False)
class SymkRep(Sl2Triple):
    """Sym^k of the standard representation, in the monomial basis."""

    k: int = 0

    def group_matrix(self, g: SL2Element) -> Matrix:
        """Matrix of g on Sym^k: column i expands (a e1 + c e2)^(k-i) (b e1 + d e2)^i."""
        a, b, c, d = g.entries()
        field = g.field
        k = self.k

        def poly_mul(u: List[PadicScalar], v: List[PadicScalar]) -> List[PadicScalar]:
            out = [field.zero() for _ in range(len(u) + len(v) - 1)]
            for i, x in enumerate(u):
                for j, y in enumerate(v):
                    out[i + j] = out[i + j] + x * y
            return out

        columns = []
        for i in range(k + 1):
            poly = [field.one()]
            for _ in range(k - i):
                poly = poly_mul(poly, [a, c])
            for _ in range(i):
                poly = poly_mul(poly, [b, d])
            columns.append(poly)
        return transpose(columns)


def symk_matrices(k: int) -> SymkRep:
    """D1, D2 and H on Sym^k (all zero for k = 0)."""
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    n = k + 1
    d1 = sympy.zeros(n, n)
    d2 = sympy.zeros(n, n)
    h = sympy.zeros(n, n)
    for i in range(n):
        if i + 1 < n:
            d1[i + 1, i] = k - i
        if i > 0:
            d2[i - 1, i] = i
        h[i, i] = 2 * i - k
    return SymkRep(d1, d2, h, k)


def direct_sum(*reps: Sl2Triple) -> Sl2Triple:
    return Sl2Triple(
        sympy.diag(*[r.d1 for r in reps]),
        sympy.diag(*[r.d2 for r in reps]),
        sympy.diag(*[r.h for r in reps]),
    )


def kronecker(a: sympy.Matrix, b: sympy.Matrix) -> sympy.Matrix:
    return sympy.Matrix(a.rows * b.rows, a.cols * b.cols,
                        lambda i, j: a[i // b.rows, j // b.cols] * b[i % b.rows, j % b.cols])


def tensor_product(r: Sl2Triple, s: Sl2Triple) -> Sl2Triple:
    """Lie algebra action X ⊗ 1 + 1 ⊗ X on the tensor product."""
    one_r = sympy.eye(r.dimension)
    one_s = sympy.eye(s.dimension)

    def act(x: sympy.Matrix, y: sympy.Matrix) -> sympy.Matrix:
        return kronecker(x, one_s) + kronecker(one_r, y)

    return Sl2Triple(act(r.d1, s.d1), act(r.d2, s.d2), act(r.h, s.h))


def sl2_relations_defect(rep: Sl2Triple) -> Dict[str, sympy.Matrix]:
    """Residuals of the three bracket relations; all zero for a representation."""
    d1, d2, h = rep.d1, rep.d2, rep.h
    return {
        "[D1,D2]-H": d1 * d2 - d2 * d1 - h,
        "[H,D1]-2D1": h * d1 - d1 * h - 2 * d1,
        "[H,D2]+2D2": h * d2 - d2 * h + 2 * d2,
    }


def relations_hold(rep: Sl2Triple) -> bool:
    return all(m.is_zero_matrix for m in sl2_relations_defect(rep).values())


# -- spectra ---------------------------------------------------------------


def _rational_entry(x: PadicScalar, slack: int) -> sympy.Rational:
    coords = x.coordinates()
    precision = x.parent.precision - slack
    for c in coords[1:]:
        if not c.is_zero() and c.valuation() < precision:
            raise NonIntegralSpectrum(f"entry {x} does not lie in Q_p")
    try:
        value = rational_reconstruction(coords[0], precision)
    except ValueError as exc:
        raise NonIntegralSpectrum(f"entry {x} has no small rational form") from exc
    return sympy.Rational(value.numerator, value.denominator)


def as_rational_matrix(m, precision_slack: int = 3) -> sympy.Matrix:
    """Exact form of a matrix given as sympy, nested numbers or p-adic scalars."""
    if isinstance(m, sympy.MatrixBase):
        return sympy.Matrix(m)
    rows = []
    for row in m:
        out = []
        for x in row:
            if isinstance(x, PadicScalar):
                out.append(_rational_entry(x, precision_slack))
            else:
                x = Fraction(x)
                out.append(sympy.Rational(x.numerator, x.denominator))
        rows.append(out)
    return sympy.Matrix(rows)


def weight_spectrum(h, scale: Number = 1, precision_slack: int = 3) -> List[Number]:
    """Eigenvalues of H with multiplicity, each multiplied by scale, sorted.

    Raises:
        NonIntegralSpectrum: the characteristic polynomial does not split
            into integer roots (or a p-adic entry is not a small rational).
    """
    mat = as_rational_matrix(h, precision_slack)
    if mat.is_diagonal():
        diagonal = [mat[i, i] for i in range(mat.rows)]
        if not all(x.is_integer for x in diagonal):
            raise NonIntegralSpectrum(f"diagonal entries {diagonal} are not all integers")
        return sorted(int(x) * scale for x in diagonal)
    lam = sympy.Symbol("lam")
    _, factors = mat.charpoly(lam).factor_list()
    roots: List[Number] = []
    for factor, mult in factors:
        if factor.degree() != 1:
            raise NonIntegralSpectrum(f"irreducible factor {factor.as_expr()} of degree {factor.degree()}")
        lead, const = factor.all_coeffs()
        root = -const / lead
        if not root.is_integer:
            raise NonIntegralSpectrum(f"eigenvalue {root} is not an integer")
        roots.extend([int(root)] * int(mult))
    scaled = [r * scale for r in roots]
    return sorted(scaled)


# -- the quadratic invariant -------------------------------------------------

# y^2 - x1 x2 as the symmetric form on (x1, y, x2), doubled
_QUAD_FORM = [[0, 0, -1], [0, 2, 0], [-1, 0, 0]]


def sym2_coordinates_action(g: SL2Element) -> Matrix:
    """g acting on S = ((x1, y), (y, x2)) by S -> g S g^T, in coordinates (x1, y, x2)."""
    a, b, c, d = g.entries()
    return [
        [a * a, a * b * 2, b * b],
        [a * c, a * d + b * c, b * d],
        [c * c, c * d * 2, d * d],
    ]


def quad_invariant_check(g: SL2Element, strict: bool = True) -> bool:
    """True when g has determinant 1 and fixes q = y^2 - x1 x2 to precision N - 2.

    q is minus the determinant of S, so it alone cannot tell det(g) = 1 from
    det(g) = -1; the determinant is checked first.  With ``strict`` a
    determinant that is not 1 to precision raises, otherwise it gives False.
    """
    field = g.field
    target = field.precision - 2
    det_gap = g.det() - 1
    if not det_gap.is_zero() and det_gap.valuation() < target:
        if strict:
            raise NotDetOne(f"det(g) - 1 has valuation {det_gap.valuation()} < {target}")
        return False
    m = sym2_coordinates_action(g)
    q = from_rows(field, _QUAD_FORM)
    pulled_back = matmul(transpose(m), matmul(q, m))
    return distance(pulled_back, q) >= target


# -- square roots ----------------------------------------------------------


def sqrt_coefficients(num_terms: int) -> List[Fraction]:
    """binom(1/2, k) for k < num_terms."""
    coeffs = [Fraction(1)]
    for k in range(1, num_terms):
        coeffs.append(coeffs[-1] * (Fraction(1, 2) - (k - 1)) / k)
    return coeffs[:max(num_terms, 0)]


def sqrt_series(num_terms: int, field: FieldDescriptor) -> List[PadicScalar]:
    """Coefficients of sqrt(1 + X) reduced into field (p-integral for odd p)."""
    if field.p == 2:
        raise EvenPrimeUnsupported("binom(1/2, k) is not 2-integral")
    return [field(c) for c in sqrt_coefficients(num_terms)]


def sqrt_via_series(x: PadicScalar) -> PadicScalar:
    """The square root of x in 1 + p*O congruent to 1."""
    field = x.parent
    if field.p == 2:
        raise EvenPrimeUnsupported("binom(1/2, k) is not 2-integral")
    t = x - 1
    if t.is_zero():
        return field.one()
    v = t.valuation()
    if v <= 0:
        raise ConvergenceViolation(f"sqrt(1 + X) needs val(X) > 0, got {v}")
    terms = math.ceil((field.precision + 1) / v) + 1
    acc = field.zero()
    for c in reversed(sqrt_series(terms, field)):
        acc = acc * t + c
    return acc


# -- the coordinate algebra --------------------------------------------------

Poly = Dict[Tuple[int, int], Fraction]  # (a, b) -> coefficient of x1^a x2^b


def _padd(u: Poly, v: Poly, sign: int = 1) -> Poly:
    out = dict(u)
    for k, c in v.items():
        out[k] = out.get(k, 0) + sign * c
    return {k: c for k, c in out.items() if c != 0}


def _pmul(u: Poly, v: Poly) -> Poly:
    out: Dict[Tuple[int, int], Fraction] = {}
    for (a1, b1), c1 in u.items():
        for (a2, b2), c2 in v.items():
            k = (a1 + a2, b1 + b2)
            out[k] = out.get(k, 0) + c1 * c2
    return {k: c for k, c in out.items() if c != 0}


def _pscale(u: Poly, c: Number) -> Poly:
    return {k: v * c for k, v in u.items() if v * c != 0}


def _pderiv(u: Poly, var: int) -> Poly:
    out = {}
    for (a, b), c in u.items():
        e = (a, b)[var]
        if e:
            k = (a - 1, b) if var == 0 else (a, b - 1)
            out[k] = c * e
    return out


@dataclass(frozen=True)
class CoordinateElement:
    """A + y*B in Q[x1, x2, y]/(y^2 - x1 x2 - delta^2), always in this canonical form."""

    even: Tuple[Tuple[Tuple[int, int], Fraction], ...]
    odd: Tuple[Tuple[Tuple[int, int], Fraction], ...]

    @classmethod
    def make(cls, even: Poly, odd: Poly) -> "CoordinateElement":
        return cls(tuple(sorted((k, Fraction(c)) for k, c in even.items() if c != 0)),
                   tuple(sorted((k, Fraction(c)) for k, c in odd.items() if c != 0)))

    @property
    def a(self) -> Poly:
        return dict(self.even)

    @property
    def b(self) -> Poly:
        return dict(self.odd)

    def is_zero(self) -> bool:
        return not self.even and not self.odd

    def to_text(self) -> str:
        def poly_text(poly) -> str:
            return " + ".join(f"{c}*x1^{a}*x2^{b}" for (a, b), c in poly) or "0"

        return f"({poly_text(self.even)}) + y*({poly_text(self.odd)})"


class CoordinateAlgebra:
    """The ring generated by x1, x2, y with y^2 = x1 x2 + delta^2.

    D1 and D2 are the derivations with D1(x1) = D2(x2) = 2y,
    D1(x2) = D2(x1) = 0, D1(y) = x2 and D2(y) = x1; H = [D1, D2].
    """

    def __init__(self, delta: Number = 1):
        self.delta = Fraction(delta)
        if self.delta == 0:
            raise NonUnitDelta("delta must be nonzero")
        self._y_squared: Poly = _padd({(1, 1): Fraction(1)}, {(0, 0): self.delta ** 2})

    # -- elements ----------------------------------------------------------

    def zero(self) -> CoordinateElement:
        return CoordinateElement.make({}, {})

    def const(self, c: Number) -> CoordinateElement:
        return CoordinateElement.make({(0, 0): Fraction(c)}, {})

    def x1(self) -> CoordinateElement:
        return CoordinateElement.make({(1, 0): Fraction(1)}, {})

    def x2(self) -> CoordinateElement:
        return CoordinateElement.make({(0, 1): Fraction(1)}, {})

    def y(self) -> CoordinateElement:
        return CoordinateElement.make({}, {(0, 0): Fraction(1)})

    def monomial(self, a: int, b: int, c: int) -> CoordinateElement:
        """x1^a x2^b y^c reduced to canonical form."""
        result = CoordinateElement.make({(a, b): Fraction(1)}, {})
        for _ in range(c):
            result = self.mul(result, self.y())
        return result

    # -- ring operations ---------------------------------------------------

    def add(self, u: CoordinateElement, v: CoordinateElement) -> CoordinateElement:
        return CoordinateElement.make(_padd(u.a, v.a), _padd(u.b, v.b))

    def sub(self, u: CoordinateElement, v: CoordinateElement) -> CoordinateElement:
        return CoordinateElement.make(_padd(u.a, v.a, -1), _padd(u.b, v.b, -1))

    def scale(self, u: CoordinateElement, c: Number) -> CoordinateElement:
        return CoordinateElement.make(_pscale(u.a, c), _pscale(u.b, c))

    def mul(self, u: CoordinateElement, v: CoordinateElement) -> CoordinateElement:
        """(A + yB)(C + yD) = AC + (x1 x2 + delta^2) BD + y(AD + BC)."""
        even = _padd(_pmul(u.a, v.a), _pmul(self._y_squared, _pmul(u.b, v.b)))
        odd = _padd(_pmul(u.a, v.b), _pmul(u.b, v.a))
        return CoordinateElement.make(even, odd)

    def power_of_y(self, k: int) -> CoordinateElement:
        result = self.const(1)
        for _ in range(k):
            result = self.mul(result, self.y())
        return result

    # -- derivations -------------------------------------------------------

    def _derivation(self, u: CoordinateElement, dx1: CoordinateElement, dx2: CoordinateElement,
                    dy: CoordinateElement) -> CoordinateElement:
        def on_poly(poly: Poly) -> CoordinateElement:
            p1 = CoordinateElement.make(_pderiv(poly, 0), {})
            p2 = CoordinateElement.make(_pderiv(poly, 1), {})
            return self.add(self.mul(p1, dx1), self.mul(p2, dx2))

        b = CoordinateElement.make(u.b, {})
        # D(A + yB) = D(A) + D(y) B + y D(B)
        result = on_poly(u.a)
        result = self.add(result, self.mul(dy, b))
        return self.add(result, self.mul(self.y(), on_poly(u.b)))

    def d1(self, u: CoordinateElement) -> CoordinateElement:
        return self._derivation(u, self.scale(self.y(), 2), self.zero(), self.x2())

    def d2(self, u: CoordinateElement) -> CoordinateElement:
        return self._derivation(u, self.zero(), self.scale(self.y(), 2), self.x1())

    def h(self, u: CoordinateElement) -> CoordinateElement:
        return self.sub(self.d1(self.d2(u)), self.d2(self.d1(u)))

    def j(self, u: CoordinateElement) -> CoordinateElement:
        """J = x1 D1 - x2 D2 + y H."""
        result = self.mul(self.x1(), self.d1(u))
        result = self.sub(result, self.mul(self.x2(), self.d2(u)))
        return self.add(result, self.mul(self.y(), self.h(u)))

    # -- the y-localization --------------------------------------------------

    def partial(self, u: "Localized", direction: int) -> "Localized":
        """d_i = (1/2y) D_i on u = num / y^j."""
        deriv = self.d1 if direction == 0 else self.d2
        dy = self.x2() if direction == 0 else self.x1()
        # D(num / y^j) = (y D(num) - j num D(y)) / y^(j+1)
        num = self.sub(self.mul(self.y(), deriv(u.num)), self.scale(self.mul(u.num, dy), u.j))
        return Localized(self.scale(num, Fraction(1, 2)), u.j + 2)

    def equal(self, u: "Localized", v: "Localized") -> bool:
        left = self.mul(u.num, self.power_of_y(v.j))
        right = self.mul(v.num, self.power_of_y(u.j))
        return left == right


@dataclass(frozen=True)
class Localized:
    """num / y^j in the localization at y."""

    num: CoordinateElement
    j: int = 0


def j_operator_mismatches(bound: int, p: int, delta: Number = 1) -> List[Tuple[int, int, int]]:
    """Monomials x1^a x2^b y^c (a+b+c <= bound) where J and 4y^3[d1, d2] differ.

    Raises:
        EvenPrimeUnsupported: p = 2 (the derivations divide by 2y).
        NonUnitDelta: delta is not a p-adic unit.
    """
    if p == 2:
        raise EvenPrimeUnsupported("d_i = D_i / 2y needs p odd")
    delta = Fraction(delta)
    if delta == 0 or vp(delta.numerator, p) or vp(delta.denominator, p):
        raise NonUnitDelta(f"delta = {delta} is not a unit at {p}")
    alg = CoordinateAlgebra(delta)
    bad = []
    for total in range(bound + 1):
        for a in range(total + 1):
            for b in range(total - a + 1):
                c = total - a - b
                m = Localized(alg.monomial(a, b, c))
                bracket_num = alg.sub(alg.partial(alg.partial(m, 1), 0).num,
                                      alg.partial(alg.partial(m, 0), 1).num)
                bracket = Localized(alg.scale(alg.mul(bracket_num, alg.power_of_y(3)), 4),
                                    alg.partial(alg.partial(m, 1), 0).j)
                if not alg.equal(bracket, Localized(alg.j(m.num))):
                    bad.append((a, b, c))
    if bad:
        logger.warning(f"J and 4y^3[d1,d2] disagree on {len(bad)} monomials")
    return bad


def j_operator_check(bound: int, p: int, delta: Number = 1) -> bool:
    """True when J = 4y^3 [d1, d2] on every monomial of degree <= bound."""
    return not j_operator_mismatches(bound, p, delta)


# -- isotypic decomposition --------------------------------------------------


def isotypic_decompose(rep: Sl2Triple) -> List[int]:
    """The multiset {k} with rep ≅ ⊕ Sym^k, sorted in decreasing order.

    For each weight -k <= 0, the lowest weight vectors ker D2 ∩ V_(-k) count
    the copies of Sym^k.

    Raises:
        RelationsViolated: the matrices are not an sl2 representation.
        NonSemisimpleInput: H is not diagonalizable with integer weights, or
            the multiplicities do not account for the dimension.
    """
    d1 = as_rational_matrix(rep.d1)
    d2 = as_rational_matrix(rep.d2)
    h = as_rational_matrix(rep.h)
    triple = Sl2Triple(d1, d2, h)
    if not relations_hold(triple):
        bad = [name for name, m in sl2_relations_defect(triple).items() if not m.is_zero_matrix]
        raise RelationsViolated(f"relations fail: {', '.join(bad)}")

    try:
        weights = weight_spectrum(h)
    except NonIntegralSpectrum as exc:
        raise NonSemisimpleInput(str(exc)) from exc

    dim = h.rows
    counts: Dict[int, int] = {}
    for w in weights:
        counts[w] = counts.get(w, 0) + 1

    def eigenspace(w: int) -> List[sympy.Matrix]:
        if h.is_diagonal():
            return [sympy.eye(dim)[:, i] for i in range(dim) if h[i, i] == w]
        return (h - w * sympy.eye(dim)).nullspace()

    decomposition: List[int] = []
    for w in sorted(counts):
        space = eigenspace(w)
        if len(space) != counts[w]:
            raise NonSemisimpleInput(
                f"weight {w}: eigenspace dimension {len(space)} != multiplicity {counts[w]}")
        if w > 0:
            continue
        basis = sympy.Matrix.hstack(*space)
        lowest = counts[w] - (d2 * basis).rank()
        decomposition.extend([-w] * lowest)

    total = sum(k + 1 for k in decomposition)
    if total != dim:
        raise NonSemisimpleInput(f"sum of (k+1) over the decomposition is {total}, dimension {dim}")
    decomposition.sort(reverse=True)
    logger.debug(f"isotypic decomposition of a {dim}-dimensional representation: {decomposition}")
    return decomposition
