"""Analytic orbit expansions, the twisted action on u-series and orbit reconstruction.

An orbit of w under a group with chart coordinates l(g) in Z_p^d is stored
as its coefficient family, g(w) = sum over k of l(g)^k w_k, not as a closure.
Group elements carry their chart coordinates and, optionally, the Galois
element through which they act on scalars.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import (
    BadDirection,
    ConvergenceViolation,
    DecayViolation,
    LevelMismatch,
    NotAGenerator,
    NotRankOneChart,
    PointOutsideRadius,
    RadiusViolation,
    ShapeMismatch,
)
from .linalg import Matrix, Vector, change_field, distance, identity, matmul, matvec, rank, transpose
from .models import FieldKind
from .padic import (
    AtLeast,
    FieldDescriptor,
    GaloisElement,
    PadicScalar,
    cyclotomic_field,
    factorial_valuation,
    galois_act,
    plog,
    vp,
)
from .series import (
    MultiIndex,
    RadiusIndexedSeries,
    VectorSeries,
    binomial,
    index_add,
    index_binomial,
    index_factorial,
    index_sub,
    indices_below,
    indices_up_to,
    unit_index,
    zero_index,
)


logger = logging.getLogger(__name__)


# -- group elements --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GroupElement:
    """A group element seen through its chart coordinates l(g).

    ``galois`` is the Galois element acting on scalars; None means the
    coefficient action is trivial.
    """
    chart: Tuple[PadicScalar, ...]
    galois: Optional[GaloisElement] = None

    @classmethod
    def from_character(cls, field: FieldDescriptor, chi: int) -> "GroupElement":
        """Element of Gamma with cyclotomic character chi, chart coordinate log(chi)."""
        log_chi = field.coerce(plog(field.base()(chi)))
        galois = None
        if field.kind is FieldKind.CYCLOTOMIC:
            galois = GaloisElement(field, chi)
        return cls((log_chi,), galois)

    @classmethod
    def from_chart(cls, chart: Sequence[PadicScalar]) -> "GroupElement":
        return cls(tuple(chart), None)

    @property
    def chart_dim(self) -> int:
        return len(self.chart)

    def compose(self, other: "GroupElement") -> "GroupElement":
        """gh; chart coordinates add since the chart is a homomorphism."""
        if self.chart_dim != other.chart_dim:
            raise ShapeMismatch(f"chart dimension {self.chart_dim} vs {other.chart_dim}")
        chart = tuple(a + b for a, b in zip(self.chart, other.chart))
        if self.galois is None and other.galois is None:
            galois = None
        elif self.galois is None:
            galois = other.galois
        elif other.galois is None:
            galois = self.galois
        else:
            galois = self.galois * other.galois
        return GroupElement(chart, galois)

    def act_on_scalar(self, x: PadicScalar) -> PadicScalar:
        return x if self.galois is None else galois_act(self.galois, x)

    def act_on_vector(self, v: Sequence[PadicScalar]) -> Vector:
        return [self.act_on_scalar(x) for x in v]

    def chart_valuation(self) -> Fraction:
        return min(c.valuation() for c in self.chart)


def sample_character(p: int, radius: int, rng, precision: int) -> int:
    """Random chi in 1 + p^radius Z_p, reduced mod p^precision."""
    return (1 + p ** radius * rng.randrange(p ** precision)) % p ** precision


def generator_character(p: int, radius: int) -> int:
    """1 + p^radius, a topological generator of 1 + p^radius Z_p."""
    return 1 + p ** radius


# -- analytic matrix actions -----------------------------------------------


class AnalyticMatrixAction:
    """g -> Mat(g) given by a matrix of series in the chart coordinates.

    Mat(g) moves a column of elements: g(e) = Mat(g) . e for a basis column e.
    Applying h then g gives Mat(gh) = g(Mat(h)) . Mat(g), and coordinates c of
    c . e transform as row vectors, c -> g(c) . Mat(g).
    """

    def __init__(self, entries: Sequence[Sequence[RadiusIndexedSeries]]):
        dim = len(entries)
        if dim == 0 or any(len(row) != dim for row in entries):
            raise ShapeMismatch("action matrices must be square and non-empty")
        first = entries[0][0]
        for row in entries:
            for s in row:
                first._check_compatible(s)
        self.entries = [list(row) for row in entries]
        self.field = first.field
        self.dimension = dim
        self.chart_dim = first.nvars
        self.radius = first.radius
        self.degree = min(s.degree for row in entries for s in row)

    def matrix(self, g: GroupElement) -> Matrix:
        """Mat(g), evaluated at the chart coordinates of g."""
        if g.chart_dim != self.chart_dim:
            raise ShapeMismatch(f"group element has chart dimension {g.chart_dim}, action {self.chart_dim}")
        try:
            return [[s.evaluate(g.chart) for s in row] for row in self.entries]
        except PointOutsideRadius as e:
            raise RadiusViolation(f"group element outside the radius-{self.radius} subgroup: {e}") from e

    def act(self, g: GroupElement, v: Sequence[PadicScalar]) -> Vector:
        """Coordinates of g(v . e): the row vector g(v) . Mat(g)."""
        return matvec(transpose(self.matrix(g)), g.act_on_vector(v))

    def coefficient_matrix(self, k: MultiIndex) -> Matrix:
        """M_k with Mat(g) = sum of l(g)^k M_k."""
        return [[s.coefficient(k) for s in row] for row in self.entries]

    def with_radius(self, radius: int) -> "AnalyticMatrixAction":
        return AnalyticMatrixAction([[s.with_radius(radius) for s in row] for row in self.entries])

    def origin_defect(self) -> Fraction:
        """Agreement of Mat at the chart origin with the identity."""
        return distance(self.coefficient_matrix(zero_index(self.chart_dim)),
                        identity(self.field, self.dimension))

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "chart_dim": self.chart_dim,
            "radius": self.radius,
            "degree": self.degree,
            "entries": [[s.to_text() for s in row] for row in self.entries],
        }


def cocycle_defect(action: AnalyticMatrixAction, g: GroupElement, h: GroupElement) -> Fraction:
    """val of Mat(gh) - g(Mat(h)) . Mat(g)."""
    lhs = action.matrix(g.compose(h))
    twisted = [[g.act_on_scalar(x) for x in row] for row in action.matrix(h)]
    return distance(lhs, matmul(twisted, action.matrix(g)))


def exponential_degree(p: int, precision: int, radius: int, rate: Fraction = Fraction(0)) -> int:
    """Truncation degree D with val((s l)^k / k!) > precision for k > D.

    ``rate`` is a lower bound for val(s) (or for the entries of a matrix s).
    """
    slope = radius + rate - Fraction(1, p - 1)
    if slope <= 0:
        raise ConvergenceViolation(
            f"exp(s*l) does not converge on radius {radius} for p={p} (slope {slope})")
    return min(math.ceil((precision + 1) / slope), p * precision - 1)


def _guarded(fld: FieldDescriptor, degree: int) -> FieldDescriptor:
    """fld with enough extra digits to absorb a division by degree!."""
    return fld.with_precision(fld.precision + factorial_valuation(degree, fld.p))


def _rounded(x: PadicScalar, fld: FieldDescriptor) -> PadicScalar:
    return PadicScalar(fld, x.coeffs, x.shift)


def _rounded_series(series: VectorSeries, fld: FieldDescriptor) -> VectorSeries:
    return VectorSeries([
        RadiusIndexedSeries(fld, c.nvars, c.radius, c.degree, {k: _rounded(a, fld) for k, a in c.items()})
        for c in series.components
    ])


def _exp_series(field: FieldDescriptor, s: PadicScalar, radius: int, degree: int,
                nvars: int = 1, direction: int = 0) -> RadiusIndexedSeries:
    work = _guarded(field, degree)
    sw = PadicScalar(work, s.coeffs, s.shift)
    coeffs = {}
    term = work.one()
    for k in range(degree + 1):
        coeffs[tuple(k if i == direction else 0 for i in range(nvars))] = PadicScalar(field, term.coeffs, term.shift)
        term = (term * sw).divide_by_int(k + 1)
    return RadiusIndexedSeries(field, nvars, radius, degree, coeffs)


def trivial_action(field: FieldDescriptor, dimension: int, radius: int, degree: int = 0,
                   chart_dim: int = 1) -> AnalyticMatrixAction:
    entries = [[RadiusIndexedSeries.constant(field, chart_dim, radius, degree, 1 if i == j else 0)
                for j in range(dimension)] for i in range(dimension)]
    return AnalyticMatrixAction(entries)


def additive_action(field: FieldDescriptor, radius: int, degree: int = 1, chart_dim: int = 1,
                    direction: int = 0) -> AnalyticMatrixAction:
    """[[1, 0], [T_direction, 1]]: (w1, w2) -> (w1, w2 + l_direction(g) w1)."""
    one = RadiusIndexedSeries.constant(field, chart_dim, radius, degree, 1)
    zero = RadiusIndexedSeries.zero(field, chart_dim, radius, degree)
    t = RadiusIndexedSeries.variable(field, chart_dim, radius, degree, direction)
    return AnalyticMatrixAction([[one, zero], [t, one]])


def character_action(field: FieldDescriptor, s: int, radius: int,
                     degree: Optional[int] = None) -> AnalyticMatrixAction:
    """One-dimensional action g -> exp(s l(g))."""
    s_scalar = field(s)
    if degree is None:
        rate = s_scalar.valuation() if s else Fraction(0)
        degree = exponential_degree(field.p, field.precision, radius, rate)
    return AnalyticMatrixAction([[_exp_series(field, s_scalar, radius, degree)]])


def unipotent_action(field: FieldDescriptor, radius: int,
                     degree: Optional[int] = None) -> AnalyticMatrixAction:
    """[[e^l, e^l - 1], [0, 1]] = exp(l A) with A = [[1, 1], [0, 0]]."""
    if degree is None:
        degree = exponential_degree(field.p, field.precision, radius)
    e_t = _exp_series(field, field.one(), radius, degree)
    one = RadiusIndexedSeries.constant(field, 1, radius, degree, 1)
    zero = RadiusIndexedSeries.zero(field, 1, radius, degree)
    return AnalyticMatrixAction([[e_t, e_t - one], [zero, one]])


def exp_action(theta0: Matrix, radius: int, degree: Optional[int] = None) -> AnalyticMatrixAction:
    """Mat(g) = exp(l(g) Theta_0), entries sum of T^j (Theta_0^j)_ab / j!."""
    fld = theta0[0][0].parent
    dim = len(theta0)
    if degree is None:
        values = [x.valuation() for row in theta0 for x in row if not x.is_zero()]
        rate = min(values) if values else Fraction(0)
        degree = exponential_degree(fld.p, fld.precision, radius, rate)
    work = _guarded(fld, degree)
    theta_w = change_field(theta0, work)
    coeffs: List[List[Dict[MultiIndex, PadicScalar]]] = [[{} for _ in range(dim)] for _ in range(dim)]
    power = identity(work, dim)
    for j in range(degree + 1):
        for a in range(dim):
            for b in range(dim):
                x = power[a][b]
                coeffs[a][b][(j,)] = _rounded(x, fld)
        power = [[x.divide_by_int(j + 1) for x in row] for row in matmul(power, theta_w)]
    entries = [[RadiusIndexedSeries(fld, 1, radius, degree, coeffs[a][b]) for b in range(dim)]
               for a in range(dim)]
    return AnalyticMatrixAction(entries)


# -- orbit expansions ------------------------------------------------------


@dataclass
class OrbitExpansion:
    """Coefficient family {w_k} of an orbit, w_0 = w."""
    field: FieldDescriptor
    dimension: int
    chart_dim: int
    radius: int
    degree: int
    coefficients: Dict[MultiIndex, List[PadicScalar]] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for k, vec in self.coefficients.items():
            k = tuple(k)
            if len(k) != self.chart_dim:
                raise ShapeMismatch(f"multi-index {k} for chart dimension {self.chart_dim}")
            if len(vec) != self.dimension:
                raise ShapeMismatch(f"vector of length {len(vec)} in dimension {self.dimension}")
            if sum(k) > self.degree:
                continue
            vec = [self.field(x) for x in vec]
            if any(not x.is_zero() for x in vec):
                clean[k] = vec
        self.coefficients = clean

    @property
    def vector(self) -> Vector:
        return self.coefficient(zero_index(self.chart_dim))

    def coefficient(self, k: MultiIndex) -> Vector:
        vec = self.coefficients.get(tuple(k))
        return list(vec) if vec is not None else [self.field.zero() for _ in range(self.dimension)]

    def items(self) -> List[Tuple[MultiIndex, Vector]]:
        return sorted(self.coefficients.items())

    def vector_valuation(self, k: MultiIndex) -> Fraction:
        values = [x.valuation() for x in self.coefficient(k) if not x.is_zero()]
        return min(values) if values else AtLeast(self.field.precision)

    def decay_valuation(self, at_radius: Optional[int] = None) -> Fraction:
        """min over k of val(w_k) + m|k|."""
        m = self.radius if at_radius is None else at_radius
        if not self.coefficients:
            return AtLeast(self.field.precision)
        return min(self.vector_valuation(k) + m * sum(k) for k in self.coefficients)

    def with_precision(self, precision: int) -> "OrbitExpansion":
        fld = self.field.with_precision(precision)
        coefficients = {k: [PadicScalar(fld, x.coeffs, x.shift) for x in vec] for k, vec in self.coefficients.items()}
        return OrbitExpansion(fld, self.dimension, self.chart_dim, self.radius, self.degree, coefficients)

    def as_series(self, sign_alternating: bool = False) -> VectorSeries:
        coeffs = {}
        for k, vec in self.coefficients.items():
            if sign_alternating and sum(k) % 2:
                vec = [-x for x in vec]
            coeffs[k] = vec
        return VectorSeries.from_coefficients(
            self.field, self.chart_dim, self.radius, self.degree, self.dimension, coeffs)

    def at(self, g: GroupElement) -> Vector:
        """g(w) = sum of l(g)^k w_k."""
        if g.chart_valuation() < self.radius:
            raise RadiusViolation(f"chart valuation {g.chart_valuation()} below radius {self.radius}")
        return [c.evaluate(g.chart) for c in self.as_series().components]

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "chart_dim": self.chart_dim,
            "radius": self.radius,
            "degree": self.degree,
            "terms": [{"multiindex": list(k), "vector": [x.to_text() for x in vec]}
                      for k, vec in self.items()],
        }


def orbit_from_action(action: AnalyticMatrixAction, w: Sequence, degree: Optional[int] = None) -> OrbitExpansion:
    """Orbit of w under the action, w_k = M_k w.

    Valid when the coefficient action fixes the coordinates of w (e.g. w has
    Q_p coordinates).
    """
    fld = action.field
    w = [fld(x) for x in w]
    if len(w) != action.dimension:
        raise ShapeMismatch(f"vector of length {len(w)} for an action of dimension {action.dimension}")
    degree = action.degree if degree is None else min(degree, action.degree)
    coefficients = {}
    for k in indices_up_to(action.chart_dim, degree):
        coefficients[k] = matvec(action.coefficient_matrix(k), w)
    return OrbitExpansion(fld, action.dimension, action.chart_dim, action.radius, degree, coefficients)


def additive_orbit(fld: FieldDescriptor, value, radius: int, degree: int = 1, chart_dim: int = 1,
                   direction: int = 0) -> OrbitExpansion:
    """Orbit g(x) = x + l_direction(g) of a one-dimensional coordinate."""
    coefficients = {zero_index(chart_dim): [value], unit_index(chart_dim, direction): [1]}
    return OrbitExpansion(fld, 1, chart_dim, radius, degree, coefficients)


def character_orbit(fld: FieldDescriptor, s: int, radius: int, degree: int) -> OrbitExpansion:
    """Orbit g(w) = exp(s l(g)) w of w = 1, so w_k = s^k / k!."""
    coefficients = {(k,): [fld(Fraction(s ** k, math.factorial(k)))] for k in range(degree + 1)}
    return OrbitExpansion(fld, 1, 1, radius, degree, coefficients)


# -- derivations and F-analyticity -----------------------------------------


def nabla(w: OrbitExpansion, direction: int) -> Vector:
    """nabla_tau(w) = w_{1_tau}."""
    if not 0 <= direction < w.chart_dim:
        raise BadDirection(f"direction {direction} out of range for chart dimension {w.chart_dim}")
    return w.coefficient(unit_index(w.chart_dim, direction))


def is_f_analytic(w: OrbitExpansion, identity_direction: int = 0,
                  tolerance: Optional[Fraction] = None) -> bool:
    """True when nabla_tau(w) vanishes for every direction except the identity one."""
    if not 0 <= identity_direction < w.chart_dim:
        raise BadDirection(f"identity direction {identity_direction} out of range")
    tolerance = w.field.precision if tolerance is None else tolerance
    for tau in range(w.chart_dim):
        if tau == identity_direction:
            continue
        if any(not x.is_zero() and x.valuation() < tolerance for x in nabla(w, tau)):
            return False
    return True


def nabla_consistency(action: AnalyticMatrixAction, w: OrbitExpansion) -> Fraction:
    """Least agreement between w_k and (prod over tau of A_tau^(k_tau)) w / k!.

    A_tau = M_{1_tau} is the derivation of the action in direction tau; this is
    the identity w_k = nabla^k(w) / k! for exponential actions.
    """
    d = w.chart_dim
    work = _guarded(w.field, w.degree)
    generators = [change_field(action.coefficient_matrix(unit_index(d, tau)), work) for tau in range(d)]
    worst: Fraction = AtLeast(w.field.precision)
    for k in indices_up_to(d, w.degree):
        v = [_rounded(x, work) for x in w.vector]
        for tau in reversed(range(d)):
            for _ in range(k[tau]):
                v = matvec(generators[tau], v)
        v = [_rounded(x.divide_by_int(index_factorial(k)), w.field) for x in v]
        diff = [a - b for a, b in zip(v, w.coefficient(k))]
        values = [x.valuation() for x in diff if not x.is_zero()]
        if values:
            worst = min(worst, min(values))
    return worst


def derivative_shift_rule(k: MultiIndex, direction: int) -> Tuple[int, MultiIndex]:
    """nabla_tau (x - x_n)^k = k_tau (x - x_n)^(k - 1_tau); (0, k) when k_tau = 0."""
    if not 0 <= direction < len(k):
        raise BadDirection(f"direction {direction} out of range for {len(k)} variables")
    if k[direction] == 0:
        return 0, tuple(k)
    return k[direction], index_sub(k, unit_index(len(k), direction))


def alternating_identity(m: int, i: int) -> int:
    """sum over l <= m-i of (-1)^l binomial(m-i, l): 1 if m == i else 0."""
    if not 0 <= i <= m:
        raise ValueError(f"need 0 <= i <= m, got i={i}, m={m}")
    return sum((-1) ** l * binomial(m - i, l) for l in range(m - i + 1))


def telescope_identity(j: MultiIndex) -> int:
    """sum over k <= j of (-1)^|k| binomial(j, k): 1 if j == 0 else 0."""
    return sum((-1) ** sum(k) * index_binomial(j, k) for k in indices_below(j))


# -- the invariantization map ----------------------------------------------


def _require_rank_one(w: OrbitExpansion) -> None:
    if w.chart_dim != 1:
        raise NotRankOneChart(f"C(w) needs a one-dimensional chart, got {w.chart_dim}")


def cmap(w: OrbitExpansion) -> VectorSeries:
    """C(w) = sum of (-1)^k w_k T^k."""
    _require_rank_one(w)
    return w.as_series(sign_alternating=True)


def _transport(w: OrbitExpansion, chart: Sequence[PadicScalar]) -> Dict[MultiIndex, Vector]:
    d, D = w.chart_dim, w.degree
    powers = []
    for c in chart:
        row = [w.field.one()]
        for _ in range(D):
            row.append(row[-1] * c)
        powers.append(row)
    out = {}
    for k in indices_up_to(d, D):
        acc = [w.field.zero() for _ in range(w.dimension)]
        for m, vec in w.coefficients.items():
            if any(a < b for a, b in zip(m, k)):
                continue
            j = index_sub(m, k)
            factor = w.field(index_binomial(m, j))
            for i, ji in enumerate(j):
                if ji:
                    factor = factor * powers[i][ji]
            acc = [a + factor * x for a, x in zip(acc, vec)]
        if any(not x.is_zero() for x in acc):
            out[k] = acc
    return out


def transported_coefficients(w: OrbitExpansion, g: GroupElement) -> Dict[MultiIndex, Vector]:
    """g(w_k) = sum over j of binomial(k+j, j) l(g)^j w_{k+j}, from the orbit of w.

    w_{k+j} may carry denominators up to (k+j)!, so the sums run with guard
    digits and are rounded back to the field of w.
    """
    lifted = w.with_precision(_guarded(w.field, w.degree).precision)
    moved = _transport(lifted, [_rounded(c, lifted.field) for c in g.chart])
    out = {}
    for k, vec in moved.items():
        vec = [_rounded(x, w.field) for x in vec]
        if any(not x.is_zero() for x in vec):
            out[k] = vec
    return out


def cmap_defect(w: OrbitExpansion, g: GroupElement) -> VectorSeries:
    """g(C(w)) - C(w), with g acting on coefficients and by T -> T + l(g)."""
    _require_rank_one(w)
    if g.chart_valuation() < w.radius:
        raise RadiusViolation(f"chart valuation {g.chart_valuation()} below radius {w.radius}")
    lifted = w.with_precision(_guarded(w.field, w.degree).precision)
    chart = [_rounded(c, lifted.field) for c in g.chart]
    moved = _transport(lifted, chart)
    signed = {k: ([-x for x in vec] if sum(k) % 2 else vec) for k, vec in moved.items()}
    series = VectorSeries.from_coefficients(lifted.field, 1, w.radius, w.degree, w.dimension, signed)
    return _rounded_series(series.substitute(chart) - cmap(lifted), w.field)


# -- reconstruction --------------------------------------------------------


@dataclass
class Reconstruction:
    """The y_i of an orbit and their resummation sum of y_i (x - x_n)^i."""
    radius: int
    coefficients: Dict[MultiIndex, VectorSeries]
    resum: VectorSeries
    terms: Dict[MultiIndex, Dict[Tuple[MultiIndex, MultiIndex], int]] = field(default_factory=dict)

    def y(self, i: MultiIndex) -> VectorSeries:
        return self.coefficients[tuple(i)]


def check_decay(z: OrbitExpansion, radius: int) -> None:
    """val(z_k) + (radius - 1)|k| >= val(z) for every k, else DecayViolation."""
    base = z.vector_valuation(zero_index(z.chart_dim))
    for k in z.coefficients:
        if not any(k):
            continue
        if z.vector_valuation(k) + (radius - 1) * sum(k) < base:
            raise DecayViolation(
                f"z_{k} has valuation {z.vector_valuation(k)}, needs >= {base - (radius - 1) * sum(k)}")


def _placeholder_powers(placeholders: Sequence[RadiusIndexedSeries], k: MultiIndex,
                        cache: Dict[MultiIndex, RadiusIndexedSeries]) -> RadiusIndexedSeries:
    if k in cache:
        return cache[k]
    tau = next(i for i, a in enumerate(k) if a)
    lower = _placeholder_powers(placeholders, index_sub(k, unit_index(len(k), tau)), cache)
    cache[k] = lower * placeholders[tau]
    return cache[k]


def reconstruct(z: OrbitExpansion, x_shift: Optional[Sequence[RadiusIndexedSeries]] = None,
                radius: Optional[int] = None) -> Reconstruction:
    """y_i = sum over k of (-1)^|k| binomial(k+i, k) (x - x_n)^k z_{k+i}, and their resummation.

    ``x_shift`` are the placeholders for x - x_n (default: fresh variables);
    ``radius`` defaults to z.radius + 1.
    """
    d, D = z.chart_dim, z.degree
    radius = z.radius + 1 if radius is None else radius
    check_decay(z, radius)
    fld = z.field
    if x_shift is None:
        x_shift = [RadiusIndexedSeries.variable(fld, d, radius, D, tau) for tau in range(d)]
    if len(x_shift) != d:
        raise ShapeMismatch(f"{len(x_shift)} placeholders for chart dimension {d}")
    nvars = x_shift[0].nvars
    series_radius = x_shift[0].radius
    cache: Dict[MultiIndex, RadiusIndexedSeries] = {
        zero_index(d): RadiusIndexedSeries.constant(fld, nvars, series_radius, D, 1)}

    def monomial(k: MultiIndex) -> RadiusIndexedSeries:
        return _placeholder_powers(x_shift, k, cache)

    def combine(terms: Dict[Tuple[MultiIndex, MultiIndex], int]) -> VectorSeries:
        components = [RadiusIndexedSeries.zero(fld, nvars, series_radius, D) for _ in range(z.dimension)]
        for (k, m), c in terms.items():
            if c == 0:
                continue
            vec = z.coefficient(m)
            mono = monomial(k)
            components = [comp + mono.scale(x * c) for comp, x in zip(components, vec)]
        return VectorSeries(components)

    coefficients: Dict[MultiIndex, VectorSeries] = {}
    all_terms: Dict[MultiIndex, Dict[Tuple[MultiIndex, MultiIndex], int]] = {}
    resum = [RadiusIndexedSeries.zero(fld, nvars, series_radius, D) for _ in range(z.dimension)]
    for i in indices_up_to(d, D):
        terms: Dict[Tuple[MultiIndex, MultiIndex], int] = {}
        for m in indices_up_to(d, D):
            if any(a < b for a, b in zip(m, i)):
                continue
            k = index_sub(m, i)
            terms[(k, m)] = (-1) ** sum(k) * index_binomial(m, k)
        all_terms[i] = terms
        coefficients[i] = combine(terms)
        if terms:
            mono = monomial(i)
            resum = [r + y * mono for r, y in zip(resum, coefficients[i].components)]
    logger.debug(f"reconstruct: {len(coefficients)} coefficients at radius {radius}")
    return Reconstruction(radius, coefficients, VectorSeries(resum), all_terms)


def reconstruction_nabla(z: OrbitExpansion, rec: Reconstruction, i: MultiIndex,
                         direction: int) -> Dict[Tuple[MultiIndex, MultiIndex], int]:
    """nabla_tau(y_i) as integer multiples of (x - x_n)^a z_m, after cancellation.

    Uses the shift rule on the placeholders and nabla_tau z_m = (m_tau + 1) z_{m + 1_tau}.
    An empty result is the exact vanishing of nabla_tau(y_i).
    """
    d = z.chart_dim
    if not 0 <= direction < d:
        raise BadDirection(f"direction {direction} out of range for chart dimension {d}")
    e = unit_index(d, direction)
    out: Dict[Tuple[MultiIndex, MultiIndex], int] = {}
    for (k, m), c in rec.terms[tuple(i)].items():
        factor, lowered = derivative_shift_rule(k, direction)
        if factor:
            key = (lowered, m)
            out[key] = out.get(key, 0) + c * factor
        raised = index_add(m, e)
        if sum(raised) <= z.degree:
            key = (k, raised)
            out[key] = out.get(key, 0) + c * (m[direction] + 1)
    # terms landing on z-indices with no stored coefficient are zero vectors
    return {key: c for key, c in out.items() if c and tuple(key[1]) in z.coefficients}


# -- the ring of u-series with twisted action --------------------------------


@dataclass(frozen=True, eq=False)
class SenRingElement:
    """f(u) = sum of a_i u^i over a cyclotomic field, radius class n."""
    series: RadiusIndexedSeries

    def __post_init__(self):
        s = self.series
        if s.nvars != 1:
            raise ShapeMismatch(f"u-series have one variable, got {s.nvars}")
        if s.field.kind is FieldKind.CYCLOTOMIC and s.field.level < s.radius:
            raise LevelMismatch(f"level {s.field.level} below radius class {s.radius}")

    @property
    def radius(self) -> int:
        return self.series.radius

    @classmethod
    def monomial(cls, fld: FieldDescriptor, coeff, i: int, radius: int, degree: int) -> "SenRingElement":
        return cls(RadiusIndexedSeries(fld, 1, radius, degree, {(i,): coeff}))


def sen_ring_act(g: GaloisElement, f: SenRingElement) -> SenRingElement:
    """g(sum a_i u^i) = sum g(a_i) (u + log chi(g))^i."""
    s = f.series
    log_chi = s.field.coerce(plog(g.chi()))
    if log_chi.valuation() < f.radius:
        raise RadiusViolation(f"val(log chi(g)) = {log_chi.valuation()} < radius {f.radius}")
    if g.parent.same_extension(s.field):
        moved = s.map_coefficients(lambda a: galois_act(g, a))
    elif g.parent.kind is FieldKind.BASE:
        moved = s
    else:
        raise LevelMismatch(f"Galois element of {g.parent} acting on series over {s.field}")
    return SenRingElement(moved.substitute([log_chi]))


def fixed_space_dimension(g: GaloisElement, level: int, degree: int) -> int:
    """dim over Q_p of the g-fixed u-series of degree <= D over K_level."""
    p, precision = g.parent.p, g.parent.precision
    chi = g.exponent
    if chi == 1 or vp(chi - 1, p) != level:
        raise NotAGenerator(f"chi(g) = {chi} does not generate 1 + p^{level} Z_p")
    fld = cyclotomic_field(p, level, precision)
    g_level = GaloisElement(fld, chi)
    d = fld.degree
    size = (degree + 1) * d
    columns = []
    for i in range(degree + 1):
        for t in range(d):
            basis = [0] * d
            basis[t] = 1
            f = SenRingElement.monomial(fld, PadicScalar(fld, basis), i, level, degree)
            moved = sen_ring_act(g_level, f).series - f.series
            column = []
            for j in range(degree + 1):
                column.extend(moved.coefficient((j,)).coordinates())
            columns.append(column)
    rows = [[columns[c][r] for c in range(size)] for r in range(size)]
    return size - rank(rows)
