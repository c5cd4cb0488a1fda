"""Truncated multi-index power series with a Gauss-norm radius class.

A RadiusIndexedSeries is sum(a_k T^k) over multi-indices k with |k| <= D,
coefficients in a field descriptor, tagged with a radius class n: the Gauss
norm at radius p^(-n) is sup|a_k| p^(-n|k|), reported here in valuation form
min(val(a_k) + n|k|).
"""

import itertools
import logging
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import (
    BadDirection,
    DominanceViolation,
    MixedFields,
    NonUnitConstantTerm,
    PointOutsideRadius,
    RadiusTooSmall,
    ShapeMismatch,
    ShiftTooLarge,
    TruncationTooDeep,
)
from .models import FieldKind
from .padic import AtLeast, FieldDescriptor, PadicScalar


logger = logging.getLogger(__name__)

MultiIndex = Tuple[int, ...]
Scalar = Union[PadicScalar, int, Fraction]


# -- multi-index helpers ---------------------------------------------------

# lru_cache takes an internal lock on updates, so worker threads can share it.
@lru_cache(maxsize=None)
def binomial(n: int, k: int) -> int:
    """Binomial coefficient, memoized."""
    return math.comb(n, k)


def zero_index(d: int) -> MultiIndex:
    return (0,) * d


def unit_index(d: int, j: int) -> MultiIndex:
    """The multi-index 1_j (0-based direction j)."""
    if not 0 <= j < d:
        raise BadDirection(f"direction {j} out of range for {d} variables")
    return tuple(1 if i == j else 0 for i in range(d))


def index_add(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x + y for x, y in zip(a, b))


def index_sub(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x - y for x, y in zip(a, b))


def index_binomial(j: MultiIndex, k: MultiIndex) -> int:
    """Product of binomial(j_i, k_i)."""
    result = 1
    for a, b in zip(j, k):
        result *= binomial(a, b)
    return result


def index_factorial(k: MultiIndex) -> int:
    result = 1
    for a in k:
        result *= math.factorial(a)
    return result


def indices_up_to(d: int, D: int) -> List[MultiIndex]:
    """All multi-indices in d variables with total degree <= D, lexicographically."""
    return [k for k in itertools.product(range(D + 1), repeat=d) if sum(k) <= D]


def indices_below(k: MultiIndex) -> Iterable[MultiIndex]:
    """All j <= k componentwise."""
    return itertools.product(*(range(a + 1) for a in k))


def monomial_text(k: MultiIndex) -> str:
    parts = []
    for i, a in enumerate(k):
        if a == 1:
            parts.append(f"T{i + 1}")
        elif a > 1:
            parts.append(f"T{i + 1}^{a}")
    return " ".join(parts)


def as_coefficient(field: FieldDescriptor, a: Scalar) -> PadicScalar:
    """Coerce a into field; Q_p scalars at the same precision embed, other parents raise."""
    if not isinstance(a, PadicScalar):
        return field(a)
    if a.parent is field or a.parent == field:
        return a
    if a.parent.kind is FieldKind.BASE and a.parent.p == field.p and a.parent.precision == field.precision:
        return field.coerce(a)
    raise MixedFields(f"coefficient in {a.parent}, series over {field}")


@dataclass(frozen=True)
class GaussNorm:
    """Gauss norm in valuation form and the first multi-index attaining it."""
    value: Fraction
    attained_at: Optional[MultiIndex]


class RadiusIndexedSeries:
    """Truncated power series in nvars variables, radius class n, degree D."""

    __slots__ = ("field", "nvars", "radius", "degree", "_coeffs")

    def __init__(
        self,
        field: FieldDescriptor,
        nvars: int,
        radius: int,
        degree: int,
        coeffs: Optional[Mapping[MultiIndex, Scalar]] = None,
    ):
        if nvars < 1:
            raise ShapeMismatch(f"series need at least one variable, got {nvars}")
        if radius < 1:
            raise ShapeMismatch(f"radius class must be at least 1, got {radius}")
        if degree < 0:
            raise ShapeMismatch(f"truncation degree must be non-negative, got {degree}")
        if degree >= field.p * field.precision:
            raise TruncationTooDeep(
                f"degree {degree} >= p*N = {field.p * field.precision} leaves no precision")
        self.field = field
        self.nvars = nvars
        self.radius = radius
        self.degree = degree
        store: Dict[MultiIndex, PadicScalar] = {}
        for k, a in (coeffs or {}).items():
            k = tuple(k)
            if len(k) != nvars:
                raise ShapeMismatch(f"multi-index {k} has wrong length for {nvars} variables")
            if sum(k) > degree:
                continue
            a = as_coefficient(field, a)
            if not a.is_zero():
                store[k] = a
        self._coeffs = store

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, field: FieldDescriptor, nvars: int, radius: int, degree: int) -> "RadiusIndexedSeries":
        return cls(field, nvars, radius, degree)

    @classmethod
    def constant(cls, field: FieldDescriptor, nvars: int, radius: int, degree: int,
                 value: Scalar) -> "RadiusIndexedSeries":
        return cls(field, nvars, radius, degree, {zero_index(nvars): value})

    @classmethod
    def variable(cls, field: FieldDescriptor, nvars: int, radius: int, degree: int,
                 j: int) -> "RadiusIndexedSeries":
        return cls(field, nvars, radius, degree, {unit_index(nvars, j): 1})

    def _like(self, coeffs: Mapping[MultiIndex, Scalar], degree: Optional[int] = None,
              nvars: Optional[int] = None) -> "RadiusIndexedSeries":
        return RadiusIndexedSeries(
            self.field,
            self.nvars if nvars is None else nvars,
            self.radius,
            self.degree if degree is None else degree,
            coeffs,
        )

    # -- access ------------------------------------------------------------

    def coefficient(self, k: MultiIndex) -> PadicScalar:
        a = self._coeffs.get(tuple(k))
        return a if a is not None else self.field.zero()

    def items(self) -> List[Tuple[MultiIndex, PadicScalar]]:
        """Nonzero terms sorted lexicographically by multi-index."""
        return sorted(self._coeffs.items())

    def support(self) -> List[MultiIndex]:
        return sorted(self._coeffs)

    def is_zero(self) -> bool:
        return not self._coeffs

    def constant_term(self) -> PadicScalar:
        return self.coefficient(zero_index(self.nvars))

    def homogeneous_part(self, r: int) -> "RadiusIndexedSeries":
        return self._like({k: a for k, a in self._coeffs.items() if sum(k) == r})

    def truncate(self, degree: int) -> "RadiusIndexedSeries":
        return self._like(self._coeffs, degree=min(degree, self.degree))

    def with_radius(self, radius: int) -> "RadiusIndexedSeries":
        """The same series viewed in another radius class."""
        return RadiusIndexedSeries(self.field, self.nvars, radius, self.degree, self._coeffs)

    def map_coefficients(self, fn: Callable[[PadicScalar], PadicScalar]) -> "RadiusIndexedSeries":
        return self._like({k: fn(a) for k, a in self._coeffs.items()})

    def min_coefficient_valuation(self) -> Fraction:
        """Smallest coefficient valuation; AtLeast(N) for the zero series."""
        if not self._coeffs:
            return AtLeast(self.field.precision)
        return min(a.valuation() for a in self._coeffs.values())

    # -- ring structure ----------------------------------------------------

    def _check_compatible(self, other: "RadiusIndexedSeries") -> None:
        if other.field is not self.field and other.field != self.field:
            raise MixedFields(f"{self.field} vs {other.field}")
        if other.nvars != self.nvars or other.radius != self.radius:
            raise ShapeMismatch(
                f"({self.nvars} vars, radius {self.radius}) vs ({other.nvars} vars, radius {other.radius})")

    def __add__(self, other: "RadiusIndexedSeries") -> "RadiusIndexedSeries":
        if not isinstance(other, RadiusIndexedSeries):
            return NotImplemented
        self._check_compatible(other)
        out = dict(self._coeffs)
        for k, b in other._coeffs.items():
            a = out.get(k)
            out[k] = b if a is None else a + b
        return self._like(out, degree=min(self.degree, other.degree))

    def __neg__(self) -> "RadiusIndexedSeries":
        return self._like({k: -a for k, a in self._coeffs.items()})

    def __sub__(self, other: "RadiusIndexedSeries") -> "RadiusIndexedSeries":
        if not isinstance(other, RadiusIndexedSeries):
            return NotImplemented
        return self + (-other)

    def scale(self, c: Scalar) -> "RadiusIndexedSeries":
        return self._like({k: a * c for k, a in self._coeffs.items()})

    def __mul__(self, other) -> "RadiusIndexedSeries":
        if not isinstance(other, RadiusIndexedSeries):
            if isinstance(other, (PadicScalar, int, Fraction)):
                return self.scale(other)
            return NotImplemented
        self._check_compatible(other)
        D = min(self.degree, other.degree)
        right = sorted((sum(l), l, b) for l, b in other._coeffs.items())
        out: Dict[MultiIndex, PadicScalar] = {}
        for k, a in self._coeffs.items():
            dk = sum(k)
            if dk > D:
                continue
            for dl, l, b in right:
                if dk + dl > D:
                    break
                idx = index_add(k, l)
                prev = out.get(idx)
                out[idx] = a * b if prev is None else prev + a * b
        return self._like(out, degree=D)

    def __rmul__(self, other) -> "RadiusIndexedSeries":
        if isinstance(other, (PadicScalar, int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, e: int) -> "RadiusIndexedSeries":
        result = RadiusIndexedSeries.constant(self.field, self.nvars, self.radius, self.degree, 1)
        for _ in range(e):
            result = result * self
        return result

    # -- norms -------------------------------------------------------------

    def gauss_norm(self, at_radius: Optional[int] = None) -> GaussNorm:
        """min over k of val(a_k) + m|k|, with the first index attaining it."""
        m = self.radius if at_radius is None else at_radius
        if m < self.radius:
            raise RadiusTooSmall(f"radius {m} below the series radius class {self.radius}")
        if not self._coeffs:
            return GaussNorm(AtLeast(self.field.precision), None)
        best, where = None, None
        for k, a in self.items():
            value = a.valuation() + m * sum(k)
            if best is None or value < best:
                best, where = value, k
        return GaussNorm(best, where)

    def gauss_valuation(self, at_radius: Optional[int] = None) -> Fraction:
        return self.gauss_norm(at_radius).value

    # -- operations --------------------------------------------------------

    def substitute(self, shifts: Sequence[Scalar]) -> "RadiusIndexedSeries":
        """f(T + c): exact re-expansion, so no truncation is introduced."""
        if len(shifts) != self.nvars:
            raise ShapeMismatch(f"{len(shifts)} shifts for {self.nvars} variables")
        cs = [self.field(c) if not isinstance(c, PadicScalar) else self.field.coerce(c) for c in shifts]
        for i, c in enumerate(cs):
            if c.valuation() < self.radius:
                raise ShiftTooLarge(
                    f"shift {i} has valuation {c.valuation()} < radius {self.radius}")
        powers = []
        for c in cs:
            row = [self.field.one()]
            if not c.is_zero():
                for _ in range(self.degree):
                    row.append(row[-1] * c)
            powers.append(row)

        out: Dict[MultiIndex, PadicScalar] = {}
        for k, a in self._coeffs.items():
            ranges = [
                range(ki + 1) if len(powers[i]) > 1 else range(ki, ki + 1)
                for i, ki in enumerate(k)
            ]
            for j in itertools.product(*ranges):
                factor = a * index_binomial(k, j)
                for i, (ki, ji) in enumerate(zip(k, j)):
                    if ki > ji:
                        factor = factor * powers[i][ki - ji]
                prev = out.get(j)
                out[j] = factor if prev is None else prev + factor
        return self._like(out)

    def invert(self) -> "RadiusIndexedSeries":
        """1/f by the geometric series in g = 1 - f/a_0, exact to degree D."""
        a0 = self.constant_term()
        if a0.is_zero() or a0.valuation() != 0:
            raise NonUnitConstantTerm(f"constant term {a0} is not a unit")
        n = self.radius
        for k, a in self.items():
            if any(k) and a.valuation() + n * sum(k) <= 0:
                raise DominanceViolation(
                    f"|p^(n|k|) a_k / a_0| >= 1 at k={k} (valuation {a.valuation()})")
        inv0 = a0.inverse()
        g = self._like({k: -(a * inv0) for k, a in self._coeffs.items() if any(k)})
        one = RadiusIndexedSeries.constant(self.field, self.nvars, n, self.degree, 1)
        acc = one
        for _ in range(self.degree):
            acc = one + g * acc
        return acc.scale(inv0)

    def derive(self, j: int) -> "RadiusIndexedSeries":
        """Partial derivative in direction j; accurate to degree D - 1."""
        e = unit_index(self.nvars, j)
        out = {index_sub(k, e): a * k[j] for k, a in self._coeffs.items() if k[j]}
        return self._like(out, degree=max(self.degree - 1, 0))

    def integrate(self, j: int) -> "RadiusIndexedSeries":
        """Antiderivative in direction j with zero constant of integration."""
        e = unit_index(self.nvars, j)
        out = {index_add(k, e): a.divide_by_int(k[j] + 1) for k, a in self._coeffs.items()}
        return self._like(out, degree=self.degree + 1)

    def evaluate(self, point: Sequence[Scalar], enforce_radius: bool = True) -> PadicScalar:
        """f(x) for x in the closed polydisk of radius p^(-n), at lifted precision."""
        if len(point) != self.nvars:
            raise ShapeMismatch(f"{len(point)} coordinates for {self.nvars} variables")
        field = self.field
        xs = [field(x) if not isinstance(x, PadicScalar) else field.coerce(x) for x in point]
        if enforce_radius:
            for i, x in enumerate(xs):
                if x.valuation() < self.radius:
                    raise PointOutsideRadius(
                        f"coordinate {i} has valuation {x.valuation()} < radius {self.radius}")
        if not self._coeffs:
            return field.zero()
        lowest = self.min_coefficient_valuation()
        guard = max(0, math.ceil(-lowest)) + 1
        work = field.with_precision(field.precision + guard)
        lifted = [PadicScalar(work, x.coeffs, x.shift) for x in xs]
        max_exp = [max(k[i] for k in self._coeffs) for i in range(self.nvars)]
        powers = []
        for x, top in zip(lifted, max_exp):
            row = [work.one()]
            for _ in range(top):
                row.append(row[-1] * x)
            powers.append(row)
        total = work.zero()
        for k, a in self._coeffs.items():
            term = PadicScalar(work, a.coeffs, a.shift)
            for i, ki in enumerate(k):
                if ki:
                    term = term * powers[i][ki]
            total = total + term
        return PadicScalar(field, total.coeffs, total.shift)

    def compose(self, inners: Sequence["RadiusIndexedSeries"]) -> "RadiusIndexedSeries":
        """f(g_1, ..., g_d) for inner series without constant term, truncated at min degree."""
        if len(inners) != self.nvars:
            raise ShapeMismatch(f"{len(inners)} inner series for {self.nvars} variables")
        first = inners[0]
        for g in inners:
            if g.field != self.field:
                raise MixedFields(f"{g.field} vs {self.field}")
            if g.nvars != first.nvars or g.radius != first.radius:
                raise ShapeMismatch("inner series disagree in variables or radius")
            if not g.constant_term().is_zero():
                raise ShapeMismatch("inner series must have zero constant term")
        D = min([self.degree] + [g.degree for g in inners])
        m, radius = first.nvars, first.radius
        inners = [g.truncate(D) for g in inners]
        powers: List[List[RadiusIndexedSeries]] = [
            [RadiusIndexedSeries.constant(self.field, m, radius, D, 1)] for _ in inners
        ]

        def power(var: int, e: int) -> RadiusIndexedSeries:
            row = powers[var]
            while len(row) <= e:
                row.append(row[-1] * inners[var])
            return row[e]

        def rec(terms: Dict[MultiIndex, PadicScalar], var: int) -> RadiusIndexedSeries:
            groups: Dict[int, Dict[MultiIndex, PadicScalar]] = {}
            for k, a in terms.items():
                groups.setdefault(k[0], {})[k[1:]] = a
            result = RadiusIndexedSeries.zero(self.field, m, radius, D)
            for e in sorted(groups):
                if e > D:
                    continue
                sub = groups[e]
                if var + 1 == len(inners):
                    result = result + power(var, e).scale(sub[()])
                else:
                    inner = rec(sub, var + 1)
                    result = result + (inner if e == 0 else power(var, e) * inner)
            return result

        return rec(dict(self._coeffs), 0)

    # -- comparison and text -----------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, RadiusIndexedSeries):
            return NotImplemented
        return (self.field == other.field and self.nvars == other.nvars
                and self.radius == other.radius and self._coeffs.keys() == other._coeffs.keys()
                and all(a == other._coeffs[k] for k, a in self._coeffs.items()))

    __hash__ = None

    def to_text(self) -> str:
        if not self._coeffs:
            return "0"
        parts = []
        for k, a in self.items():
            mono = monomial_text(k)
            parts.append(a.to_text() if not mono else f"{a.to_text()}*{mono}")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return (f"RadiusIndexedSeries(nvars={self.nvars}, radius={self.radius}, "
                f"degree={self.degree}, {self.to_text()})")

    @classmethod
    def from_text(cls, field: FieldDescriptor, nvars: int, radius: int, degree: int,
                  text: str) -> "RadiusIndexedSeries":
        """Parse terms "coeff*T1^a T2^b" joined by "+"; coeff is a digit list or a rational."""
        coeffs: Dict[MultiIndex, PadicScalar] = {}
        text = text.strip()
        if text in ("", "0"):
            return cls(field, nvars, radius, degree)
        for raw in text.split("+"):
            term = raw.strip()
            if not term:
                continue
            if term.startswith("T"):
                coeff_text, mono = "1", term
            elif "*" in term:
                coeff_text, mono = term.rsplit("*", 1)
            else:
                coeff_text, mono = term, ""
            coeff = field.from_text(coeff_text) if "@v" in coeff_text else field(Fraction(coeff_text.strip()))
            k = _parse_monomial(mono, nvars)
            coeffs[k] = coeffs[k] + coeff if k in coeffs else coeff
        return cls(field, nvars, radius, degree, coeffs)

    def to_dict(self) -> dict:
        return {
            "nvars": self.nvars,
            "radius": self.radius,
            "degree": self.degree,
            "terms": [{"index": list(k), "coeff": a.to_text()} for k, a in self.items()],
        }

    @classmethod
    def from_dict(cls, field: FieldDescriptor, data: dict) -> "RadiusIndexedSeries":
        coeffs = {}
        for term in data.get("terms", []):
            raw = term["coeff"]
            coeffs[tuple(term["index"])] = (
                field.from_text(raw) if isinstance(raw, str) and "@v" in raw else field(Fraction(raw)))
        return cls(field, int(data["nvars"]), int(data["radius"]), int(data["degree"]), coeffs)


_MONO_RE = re.compile(r"^T(\d+)(?:\^(\d+))?$")


def _parse_monomial(text: str, nvars: int) -> MultiIndex:
    k = [0] * nvars
    for token in text.split():
        match = _MONO_RE.match(token)
        if not match:
            raise ValueError(f"bad monomial token {token!r}")
        var = int(match.group(1)) - 1
        if not 0 <= var < nvars:
            raise BadDirection(f"variable T{var + 1} out of range for {nvars} variables")
        k[var] += int(match.group(2) or 1)
    return tuple(k)


def observed_derivation_constant(samples: Sequence[RadiusIndexedSeries], j: int) -> Fraction:
    """Largest (val(f) - val(d_j f)) / n over the samples, the constant C in the derivation bound."""
    worst = Fraction(0)
    for f in samples:
        if f.is_zero():
            continue
        df = f.derive(j)
        if df.is_zero():
            continue
        worst = max(worst, (f.gauss_valuation() - df.gauss_valuation()) / f.radius)
    return worst


class VectorSeries:
    """A vector of series sharing variables, radius and coefficient field."""

    __slots__ = ("components",)

    def __init__(self, components: Sequence[RadiusIndexedSeries]):
        if not components:
            raise ShapeMismatch("vector series need at least one component")
        first = components[0]
        for c in components[1:]:
            first._check_compatible(c)
        self.components = tuple(components)

    @classmethod
    def from_coefficients(cls, field: FieldDescriptor, nvars: int, radius: int, degree: int,
                          dimension: int,
                          coefficients: Mapping[MultiIndex, Sequence[Scalar]]) -> "VectorSeries":
        columns: List[Dict[MultiIndex, Scalar]] = [{} for _ in range(dimension)]
        for k, vec in coefficients.items():
            if len(vec) != dimension:
                raise ShapeMismatch(f"coefficient at {k} has length {len(vec)}, expected {dimension}")
            for i, a in enumerate(vec):
                columns[i][k] = a
        return cls([RadiusIndexedSeries(field, nvars, radius, degree, col) for col in columns])

    @property
    def dimension(self) -> int:
        return len(self.components)

    @property
    def field(self) -> FieldDescriptor:
        return self.components[0].field

    @property
    def nvars(self) -> int:
        return self.components[0].nvars

    @property
    def radius(self) -> int:
        return self.components[0].radius

    @property
    def degree(self) -> int:
        return min(c.degree for c in self.components)

    def coefficient(self, k: MultiIndex) -> List[PadicScalar]:
        return [c.coefficient(k) for c in self.components]

    def support(self) -> List[MultiIndex]:
        keys = set()
        for c in self.components:
            keys.update(c.support())
        return sorted(keys)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def __add__(self, other: "VectorSeries") -> "VectorSeries":
        if self.dimension != other.dimension:
            raise ShapeMismatch(f"dimension {self.dimension} vs {other.dimension}")
        return VectorSeries([a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other: "VectorSeries") -> "VectorSeries":
        if self.dimension != other.dimension:
            raise ShapeMismatch(f"dimension {self.dimension} vs {other.dimension}")
        return VectorSeries([a - b for a, b in zip(self.components, other.components)])

    def scale(self, c) -> "VectorSeries":
        return VectorSeries([a * c for a in self.components])

    def substitute(self, shifts: Sequence[Scalar]) -> "VectorSeries":
        return VectorSeries([c.substitute(shifts) for c in self.components])

    def derive(self, j: int) -> "VectorSeries":
        return VectorSeries([c.derive(j) for c in self.components])

    def min_coefficient_valuation(self) -> Fraction:
        return min(c.min_coefficient_valuation() for c in self.components)

    def gauss_valuation(self, at_radius: Optional[int] = None) -> Fraction:
        return min(c.gauss_valuation(at_radius) for c in self.components)

    def to_text(self) -> str:
        return "(" + ", ".join(c.to_text() for c in self.components) + ")"

    def __repr__(self) -> str:
        return f"VectorSeries{self.to_text()}"
