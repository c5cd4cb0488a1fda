"""Lubin-Tate formal groups over finite extensions F of Q_p.

The group law, the endomorphisms [a] and the formal logarithm are solved
degree by degree.  With E_r the degree-r part of f(S_<r) - S_<r(f(X_1), ...),
the commuting condition f∘S = S∘f forces

    S_r = E_r / (pi^r - pi)

and pi^r - pi has the valuation of pi, so the recursion loses nothing as long
as the working precision carries one spare digit.
"""

import logging
import threading
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import (
    DegreeOverflow,
    DegreeTooSmallForLevel,
    NotAFrobeniusLift,
    NotAUnit,
    NotInMaximalIdeal,
    NotIntegral,
    NotPrincipalUnit,
    PrecisionTooLow,
    UnsupportedField,
)
from .models import FieldKind, LiftKind
from .padic import (
    FieldDescriptor,
    GaloisElement,
    PadicScalar,
    field_norm,
    galois_act,
    ilog,
    plog,
)
from .series import RadiusIndexedSeries, binomial


logger = logging.getLogger(__name__)

Polynomial = List[PadicScalar]

# digits of headroom for the degree-by-degree solver
SOLVER_GUARD = 2


# -- polynomials -----------------------------------------------------------


def _poly_trim(a: Polynomial) -> Polynomial:
    while len(a) > 1 and a[-1].is_zero():
        a.pop()
    return a


def _poly_mul(a: Polynomial, b: Polynomial) -> Polynomial:
    out = [a[0].parent.zero() for _ in range(len(a) + len(b) - 1)]
    for i, x in enumerate(a):
        if x.is_zero():
            continue
        for j, y in enumerate(b):
            if not y.is_zero():
                out[i + j] = out[i + j] + x * y
    return _poly_trim(out)


def _poly_add(a: Polynomial, b: Polynomial) -> Polynomial:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, y in enumerate(b):
        out[i] = out[i] + y
    return _poly_trim(out)


def _poly_compose(outer: Polynomial, inner: Polynomial) -> Polynomial:
    """outer(inner(T)) by Horner's rule."""
    result = [outer[-1]]
    for c in reversed(outer[:-1]):
        result = _poly_add(_poly_mul(result, inner), [c])
    return result


def newton_slopes(coeffs: Sequence[PadicScalar]) -> List[Tuple[Fraction, int]]:
    """Root valuations of a polynomial with their multiplicities.

    Reads the lower convex hull of the points (i, val(c_i)) from left to
    right; a segment of slope s and width w carries w roots of valuation -s.
    Coefficients zero to precision are left out of the hull.
    """
    points = [(i, c.valuation()) for i, c in enumerate(coeffs) if not c.is_zero()]
    if len(points) < 2:
        return []
    hull: List[Tuple[int, Fraction]] = []
    for pt in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point when it lies on or above the chord
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    slopes = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        slopes.append((-Fraction(y2 - y1) / (x2 - x1), x2 - x1))
    return slopes


# -- models ----------------------------------------------------------------


@dataclass(frozen=True)
class TorsionSlope:
    """A root valuation of the torsion polynomial and how many roots carry it."""

    slope: Fraction
    multiplicity: int

    def to_dict(self) -> dict:
        return {"slope": str(self.slope), "multiplicity": self.multiplicity}

    @classmethod
    def from_dict(cls, data: dict) -> "TorsionSlope":
        return cls(slope=Fraction(data["slope"]), multiplicity=int(data["multiplicity"]))


@dataclass(eq=False)
class LTFormalGroup:
    """The Lubin-Tate formal group attached to (F, pi, f).

    Treat instances as immutable once ``lt_build`` returns them.
    """

    base: FieldDescriptor
    uniformizer: PadicScalar
    q: int
    lift: LiftKind
    frobenius_lift: Polynomial
    group_law: RadiusIndexedSeries
    degree: int
    _endomorphisms: Dict[Tuple, "LTEndomorphism"] = field(default_factory=dict, repr=False)
    _endomorphisms_lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def frobenius_series(self, degree: Optional[int] = None) -> RadiusIndexedSeries:
        """f(T) as a one-variable series at the group's truncation degree."""
        D = self.degree if degree is None else degree
        coeffs = {(i,): c for i, c in enumerate(self.frobenius_lift) if i <= D}
        return RadiusIndexedSeries(self.base, 1, 1, D, coeffs)

    def endomorphism(self, a) -> "LTEndomorphism":
        """[a], memoized per value of a.

        Suite workers share one group, so the memo is read and filled under a lock.
        """
        a = self.base(a)
        key = (a.coeffs, a.shift)
        with self._endomorphisms_lock:
            endo = self._endomorphisms.get(key)
            if endo is None:
                endo = lt_endo(self, a)
                self._endomorphisms[key] = endo
        return endo

    def to_dict(self) -> dict:
        return {
            "field": self.base.to_dict(),
            "pi": self.uniformizer.to_text(),
            "q": self.q,
            "lift": self.lift.value,
            "f": [c.to_text() for c in self.frobenius_lift],
            "D": self.degree,
            "group_law": self.group_law.to_dict(),
        }


@dataclass(eq=False)
class LTEndomorphism:
    """[a](T), the unique endomorphism with linear term aT."""

    a: PadicScalar
    series: RadiusIndexedSeries

    def to_dict(self) -> dict:
        return {"a": self.a.to_text(), "series": self.series.to_text()}


@dataclass(frozen=True)
class EmbeddingSet:
    """The embeddings of an unramified F: Frobenius powers 0..h-1."""

    field: FieldDescriptor
    powers: Tuple[int, ...]

    @classmethod
    def for_field(cls, F: FieldDescriptor) -> "EmbeddingSet":
        if F.kind is FieldKind.BASE:
            return cls(F, (0,))
        if F.kind is FieldKind.UNRAMIFIED:
            return cls(F, tuple(range(F.f)))
        # ramified Galois F would need an embedding action on its own polynomial
        raise UnsupportedField(f"embeddings are implemented for unramified fields, not {F}")

    @property
    def size(self) -> int:
        return len(self.powers)

    @property
    def identity(self) -> int:
        return 0

    def compose(self, i: int, j: int) -> int:
        """Index of tau_i ∘ tau_j."""
        return (self.powers[i] + self.powers[j]) % self.size

    def apply(self, i: int, x: PadicScalar) -> PadicScalar:
        if self.field.kind is FieldKind.BASE:
            return x
        return galois_act(GaloisElement(self.field, self.powers[i]), x)


# -- construction ----------------------------------------------------------


def _standard_lift(base: FieldDescriptor, pi: PadicScalar, q: int) -> Polynomial:
    coeffs = [base.zero() for _ in range(q + 1)]
    coeffs[1] = pi
    coeffs[q] = base.one()
    return coeffs


def _multiplicative_lift(base: FieldDescriptor) -> Polynomial:
    p = base.p
    return [base(binomial(p, i) if i else 0) for i in range(p + 1)]


def _check_lift(f: Polynomial, pi: PadicScalar, q: int) -> None:
    """f ≡ pi T mod degree 2 and f ≡ T^q mod pi."""
    if not f[0].is_zero():
        raise NotAFrobeniusLift(f"f has constant term {f[0]}")
    if len(f) < 2 or f[1] != pi:
        raise NotAFrobeniusLift(f"linear coefficient of f is not pi = {pi}")
    vpi = pi.valuation()
    for i, c in enumerate(f[2:], start=2):
        target = c - 1 if i == q else c
        if not target.is_zero() and target.valuation() < vpi:
            raise NotAFrobeniusLift(f"f is not T^q modulo pi at degree {i}")
    if len(f) <= q:
        raise NotAFrobeniusLift(f"f has degree {len(f) - 1} < q = {q}")


def _solve_commuting(f_series: RadiusIndexedSeries, initial: RadiusIndexedSeries,
                     pi: PadicScalar) -> RadiusIndexedSeries:
    """The series S ≡ initial mod degree 2 with f(S) = S(f(X_1), ..., f(X_n))."""
    field = initial.field
    nvars, degree = initial.nvars, initial.degree
    f_of_vars = [
        f_series.compose([RadiusIndexedSeries.variable(field, nvars, 1, degree, j)])
        for j in range(nvars)
    ]
    solution = initial
    for r in range(2, degree + 1):
        partial = solution.truncate(r)
        lhs = f_series.truncate(r).compose([partial])
        rhs = partial.compose([g.truncate(r) for g in f_of_vars])
        error = (lhs - rhs).homogeneous_part(r)
        if error.is_zero():
            continue
        denominator = (pi ** r - pi).inverse()
        update = RadiusIndexedSeries(field, nvars, 1, degree,
                                     {k: a * denominator for k, a in error.items()})
        solution = solution + update
        logger.debug(f"solver: degree {r}, {len(error.support())} new terms")
    return solution


def lt_build(
    base: FieldDescriptor,
    uniformizer: Optional[PadicScalar] = None,
    f_series: Optional[Union[Sequence, Mapping[int, object]]] = None,
    degree: int = 12,
    lift: LiftKind = LiftKind.STANDARD,
) -> LTFormalGroup:
    """Solve the Lubin-Tate group law F(X, Y) to the given degree.

    Args:
        base: The field F.
        uniformizer: pi_F; defaults to ``base.uniformizer()``.
        f_series: Coefficients of a custom Frobenius lift (list from the
            constant term up, or a degree -> coefficient mapping).  Selects
            ``LiftKind.CUSTOM``.
        degree: Truncation degree D.
        lift: Built-in lift when no coefficients are given.

    Raises:
        NotAFrobeniusLift: pi is not a uniformizer or f is not a lift of Frobenius.
        DegreeOverflow: D leaves no precision or cannot see the T^q term.
    """
    pi = base.uniformizer() if uniformizer is None else base(uniformizer)
    if pi.is_zero() or pi.valuation() != Fraction(1, base.e):
        raise NotAFrobeniusLift(f"{pi} is not a uniformizer of {base}")
    q = base.residue_cardinality

    if f_series is not None:
        lift = LiftKind.CUSTOM
        items = f_series.items() if isinstance(f_series, Mapping) else enumerate(f_series)
        entries = {int(i): base(c) for i, c in items}
        f = [entries.get(i, base.zero()) for i in range(max(entries) + 1)]
    elif lift is LiftKind.MULTIPLICATIVE:
        if base.kind is not FieldKind.BASE or pi != base.p:
            raise NotAFrobeniusLift("the multiplicative lift needs F = Q_p and pi = p")
        f = _multiplicative_lift(base)
    else:
        f = _standard_lift(base, pi, q)
    f = _poly_trim(f)
    _check_lift(f, pi, q)

    if degree >= base.p * base.precision:
        raise DegreeOverflow(f"D = {degree} >= p*N = {base.p * base.precision}")
    if degree < q:
        raise DegreeOverflow(f"D = {degree} is below q = {q}, the lift's leading degree")

    work = base.with_precision(base.precision + SOLVER_GUARD)
    pi_w = work.coerce(pi)
    f_w = RadiusIndexedSeries(work, 1, 1, degree,
                              {(i,): work.coerce(c) for i, c in enumerate(f) if i <= degree})
    initial = (RadiusIndexedSeries.variable(work, 2, 1, degree, 0)
               + RadiusIndexedSeries.variable(work, 2, 1, degree, 1))
    law = _solve_commuting(f_w, initial, pi_w)
    law = RadiusIndexedSeries(base, 2, 1, degree, {k: base.coerce(a) for k, a in law.items()})
    logger.info(f"Lubin-Tate group over {base.kind.value} (q={q}, lift={lift.value}) "
                f"solved to degree {degree}")
    return LTFormalGroup(base=base, uniformizer=pi, q=q, lift=lift,
                         frobenius_lift=f, group_law=law, degree=degree)


def lt_endo(G: LTFormalGroup, a) -> LTEndomorphism:
    """[a](T) for a in O_F, solved like the group law."""
    a = G.base(a)
    if not a.is_zero() and a.valuation() < 0:
        raise NotIntegral(f"{a} is not in O_F")
    base, D = G.base, G.degree
    work = base.with_precision(base.precision + SOLVER_GUARD)
    f_w = RadiusIndexedSeries(work, 1, 1, D, {k: work.coerce(c) for k, c in G.frobenius_series().items()})
    initial = RadiusIndexedSeries(work, 1, 1, D, {(1,): work.coerce(a)})
    series = _solve_commuting(f_w, initial, work.coerce(G.uniformizer))
    series = RadiusIndexedSeries(base, 1, 1, D, {k: base.coerce(c) for k, c in series.items()})
    return LTEndomorphism(a=a, series=series)


def lt_log(G: LTFormalGroup) -> RadiusIndexedSeries:
    """log_F(T) = ∫ dT / ∂_Y F(T, 0), normalized by log_F(T) ≡ T."""
    base, D = G.base, G.degree
    if ilog(D, base.p) >= base.precision:
        raise PrecisionTooLow(
            f"precision {base.precision} cannot absorb the denominators up to {D}")
    g = RadiusIndexedSeries(
        base, 1, 1, D - 1,
        {(i,): c for (i, j), c in G.group_law.items() if j == 1 and i <= D - 1},
    )
    return g.invert().integrate(0)


def group_law_defects(G: LTFormalGroup) -> Dict[str, Fraction]:
    """Valuation of the failure of each axiom; AtLeast(N) means exact."""
    base, D, law = G.base, G.degree, G.group_law

    def var(n, j):
        return RadiusIndexedSeries.variable(base, n, 1, D, j)

    X, Y = var(2, 0), var(2, 1)
    swapped = law.compose([Y, X])
    neutral = law.compose([var(1, 0), RadiusIndexedSeries.zero(base, 1, 1, D)]) - var(1, 0)
    X3, Y3, Z3 = var(3, 0), var(3, 1), var(3, 2)
    left = law.compose([law.compose([X3, Y3]), Z3])
    right = law.compose([X3, law.compose([Y3, Z3])])
    f = G.frobenius_series()
    f_x, f_y = f.compose([X]), f.compose([Y])
    return {
        "commutativity": (law - swapped).min_coefficient_valuation(),
        "neutral": neutral.min_coefficient_valuation(),
        "associativity": (left - right).min_coefficient_valuation(),
        "frobenius": (f.compose([law]) - law.compose([f_x, f_y])).min_coefficient_valuation(),
    }


# -- torsion ---------------------------------------------------------------


def torsion_polynomial(G: LTFormalGroup, level: int) -> Polynomial:
    """[pi^level](T) = f∘...∘f as an exact polynomial of degree q^level."""
    base = G.base
    result = [base.zero(), base.one()]
    for _ in range(level):
        result = _poly_compose(G.frobenius_lift, result)
    return result


def lt_torsion_slopes(G: LTFormalGroup, level: int,
                      degree: Optional[int] = None) -> List[TorsionSlope]:
    """Valuations of the points of exact order pi^level, from Newton polygons.

    The new roots at level n are those of [pi^n] not already roots of
    [pi^(n-1)], so the slope multiset of [pi^(n-1)](T)/T is removed from
    that of [pi^n](T)/T.
    """
    if level < 1:
        raise ValueError(f"torsion level must be at least 1, got {level}")
    needed = G.q ** level
    if degree is not None and degree < needed:
        raise DegreeTooSmallForLevel(f"level {level} needs degree {needed}, got {degree}")
    current = Counter()
    for slope, width in newton_slopes(torsion_polynomial(G, level)[1:]):
        current[slope] += width
    previous = Counter()
    for slope, width in newton_slopes(torsion_polynomial(G, level - 1)[1:]):
        previous[slope] += width
    current.subtract(previous)
    return [TorsionSlope(s, m) for s, m in sorted(current.items(), reverse=True) if m > 0]


# -- characters ------------------------------------------------------------


def char_act_precision(G: LTFormalGroup, t: PadicScalar) -> Fraction:
    """Digits of [a](t) guaranteed by truncating [a] at degree D."""
    return min(Fraction(t.parent.precision), (G.degree + 1) * t.valuation())


def lt_char_act(G: LTFormalGroup, a, t: PadicScalar) -> PadicScalar:
    """Act on a torsion approximation t by the unit a: returns [a](t).

    Raises:
        NotAUnit: a is not a unit of O_F.
        NotInMaximalIdeal: t is nonzero with valuation <= 0.
    """
    a = G.base(a)
    if not a.is_unit():
        raise NotAUnit(f"{a} is not a unit of O_F")
    if t.is_zero():
        return t
    if t.valuation() <= 0:
        raise NotInMaximalIdeal(f"t must have positive valuation, got {t.valuation()}")
    series = G.endomorphism(a).series
    target = t.parent
    acc = target.zero()
    for i in range(series.degree, 0, -1):
        acc = (acc + target.coerce(series.coefficient((i,)))) * t
    return acc


def norm_character(G: LTFormalGroup, a) -> PadicScalar:
    """chi(g) = N_{F/Q_p}(chi_F(g)) for chi_F(g) = a."""
    return field_norm(G.base(a))


def embedding_chart(E: EmbeddingSet, g, radius: int) -> List[PadicScalar]:
    """Coordinates (tau(log g))_tau of a principal unit g of O_F."""
    g = E.field(g)
    diff = g - 1
    if not diff.is_zero() and diff.valuation() < radius:
        raise NotPrincipalUnit(f"val(g - 1) = {diff.valuation()} < {radius}")
    log_g = plog(g) if not diff.is_zero() else E.field.zero()
    return [E.apply(i, log_g) for i in range(E.size)]
