"""Sen operators of analytic matrix actions and the expansion e^(-u Theta) d.

The operator is read off a single generator gamma:

    Theta = log Mat(gamma) / log chi(gamma)

which is exact for actions of the form g -> exp(log chi(g) Theta) and agrees
with the limit of (Mat(g) - 1)/(chi(g) - 1) on every analytic action.  The
character action g -> chi(g) Id has Theta = +1.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Union

from .errors import (
    FactorialPrecisionLoss,
    LogDivergence,
    NonIntegralSpectrum,
    NotAGenerator,
    NotRankOneChart,
)
from .linalg import (
    Matrix,
    Vector,
    commutator,
    distance,
    from_rows,
    identity,
    kernel,
    mat_exp,
    mat_log,
    matmul,
    matsub,
    min_valuation,
    scale,
    to_text,
)
from .padic import (
    AtLeast,
    FieldDescriptor,
    GaloisElement,
    PadicScalar,
    base_field,
    factorial_valuation,
    plog,
)
from .orbits import AnalyticMatrixAction, GroupElement, exp_action
from .series import RadiusIndexedSeries
from .sl2 import symk_matrices, weight_spectrum


logger = logging.getLogger(__name__)


@dataclass(eq=False)
class SenDescriptor:
    """Theta for an action, with its integral spectrum when there is one."""

    theta: Matrix
    spectrum: Optional[List[int]]
    radius: int
    field: FieldDescriptor

    @property
    def dimension(self) -> int:
        return len(self.theta)

    def to_dict(self) -> dict:
        return {
            "theta": [[x.to_text() for x in row] for row in self.theta],
            "spectrum": self.spectrum,
            "radius": self.radius,
        }


@dataclass(eq=False)
class IotaExpansion:
    """Coefficients C_j = (-Theta)^j / j! . d of e^(-u Theta) d, for j = 0..D."""

    coefficients: List[Matrix]
    radius: int

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def constant_term(self) -> Matrix:
        """delta^(0), the constant coefficient in u."""
        return self.coefficients[0]

    def series(self) -> List[List[RadiusIndexedSeries]]:
        """Entrywise series in u."""
        first = self.coefficients[0]
        fld = first[0][0].parent
        rows, cols = len(first), len(first[0])
        return [[RadiusIndexedSeries(fld, 1, self.radius, self.degree,
                                     {(j,): c[a][b] for j, c in enumerate(self.coefficients)})
                 for b in range(cols)] for a in range(rows)]

    def to_dict(self) -> dict:
        return {"radius": self.radius, "coefficients": [to_text(c) for c in self.coefficients]}


def _character_of(gamma: Union[GaloisElement, int]) -> int:
    return gamma.exponent if isinstance(gamma, GaloisElement) else int(gamma)


def sen_operator(action: AnalyticMatrixAction, gamma: Union[GaloisElement, int],
                 radius: Optional[int] = None) -> SenDescriptor:
    """Theta = log Mat(gamma) / log chi(gamma).

    Args:
        action: An action on a rank-one (cyclotomic) chart.
        gamma: The generator, or its character value.
        radius: Exact radius class of gamma, val(chi(gamma) - 1); when
            omitted any class at or inside the action's radius is accepted.

    Raises:
        NotAGenerator: chi(gamma) = 1, chi(gamma) lies outside the action's
            radius, or val(chi(gamma) - 1) differs from ``radius``.
        NotRankOneChart: the action is not on a one-dimensional chart.
        LogDivergence: Mat(gamma) is not congruent to Id mod p^n.
    """
    if action.chart_dim != 1:
        raise NotRankOneChart(f"Sen operators need a rank-one chart, got {action.chart_dim}")
    fld = action.field
    p = fld.p
    chi = _character_of(gamma) % p ** fld.precision
    base = base_field(p, fld.precision)
    gap = base(chi) - 1
    if gap.is_zero():
        raise NotAGenerator("chi(gamma) = 1 to precision, gamma generates nothing")
    n = int(gap.valuation())
    if n < action.radius:
        raise NotAGenerator(f"val(chi(gamma) - 1) = {n} < radius {action.radius}")
    if radius is not None and n != radius:
        raise NotAGenerator(f"val(chi(gamma) - 1) = {n}, expected exactly {radius}")

    g = GroupElement.from_character(fld, chi)
    mat = action.matrix(g)
    closeness = min_valuation(matsub(mat, identity(fld, len(mat))))
    if not isinstance(closeness, AtLeast) and closeness < n:
        raise LogDivergence(f"Mat(gamma) - Id has valuation {closeness} < {n}")
    ell = fld.coerce(plog(base(chi)))
    theta = scale(mat_log(mat), ell.inverse())
    try:
        spectrum = weight_spectrum(theta, precision_slack=n + 1)
    except NonIntegralSpectrum:
        spectrum = None
    logger.debug(f"sen_operator: chi={chi}, radius {n}, spectrum {spectrum}")
    return SenDescriptor(theta=theta, spectrum=spectrum, radius=n, field=fld)


def iota(d: Matrix, theta: SenDescriptor, degree: int) -> IotaExpansion:
    """e^(-u Theta) d truncated at u^degree.

    Raises:
        FactorialPrecisionLoss: degree >= p*N, where 1/D! eats every digit.
    """
    fld = theta.field
    p, N = fld.p, fld.precision
    if degree >= p * N:
        raise FactorialPrecisionLoss(f"D = {degree} >= p*N = {p * N}")
    d = [[fld(x) for x in row] for row in d]
    work = fld.with_precision(N + factorial_valuation(degree, p))
    minus_theta = [[-PadicScalar(work, x.coeffs, x.shift) for x in row] for row in theta.theta]
    current = [[PadicScalar(work, x.coeffs, x.shift) for x in row] for row in d]
    coefficients = []
    for j in range(degree + 1):
        coefficients.append([[PadicScalar(fld, x.coeffs, x.shift) for x in row] for row in current])
        current = [[x.divide_by_int(j + 1) for x in row] for row in matmul(minus_theta, current)]
    return IotaExpansion(coefficients=coefficients, radius=theta.radius)


def sen_kernel(theta: SenDescriptor) -> List[Vector]:
    """Basis of ker Theta, each vector normalized to lead with 1."""
    return kernel(theta.theta)


def one_param(a: Matrix, t) -> Matrix:
    """exp(t a); needs val(t a) > 1/(p-1)."""
    fld = a[0][0].parent
    return mat_exp(scale(a, fld(t)))


def difference_quotient(action: AnalyticMatrixAction, gamma: Union[GaloisElement, int]) -> Matrix:
    """(Mat(gamma) - Id) / (chi(gamma) - 1), the finite stage of the derivative at 1."""
    fld = action.field
    chi = _character_of(gamma)
    mat = action.matrix(GroupElement.from_character(fld, chi))
    gap = fld(chi) - 1
    if gap.is_zero():
        raise NotAGenerator("chi(gamma) = 1 to precision")
    return scale(matsub(mat, identity(fld, action.dimension)), gap.inverse())


def commutator_defect(theta: SenDescriptor, action: AnalyticMatrixAction,
                      samples: Sequence[GroupElement]) -> Fraction:
    """Least valuation of [Theta, Mat(g)] over the sampled g."""
    worst = AtLeast(theta.field.precision)
    for g in samples:
        worst = min(worst, min_valuation(commutator(theta.theta, action.matrix(g))))
    return worst


def commutes_with_action(theta: SenDescriptor, action: AnalyticMatrixAction,
                         samples: Sequence[GroupElement], digits: Optional[int] = None) -> bool:
    """[Theta, Mat(g)] = 0 to ``digits`` (default N - 2 - radius) for every sample."""
    if digits is None:
        digits = theta.field.precision - 2 - theta.radius
    return commutator_defect(theta, action, samples) >= digits


def expected_symk_spectrum(s, k: int) -> List:
    return sorted(s * (2 * i - k) for i in range(k + 1))


def sen_spectrum_symk(s, k: int, field: Optional[FieldDescriptor] = None,
                      precision: int = 20, p: int = 5) -> List:
    """Spectrum of Theta for g -> exp(log chi(g) s H) on Sym^k.

    The action is built over Q_p on the smallest radius where the
    exponential converges, and Theta is extracted from gamma with
    chi(gamma) = 1 + p^radius.
    """
    fld = field if field is not None else base_field(p, precision)
    rep = symk_matrices(k)
    h = from_rows(fld, [[int(rep.h[i, j]) for j in range(rep.dimension)]
                        for i in range(rep.dimension)])
    theta0 = scale(h, fld(s))
    radius = 1 if fld.p > 2 else 2
    action = exp_action(theta0, radius)
    descriptor = sen_operator(action, 1 + fld.p ** radius)
    if descriptor.spectrum is None:
        raise NonIntegralSpectrum(f"Theta for Sym^{k} with s={s} has no integral spectrum")
    logger.debug(f"Sym^{k}, s={s}: spectrum {descriptor.spectrum}, "
                 f"theta agrees with s*H to {distance(descriptor.theta, theta0)}")
    return descriptor.spectrum
