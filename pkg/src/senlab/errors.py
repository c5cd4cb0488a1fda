"""Exception hierarchy for senlab.

Every error named by an operation has its own class so callers (and the CLI's
exit-code mapping) can tell them apart.
"""


class SenlabError(Exception):
    """Root of every error raised by senlab."""


# padic_core

class PadicError(SenlabError):
    """Errors from fixed-precision field arithmetic."""


class InvalidField(PadicError):
    """A field descriptor failed validation (prime, polynomial, precision)."""


class MixedFields(PadicError):
    """Operands live in different fields (or at different precisions)."""


class DivisionByZeroToPrecision(PadicError):
    """Divisor is zero to working precision."""


class ZeroArgument(PadicError):
    """Logarithm of an element that is zero to working precision."""


class ConvergenceViolation(PadicError):
    """Exponential series outside its disk of convergence."""


class UnsupportedField(PadicError):
    """The field kind carries no data for the requested operation."""


class LevelMismatch(PadicError):
    """Cyclotomic levels are incompatible for the requested trace or embedding."""


# restricted_series

class SeriesError(SenlabError):
    """Errors from truncated multi-index power series."""


class ShapeMismatch(SeriesError):
    """Series disagree in number of variables, radius or coefficient field."""


class TruncationTooDeep(SeriesError):
    """Truncation degree D >= p*N would divide away all precision."""


class RadiusTooSmall(SeriesError):
    """Gauss norm requested below the radius class of the series."""


class ShiftTooLarge(SeriesError):
    """Substitution shift leaves the radius class of the series."""


class NonUnitConstantTerm(SeriesError):
    """Series inversion needs a unit constant term."""


class DominanceViolation(SeriesError):
    """Tail of the series is not strictly dominated by its constant term."""


class BadDirection(SeriesError):
    """Variable or chart direction out of range."""


class PointOutsideRadius(SeriesError):
    """Evaluation point outside the closed polydisk of the series."""


# orbit_calculus

class OrbitError(SenlabError):
    """Errors from analytic orbit expansions and group actions."""


class RadiusViolation(OrbitError):
    """Group element does not lie in the subgroup attached to the radius."""


class NotAGenerator(OrbitError):
    """Character value is not a topological generator of 1 + p^n Z_p."""


class NotRankOneChart(OrbitError):
    """Operation needs a one-dimensional chart."""


class DecayViolation(OrbitError):
    """Orbit coefficients decay too slowly for the requested radius."""


# lubin_tate

class LubinTateError(SenlabError):
    """Errors from Lubin-Tate formal group computations."""


class NotAFrobeniusLift(LubinTateError):
    """Series is not congruent to pi*T mod degree 2 and T^q mod pi."""


class DegreeOverflow(LubinTateError):
    """Requested truncation degree cannot be carried at this precision."""


class NotIntegral(LubinTateError):
    """Scalar is not in the ring of integers."""


class PrecisionTooLow(LubinTateError):
    """Precision cannot absorb the denominators of the formal logarithm."""


class DegreeTooSmallForLevel(LubinTateError):
    """Truncation degree below q^n for a level-n torsion computation."""


class NotAUnit(LubinTateError):
    """Scalar is not a unit of the ring of integers."""


class NotPrincipalUnit(LubinTateError):
    """Unit is not congruent to 1 modulo p^n."""


class NotInMaximalIdeal(LubinTateError):
    """Torsion approximation does not have positive valuation."""


# sl2_rep

class Sl2Error(SenlabError):
    """Errors from sl2 representation machinery."""


class NonIntegralSpectrum(Sl2Error):
    """Characteristic polynomial does not split with integer roots."""


class NotDetOne(Sl2Error):
    """Matrix does not have determinant 1 to precision."""


class EvenPrimeUnsupported(Sl2Error):
    """Operation divides by 2 and needs an odd prime."""


class NonUnitDelta(Sl2Error):
    """The scalar delta of the coordinate algebra must be a unit."""


class RelationsViolated(Sl2Error):
    """Matrices do not satisfy the sl2 bracket relations."""


class NonSemisimpleInput(Sl2Error):
    """Weight-space dimensions are inconsistent with a semisimple module."""


# sen_calculus

class SenError(SenlabError):
    """Errors from Sen-operator computations."""


class LogDivergence(SenError):
    """Matrix logarithm series does not converge."""


class FactorialPrecisionLoss(SenError):
    """Truncation degree would divide away all precision through j!."""


# cli

class CliError(SenlabError):
    """Errors from the command-line front end."""


class UnknownSuite(CliError):
    """Suite selector is not one of the known suites."""


class ParseError(CliError):
    """Input file is not valid JSON or misses required fields."""
