"""Tests for p-adic fields and scalars."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from senlab.errors import (
    ConvergenceViolation,
    DivisionByZeroToPrecision,
    InvalidField,
    LevelMismatch,
    MixedFields,
    UnsupportedField,
    ZeroArgument,
)
from senlab.models import FieldKind
from senlab.padic import (
    AtLeast,
    FieldDescriptor,
    GaloisElement,
    base_field,
    conjugate_average,
    cyclotomic_field,
    embed_from_level,
    factorial_valuation,
    field_norm,
    galois_group,
    ilog,
    normalized_trace,
    pexp,
    plog,
    precision_from_uniformizer_digits,
    rational_reconstruction,
    teichmuller,
    unramified_field,
    user_field,
    vp,
)


N = 20


@pytest.fixture
def qp():
    """Q_5 at 20 digits."""
    return base_field(5, N)


@pytest.fixture
def k1():
    """Q_5(zeta_5)."""
    return cyclotomic_field(5, 1, N)


@pytest.fixture
def q25():
    """The unramified quadratic extension of Q_5."""
    return unramified_field(5, 2, N)


@pytest.fixture
def rng():
    return random.Random(1234)


class TestIntegerHelpers:
    """Test valuation helpers on integers."""

    def test_vp(self):
        """Test valuations of integers."""
        assert vp(50, 5) == 2
        assert vp(7, 5) == 0
        with pytest.raises(ValueError):
            vp(0, 5)

    def test_ilog(self):
        """Test the integer logarithm."""
        assert ilog(1, 5) == 0
        assert ilog(24, 5) == 1
        assert ilog(25, 5) == 2

    def test_factorial_valuation(self):
        """Test Legendre's formula."""
        assert factorial_valuation(4, 5) == 0
        assert factorial_valuation(25, 5) == 6
        assert factorial_valuation(10, 2) == 8


class TestFieldDescriptor:
    """Test field construction and validation."""

    def test_base_field(self, qp):
        """Test Q_p structure."""
        assert qp.degree == 1
        assert (qp.e, qp.f) == (1, 1)
        assert qp.kind is FieldKind.BASE

    def test_non_prime_rejected(self):
        """Test that composite p is rejected."""
        with pytest.raises(InvalidField):
            base_field(4, N)

    def test_zero_precision_rejected(self):
        """Test that precision below 1 is rejected."""
        with pytest.raises(InvalidField):
            base_field(5, 0)

    def test_cyclotomic_field(self, k1):
        """Test Q_5(zeta_5) is totally ramified of degree 4."""
        assert k1.degree == 4
        assert (k1.e, k1.f) == (4, 1)
        assert k1.uniformizer().valuation() == Fraction(1, 4)

    def test_unramified_field(self, q25):
        """Test the unramified quadratic extension."""
        assert q25.degree == 2
        assert (q25.e, q25.f) == (1, 2)
        assert q25.residue_cardinality == 25

    def test_unramified_degree_one_is_base(self, qp):
        """Test that degree one gives Q_p itself."""
        assert unramified_field(5, 1, N) is qp

    def test_unramified_needs_irreducible_polynomial(self):
        """Test that a reducible polynomial is rejected."""
        with pytest.raises(InvalidField):
            unramified_field(5, (-1, 0, 1), N)  # X^2 - 1

    def test_user_eisenstein_field(self):
        """Test a ramified user field."""
        fld = user_field(5, (5, 0, 1), N)  # X^2 + 5
        assert (fld.e, fld.f) == (2, 1)
        assert fld.uniformizer().valuation() == Fraction(1, 2)

    def test_descriptors_are_shared(self, qp):
        """Test that equal parameters give the same descriptor."""
        assert base_field(5, N) is qp
        assert FieldDescriptor.from_dict(qp.to_dict()) == qp

    def test_from_dict_round_trip(self, k1):
        """Test dictionary serialization."""
        assert FieldDescriptor.from_dict(k1.to_dict()) == k1

    def test_uniformizer_precision(self, qp, k1):
        """Test N powers of p are e*N powers of the uniformizer."""
        assert qp.uniformizer_precision == N
        assert k1.uniformizer_precision == 4 * N
        pi = k1.uniformizer()
        assert not (pi ** (4 * N - 1)).is_zero()
        assert (pi ** (4 * N)).is_zero()

    def test_precision_from_uniformizer_digits(self, k1):
        """Test uniformizer digits round up to whole powers of p."""
        assert precision_from_uniformizer_digits(80, 4) == 20
        assert precision_from_uniformizer_digits(81, 4) == 21
        data = {"p": 5, "kind": "cyclotomic", "level": 1, "uniformizer_precision": 4 * N}
        assert FieldDescriptor.from_dict(data) is k1
        with pytest.raises(InvalidField):
            precision_from_uniformizer_digits(0, 4)


class TestScalarArithmetic:
    """Test PadicScalar arithmetic and valuations."""

    def test_valuations(self, qp):
        """Test valuations of integers and rationals."""
        assert qp(25).valuation() == 2
        assert qp(7).valuation() == 0
        assert qp(Fraction(1, 5)).valuation() == -1

    def test_zero_to_precision(self, qp):
        """Test that p^N is zero to precision with an AtLeast valuation."""
        x = qp(5 ** N)
        assert x.is_zero()
        assert isinstance(x.valuation(), AtLeast)
        assert x.valuation() == N

    def test_rational_coercion(self, qp):
        """Test that 1/3 times 3 is exactly 1."""
        assert qp(Fraction(1, 3)) * 3 == 1

    def test_unit_inverse_exact(self, qp, rng):
        """Test that unit inverses are exact."""
        for _ in range(20):
            x = qp.random_unit(rng)
            assert x * x.inverse() == 1

    def test_inverse_in_extension(self, k1, rng):
        """Test inverses of non-units in a ramified field."""
        x = k1.random_unit(rng) * k1.uniformizer() ** 3
        assert (x * x.inverse()).agrees_with(1, N - 2)

    def test_unramified_valuations(self, q25):
        """Test theta is a unit and valuations stay integral in an unramified field."""
        theta = q25.gen()
        assert theta.valuation() == 0
        assert theta.is_unit()
        assert (theta * 25 + 5).valuation() == 1
        assert (theta * 125).valuation() == 3
        assert user_field(5, (2, 0, 1), N).gen().valuation() == 0  # X^2 + 2, irreducible mod 5

    def test_inverse_in_unramified_field(self, q25, rng):
        """Test inverses of 2*theta and of non-units in an unramified field."""
        x = q25.gen() * 2
        assert x * x.inverse() == 1
        for _ in range(10):
            y = q25.random_unit(rng) * 5
            assert (y * y.inverse()).agrees_with(1, N - 2)
            assert y.inverse().valuation() == -1

    def test_division_by_zero(self, qp):
        """Test division by zero to precision."""
        with pytest.raises(DivisionByZeroToPrecision):
            qp.zero().inverse()
        with pytest.raises(DivisionByZeroToPrecision):
            qp.one().divide_by_int(0)

    def test_mixed_fields(self, qp):
        """Test that elements of different fields do not combine."""
        with pytest.raises(MixedFields):
            qp(1) + base_field(7, N)(1)

    def test_base_scalars_coerce_into_extensions(self, qp, k1):
        """Test coercion of Q_p scalars into an extension."""
        assert k1.coerce(qp(3)) == k1(3)

    def test_text_form(self):
        """Test the canonical digit list."""
        assert base_field(5, 3)(7).to_text() == "[2,1,0]@v0"

    def test_text_round_trip(self, qp, k1, rng):
        """Test parsing the canonical text form."""
        for fld in (qp, k1):
            x = fld.random_element(rng, valuation=-1)
            assert fld.from_text(x.to_text()) == x

    def test_text_rejects_wrong_valuation(self):
        """Test that a stated valuation must match the digits."""
        with pytest.raises(ValueError):
            base_field(5, 3).from_text("[2,1,0]@v1")

    @given(st.integers(min_value=1, max_value=10 ** 12), st.integers(min_value=1, max_value=10 ** 12))
    def test_ultrametric(self, a, b):
        """Test val(a + b) >= min(val a, val b)."""
        fld = base_field(5, N)
        assert fld(a + b).valuation() >= min(fld(a).valuation(), fld(b).valuation())

    @given(st.integers(min_value=1, max_value=10 ** 6), st.integers(min_value=1, max_value=10 ** 6))
    def test_valuation_multiplicative(self, a, b):
        """Test val(ab) = val(a) + val(b) away from the precision cap."""
        fld = base_field(5, N)
        assert fld(a * b).valuation() == vp(a, 5) + vp(b, 5)


class TestAnalyticFunctions:
    """Test plog and pexp."""

    def test_log_of_p_is_zero(self, qp):
        """Test the Iwasawa branch."""
        assert plog(qp(5)) == 0

    def test_log_of_root_of_unity(self, k1):
        """Test that log zeta vanishes."""
        assert plog(k1.gen()).agrees_with(0, N - 2)

    def test_log_homomorphism(self, qp, rng):
        """Test log(xy) = log x + log y."""
        for _ in range(10):
            x, y = qp.random_unit(rng), qp.random_unit(rng)
            assert plog(x * y).agrees_with(plog(x) + plog(y), N - 2)

    def test_exp_log_round_trip(self, qp, rng):
        """Test exp(log x) = x on 1 + pZ_p."""
        for _ in range(10):
            x = 1 + qp.random_element(rng, valuation=1)
            assert pexp(plog(x)).agrees_with(x, N - 2)

    def test_log_of_zero(self, qp):
        """Test log 0 is rejected."""
        with pytest.raises(ZeroArgument):
            plog(qp.zero())

    def test_exp_outside_disk(self, qp):
        """Test exp diverges on units."""
        with pytest.raises(ConvergenceViolation):
            pexp(qp(1))


class TestGaloisAction:
    """Test Galois groups and actions."""

    def test_cyclotomic_group(self, k1):
        """Test Gal(Q_5(zeta_5)/Q_5) acts by zeta -> zeta^a."""
        group = galois_group(k1)
        assert [g.exponent for g in group] == [1, 2, 3, 4]
        zeta = k1.gen()
        for g in group:
            assert g(zeta) == zeta ** g.exponent

    def test_order_and_product(self, k1):
        """Test orders and composition of Galois elements."""
        g = GaloisElement(k1, 2)
        assert g.order() == 4
        assert (g * g).exponent == 4
        assert (g ** 4).order() == 1
        assert (g ** 4)(k1.gen()) == k1.gen()

    def test_non_unit_character_rejected(self, k1):
        """Test that chi must be a unit."""
        with pytest.raises(InvalidField):
            GaloisElement(k1, 5)

    def test_frobenius_has_order_two(self, q25, rng):
        """Test Frobenius squared is the identity on Q_25."""
        frob = GaloisElement(q25, 1)
        for _ in range(5):
            x = q25.random_element(rng)
            assert frob(frob(x)).agrees_with(x, N - 2)

    def test_norm_of_uniformizer(self, k1):
        """Test N(zeta - 1) = 5."""
        assert field_norm(k1.uniformizer()) == 5

    def test_norm_multiplicative(self, q25, rng):
        """Test N(xy) = N(x) N(y)."""
        x, y = q25.random_unit(rng), q25.random_unit(rng)
        assert field_norm(x * y).agrees_with(field_norm(x) * field_norm(y), N - 2)

    def test_user_field_has_no_galois_data(self):
        """Test that user fields refuse Galois operations."""
        with pytest.raises(UnsupportedField):
            galois_group(user_field(5, (5, 0, 1), N))


class TestTower:
    """Test normalized traces and level embeddings."""

    def test_trace_kills_new_powers(self):
        """Test R_1 on zeta_25 and zeta_25^5."""
        k2 = cyclotomic_field(5, 2, N)
        zeta = k2.gen()
        assert normalized_trace(zeta, 1).is_zero()
        assert normalized_trace(zeta ** 5, 1) == zeta ** 5

    def test_trace_is_projector(self, rng):
        """Test R_1 R_1 = R_1 and R_2 = id on level 2."""
        k2 = cyclotomic_field(5, 2, N)
        x = k2.random_element(rng)
        once = normalized_trace(x, 1)
        assert normalized_trace(once, 1) == once
        assert normalized_trace(x, 2) == x

    def test_trace_matches_conjugate_average(self, rng):
        """Test the closed form against the averaged conjugates."""
        k2 = cyclotomic_field(5, 2, N)
        x = k2.random_element(rng)
        assert conjugate_average(x, 1).agrees_with(normalized_trace(x, 1), N - 2)

    def test_level_bounds(self, k1):
        """Test traces outside the tower are rejected."""
        with pytest.raises(LevelMismatch):
            normalized_trace(k1.gen(), 2)

    def test_embed_from_level(self, k1):
        """Test zeta_5 lands on zeta_25^5."""
        k2 = cyclotomic_field(5, 2, N)
        assert embed_from_level(k1.gen(), 2) == k2.gen() ** 5


class TestLiftsAndReconstruction:
    """Test Teichmuller lifts and rational reconstruction."""

    def test_teichmuller_is_fixed_by_q_power(self, q25, rng):
        """Test t^q = t for Teichmuller representatives."""
        t = teichmuller(q25.random_unit(rng))
        assert t ** 25 == t

    def test_teichmuller_of_non_unit(self, q25):
        """Test the lift of the zero residue."""
        assert teichmuller(q25(5)).is_zero()

    def test_rational_reconstruction(self, qp):
        """Test small rationals are recovered."""
        assert rational_reconstruction(qp(Fraction(-3, 7))) == Fraction(-3, 7)
        assert rational_reconstruction(qp(Fraction(2, 25))) == Fraction(2, 25)
        assert rational_reconstruction(qp(0)) == 0

    def test_reconstruction_needs_q_p(self, k1):
        """Test reconstruction refuses extension elements."""
        with pytest.raises(UnsupportedField):
            rational_reconstruction(k1.gen())
