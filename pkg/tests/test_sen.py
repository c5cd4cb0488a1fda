"""Tests for Sen operators and the iota expansion."""

import math
import random
from fractions import Fraction

import pytest

from senlab.errors import FactorialPrecisionLoss, LogDivergence, NotAGenerator, NotRankOneChart
from senlab.linalg import distance, from_rows, identity, scale, zeros
from senlab.orbits import (
    AnalyticMatrixAction,
    GroupElement,
    additive_action,
    character_action,
    exp_action,
    sample_character,
    trivial_action,
    unipotent_action,
)
from senlab.padic import base_field
from senlab.sen import (
    SenDescriptor,
    commutes_with_action,
    difference_quotient,
    expected_symk_spectrum,
    iota,
    one_param,
    sen_kernel,
    sen_operator,
    sen_spectrum_symk,
)
from senlab.series import RadiusIndexedSeries


N = 20
GAMMA = 6


@pytest.fixture
def fld():
    return base_field(5, N)


@pytest.fixture
def rng():
    return random.Random(3)


class TestSenOperator:
    """Test Theta = log Mat(gamma) / log chi(gamma)."""

    @pytest.mark.parametrize("s", [-2, 0, 1, 3])
    def test_character_action(self, fld, s):
        """Test the character chi^s has Theta = s."""
        theta = sen_operator(character_action(fld, s, 1), GAMMA)
        assert (theta.theta[0][0] - fld(s)).valuation() >= N - 2
        assert theta.spectrum == [s]
        assert theta.radius == 1

    def test_trivial_action(self, fld):
        """Test the trivial action has Theta = 0."""
        theta = sen_operator(trivial_action(fld, 2, 1), GAMMA)
        assert distance(theta.theta, zeros(fld, 2, 2)) >= N - 2
        assert theta.spectrum == [0, 0]

    def test_unipotent_action(self, fld):
        """Test Theta = [[1, 1], [0, 0]] with kernel spanned by (1, -1)."""
        theta = sen_operator(unipotent_action(fld, 1), GAMMA)
        assert distance(theta.theta, from_rows(fld, [[1, 1], [0, 0]])) >= N - 2
        assert theta.spectrum == [0, 1]
        (v,) = sen_kernel(theta)
        assert v[0] == 1
        assert v[1].agrees_with(-1, N - 2)

    def test_exp_action_round_trip(self, fld, rng):
        """Test Theta of exp(l Theta_0) is Theta_0."""
        for _ in range(3):
            theta0 = [[fld.random_element(rng, 1) for _ in range(2)] for _ in range(2)]
            theta = sen_operator(exp_action(theta0, 1), GAMMA)
            assert distance(theta.theta, theta0) >= N - 2

    def test_independent_of_generator(self, fld):
        """Test gamma and gamma^p give the same Theta."""
        action = unipotent_action(fld, 1)
        first = sen_operator(action, GAMMA)
        second = sen_operator(action, pow(GAMMA, 5, 5 ** N))
        assert distance(first.theta, second.theta) >= N - 3

    def test_not_a_generator(self, fld):
        """Test chi(gamma) = 1 generates nothing."""
        with pytest.raises(NotAGenerator):
            sen_operator(character_action(fld, 1, 1), 1)

    def test_gamma_outside_radius(self, fld):
        """Test gamma must lie in 1 + p^radius Z_p."""
        with pytest.raises(NotAGenerator):
            sen_operator(character_action(fld, 1, 2), GAMMA)

    def test_radius_class_must_be_exact(self, fld):
        """Test an explicit radius class must equal val(chi(gamma) - 1)."""
        action = character_action(fld, 1, 1)
        assert sen_operator(action, GAMMA, radius=1).radius == 1
        with pytest.raises(NotAGenerator):
            sen_operator(action, pow(GAMMA, 5, 5 ** N), radius=1)

    def test_matrix_far_from_identity(self, fld):
        """Test Mat(gamma) must be congruent to Id mod p^n."""
        wild = AnalyticMatrixAction([[RadiusIndexedSeries(fld, 1, 1, 1, {(0,): 2, (1,): 1})]])
        with pytest.raises(LogDivergence):
            sen_operator(wild, GAMMA)

    def test_rank_one_chart(self, fld):
        """Test actions on higher-rank charts are refused."""
        with pytest.raises(NotRankOneChart):
            sen_operator(additive_action(fld, 1, chart_dim=2), GAMMA)

    def test_to_dict(self, fld):
        """Test the dictionary form of a descriptor."""
        data = sen_operator(character_action(fld, 2, 1), GAMMA).to_dict()
        assert data["spectrum"] == [2]
        assert data["radius"] == 1
        assert len(data["theta"]) == 1


class TestDerivative:
    """Test Theta against finite differences and commutation."""

    def test_difference_quotient(self, fld):
        """Test (Mat(gamma) - 1)/(chi - 1) approximates Theta to the radius."""
        action = unipotent_action(fld, 1)
        theta = sen_operator(action, GAMMA)
        assert distance(difference_quotient(action, GAMMA), theta.theta) >= 1

    def test_difference_quotient_needs_generator(self, fld):
        """Test chi = 1 is refused."""
        with pytest.raises(NotAGenerator):
            difference_quotient(unipotent_action(fld, 1), 1)

    def test_commutes(self, fld, rng):
        """Test [Theta, Mat(g)] = 0 on sampled g."""
        action = unipotent_action(fld, 1)
        theta = sen_operator(action, GAMMA)
        samples = [GroupElement.from_character(fld, sample_character(5, 1, rng, N)) for _ in range(3)]
        assert commutes_with_action(theta, action, samples)

    def test_one_parameter(self, fld):
        """Test exp(t N) = 1 + t N for nilpotent N."""
        nilpotent = from_rows(fld, [[0, 1], [0, 0]])
        assert distance(one_param(nilpotent, 5), from_rows(fld, [[1, 5], [0, 1]])) >= N - 2


class TestIota:
    """Test e^(-u Theta) d."""

    def test_scalar_theta(self, fld, rng):
        """Test C_j = (-s)^j / j! d for Theta = s Id."""
        d = [[fld.random_element(rng) for _ in range(2)] for _ in range(2)]
        theta = SenDescriptor(theta=scale(identity(fld, 2), fld(2)), spectrum=[2, 2], radius=1, field=fld)
        expansion = iota(d, theta, 8)
        assert expansion.degree == 8
        assert expansion.constant_term() == d
        for j, coefficient in enumerate(expansion.coefficients):
            expected = scale(d, fld(Fraction((-2) ** j, math.factorial(j))))
            assert distance(coefficient, expected) >= N - 2

    def test_zero_theta(self, fld):
        """Test e^0 d = d."""
        theta = SenDescriptor(theta=zeros(fld, 2, 2), spectrum=[0, 0], radius=1, field=fld)
        expansion = iota(identity(fld, 2), theta, 4)
        for coefficient in expansion.coefficients[1:]:
            assert all(x.is_zero() for row in coefficient for x in row)

    def test_series(self, fld):
        """Test the entrywise series in u."""
        theta = SenDescriptor(theta=scale(identity(fld, 1), fld(1)), spectrum=[1], radius=1, field=fld)
        (row,) = iota([[1]], theta, 3).series()
        (entry,) = row
        assert entry.coefficient((1,)) == -1
        assert entry.coefficient((2,)) == fld(Fraction(1, 2))

    def test_degree_too_large(self, fld):
        """Test D >= p*N is refused."""
        theta = SenDescriptor(theta=zeros(fld, 1, 1), spectrum=[0], radius=1, field=fld)
        with pytest.raises(FactorialPrecisionLoss):
            iota([[1]], theta, 100)

    def test_to_dict(self, fld):
        """Test the dictionary form lists one matrix per power of u."""
        theta = SenDescriptor(theta=zeros(fld, 1, 1), spectrum=[0], radius=1, field=fld)
        data = iota([[1]], theta, 2).to_dict()
        assert data["radius"] == 1
        assert len(data["coefficients"]) == 3


class TestSymmetricPowerSpectra:
    """Test Theta on Sym^k with weight s."""

    @pytest.mark.parametrize("k", [0, 1, 3])
    @pytest.mark.parametrize("s", [1, 2])
    def test_spectrum(self, fld, k, s):
        """Test the spectrum is s times the weights of Sym^k."""
        assert sen_spectrum_symk(s, k, field=fld) == expected_symk_spectrum(s, k)

    def test_expected_spectrum(self):
        """Test s(2i - k) for i = 0..k, sorted."""
        assert expected_symk_spectrum(2, 2) == [-4, 0, 4]
