"""Tests for orbit expansions, the invariantization map and reconstruction."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from senlab.errors import (
    BadDirection,
    ConvergenceViolation,
    DecayViolation,
    LevelMismatch,
    NotRankOneChart,
    RadiusViolation,
    ShapeMismatch,
)
from senlab.linalg import identity, matmul, matsub, min_valuation
from senlab.orbits import (
    AnalyticMatrixAction,
    GroupElement,
    OrbitExpansion,
    SenRingElement,
    additive_action,
    additive_orbit,
    alternating_identity,
    character_action,
    character_orbit,
    cmap,
    cmap_defect,
    cocycle_defect,
    derivative_shift_rule,
    exponential_degree,
    fixed_space_dimension,
    generator_character,
    is_f_analytic,
    nabla,
    nabla_consistency,
    orbit_from_action,
    reconstruct,
    reconstruction_nabla,
    sample_character,
    telescope_identity,
    trivial_action,
    unipotent_action,
)
from senlab.padic import AtLeast, GaloisElement, PadicScalar, base_field, cyclotomic_field, pexp, plog
from senlab.series import RadiusIndexedSeries


N = 20


@pytest.fixture
def fld():
    return base_field(5, N)


@pytest.fixture
def rng():
    return random.Random(2024)


def random_element_of_gamma(fld, rng, radius=1):
    return GroupElement.from_character(fld, sample_character(fld.p, radius, rng, fld.precision))


class TestCombinatorialIdentities:
    """Test the binomial identities behind reconstruction."""

    @given(st.integers(min_value=0, max_value=15), st.integers(min_value=0, max_value=15))
    def test_alternating_identity(self, m, i):
        """Test the alternating sum is 1 exactly when m == i."""
        if i > m:
            m, i = i, m
        assert alternating_identity(m, i) == (1 if m == i else 0)

    def test_alternating_identity_range(self):
        """Test i > m is refused."""
        with pytest.raises(ValueError):
            alternating_identity(2, 3)

    @given(st.lists(st.integers(min_value=0, max_value=5), min_size=1, max_size=3))
    def test_telescope_identity(self, j):
        """Test the signed binomial sum over k <= j vanishes unless j = 0."""
        j = tuple(j)
        assert telescope_identity(j) == (0 if any(j) else 1)

    def test_shift_rule(self):
        """Test the derivative of (x - x_n)^k."""
        assert derivative_shift_rule((2, 1), 0) == (2, (1, 1))
        assert derivative_shift_rule((0, 1), 0) == (0, (0, 1))
        with pytest.raises(BadDirection):
            derivative_shift_rule((1,), 1)


class TestGroupElements:
    """Test chart coordinates of group elements."""

    def test_generator_character(self):
        """Test 1 + p^n."""
        assert generator_character(5, 1) == 6
        assert generator_character(3, 2) == 10

    def test_from_character(self, fld):
        """Test the chart coordinate is log chi."""
        g = GroupElement.from_character(fld, 6)
        assert g.chart == (plog(fld(6)),)
        assert g.galois is None
        assert g.chart_valuation() == 1

    def test_cyclotomic_elements_act(self):
        """Test elements over a cyclotomic field carry a Galois action."""
        k1 = cyclotomic_field(5, 1, N)
        assert GroupElement.from_character(k1, 6).galois is not None

    def test_compose_adds_charts(self, fld, rng):
        """Test l(gh) = l(g) + l(h)."""
        g = random_element_of_gamma(fld, rng)
        h = random_element_of_gamma(fld, rng)
        assert g.compose(h).chart == (g.chart[0] + h.chart[0],)

    def test_compose_shape_mismatch(self, fld):
        """Test charts of different dimension do not compose."""
        g = GroupElement.from_chart([fld(5)])
        h = GroupElement.from_chart([fld(5), fld(25)])
        with pytest.raises(ShapeMismatch):
            g.compose(h)

    def test_sample_character(self, rng):
        """Test samples lie in 1 + p^n Z_p."""
        for _ in range(10):
            chi = sample_character(5, 2, rng, N)
            assert (chi - 1) % 25 == 0


class TestActions:
    """Test analytic matrix actions."""

    def test_exponential_degree(self):
        """Test the truncation degree of exp(s l) on radius 1 for p = 5."""
        assert exponential_degree(5, 20, 1) == 28

    def test_exponential_degree_diverges(self):
        """Test exp(l) does not converge on radius 1 for p = 2."""
        with pytest.raises(ConvergenceViolation):
            exponential_degree(2, 20, 1)

    def test_trivial_action(self, fld, rng):
        """Test the trivial action is the identity everywhere."""
        action = trivial_action(fld, 3, 1)
        assert action.matrix(random_element_of_gamma(fld, rng)) == identity(fld, 3)

    def test_additive_action(self, fld):
        """Test Mat(g) = [[1, 0], [l(g), 1]]."""
        action = additive_action(fld, 1)
        g = GroupElement.from_chart([fld(5)])
        assert action.matrix(g) == [[fld(1), fld(0)], [fld(5), fld(1)]]

    def test_act(self, fld):
        """Test coordinates move as row vectors, c -> c . Mat(g)."""
        action = additive_action(fld, 1)
        g = GroupElement.from_chart([fld(25)])
        assert action.act(g, [fld(1), fld(0)]) == [fld(1), fld(0)]
        assert action.act(g, [fld(0), fld(1)]) == [fld(25), fld(1)]

    def test_origin(self, fld):
        """Test Mat is the identity at the chart origin."""
        assert isinstance(unipotent_action(fld, 1).origin_defect(), AtLeast)
        assert isinstance(character_action(fld, 2, 1).origin_defect(), AtLeast)

    def test_character_action_value(self, fld, rng):
        """Test Mat(g) = exp(s l(g))."""
        action = character_action(fld, 2, 1)
        for _ in range(5):
            g = random_element_of_gamma(fld, rng)
            value = action.matrix(g)[0][0]
            assert (value - pexp(2 * g.chart[0])).valuation() >= N - 2

    def test_additive_cocycle_is_exact(self, fld, rng):
        """Test the additive action satisfies the cocycle rule exactly."""
        action = additive_action(fld, 1)
        g = random_element_of_gamma(fld, rng)
        h = random_element_of_gamma(fld, rng)
        assert isinstance(cocycle_defect(action, g, h), AtLeast)

    def test_cocycle_order(self, fld):
        """Test the defect is measured against g(Mat(h)) . Mat(g), not Mat(g) . g(Mat(h))."""
        one = RadiusIndexedSeries.constant(fld, 1, 1, 2, 1)
        t = RadiusIndexedSeries.variable(fld, 1, 1, 2, 0)
        action = AnalyticMatrixAction([[one, t], [t * t, one]])
        g = GroupElement.from_chart([fld(5)])
        h = GroupElement.from_chart([fld(25)])
        mat_g, mat_h = action.matrix(g), action.matrix(h)
        after_h_then_g = matsub(action.matrix(g.compose(h)), matmul(mat_h, mat_g))
        other_order = matsub(action.matrix(g.compose(h)), matmul(mat_g, mat_h))

        assert matmul(mat_h, mat_g) != matmul(mat_g, mat_h)
        assert after_h_then_g != other_order
        assert cocycle_defect(action, g, h) == min_valuation(after_h_then_g)
        # [[1, a], [a^2, 1]] . [[1, b], [b^2, 1]] differs from M(a + b) by 2ab off the diagonal
        assert cocycle_defect(action, g, h) == 3

    @pytest.mark.parametrize("builder", [
        lambda f: character_action(f, 3, 1),
        lambda f: unipotent_action(f, 1),
    ])
    def test_exponential_cocycles(self, fld, rng, builder):
        """Test Mat(gh) = g(Mat(h)) Mat(g) for exponential actions."""
        action = builder(fld)
        for _ in range(5):
            g = random_element_of_gamma(fld, rng)
            h = random_element_of_gamma(fld, rng)
            assert cocycle_defect(action, g, h) >= N - 2

    def test_radius_violation(self, fld):
        """Test elements outside the radius subgroup are refused."""
        action = character_action(fld, 1, 2)
        with pytest.raises(RadiusViolation):
            action.matrix(GroupElement.from_character(fld, 6))

    def test_non_square_entries(self, fld):
        """Test entries must form a square matrix."""
        one = RadiusIndexedSeries.constant(fld, 1, 1, 2, 1)
        with pytest.raises(ShapeMismatch):
            AnalyticMatrixAction([[one, one]])


class TestOrbitExpansions:
    """Test orbit coefficient families."""

    def test_orbit_of_character_action(self, fld):
        """Test w_k = s^k / k! for the character action."""
        action = character_action(fld, 2, 1, degree=10)
        w = orbit_from_action(action, [1])
        expected = character_orbit(fld, 2, 1, 10)
        for k in range(11):
            diff = w.coefficient((k,))[0] - expected.coefficient((k,))[0]
            assert diff.valuation() >= N - 2

    def test_orbit_vector_length(self, fld):
        """Test w must match the action dimension."""
        with pytest.raises(ShapeMismatch):
            orbit_from_action(unipotent_action(fld, 1), [1])

    def test_at(self, fld, rng):
        """Test g(w) = exp(s l(g)) for w = 1."""
        w = character_orbit(fld, 2, 1, exponential_degree(5, N, 1))
        g = random_element_of_gamma(fld, rng)
        (value,) = w.at(g)
        assert (value - pexp(2 * g.chart[0])).valuation() >= N - 2

    def test_nabla(self, fld):
        """Test nabla(w) = w_1."""
        w = character_orbit(fld, 2, 1, 4)
        assert nabla(w, 0) == [fld(2)]
        with pytest.raises(BadDirection):
            nabla(w, 1)

    def test_f_analytic(self, fld):
        """Test an orbit moving only along the identity direction is F-analytic."""
        along_identity = additive_orbit(fld, 3, 1, chart_dim=2, direction=0)
        along_other = additive_orbit(fld, 3, 1, chart_dim=2, direction=1)
        assert is_f_analytic(along_identity)
        assert not is_f_analytic(along_other)

    def test_nabla_consistency(self, fld, rng):
        """Test w_k = nabla^k(w) / k! for exponential actions."""
        character = character_action(fld, 2, 1)
        assert nabla_consistency(character, orbit_from_action(character, [1])) >= N - 2
        action = unipotent_action(fld, 1)
        w = orbit_from_action(action, [fld.random_element(rng), fld.random_element(rng)])
        assert nabla_consistency(action, w) >= N - 2

    def test_decay_valuation(self, fld):
        """Test min val(w_k) + n|k|."""
        w = OrbitExpansion(fld, 1, 1, 1, 2, {(0,): [5], (1,): [1]})
        assert w.decay_valuation() == 1
        assert w.decay_valuation(at_radius=2) == 1

    def test_to_dict(self, fld):
        """Test the dictionary form lists terms in index order."""
        data = additive_orbit(fld, 3, 1).to_dict()
        assert data["dimension"] == 1
        assert [t["multiindex"] for t in data["terms"]] == [[0], [1]]


class TestCmap:
    """Test the invariantization map C(w)."""

    def test_additive_cmap(self, fld):
        """Test C(w) = x - T for the additive orbit."""
        series = cmap(additive_orbit(fld, 3, 1)).components[0]
        assert series.coefficient((0,)) == 3
        assert series.coefficient((1,)) == -1

    def test_additive_defect_vanishes(self, fld, rng):
        """Test g(C(w)) = C(w) exactly for the additive orbit."""
        w = additive_orbit(fld, fld.random_element(rng), 1)
        for _ in range(5):
            assert cmap_defect(w, random_element_of_gamma(fld, rng)).is_zero()

    def test_character_defect(self, fld, rng):
        """Test g(C(w)) = C(w) for the character orbit."""
        w = character_orbit(fld, 2, 1, exponential_degree(5, N, 1, Fraction(0)))
        for _ in range(3):
            defect = cmap_defect(w, random_element_of_gamma(fld, rng))
            assert defect.components[0].gauss_valuation(1) >= N - 2

    def test_rank_one_only(self, fld):
        """Test C(w) needs a one-dimensional chart."""
        with pytest.raises(NotRankOneChart):
            cmap(additive_orbit(fld, 3, 1, chart_dim=2))

    def test_defect_radius(self, fld):
        """Test elements outside the radius class are refused."""
        w = additive_orbit(fld, 3, 2)
        with pytest.raises(RadiusViolation):
            cmap_defect(w, GroupElement.from_character(fld, 6))


class TestReconstruction:
    """Test y_i and their resummation."""

    def test_additive_reconstruction(self, fld):
        """Test y_0 = x - T, y_1 = 1 and the resummation x for the additive orbit."""
        z = additive_orbit(fld, 1, 1)
        rec = reconstruct(z)
        assert rec.radius == 2
        y0 = rec.y((0,)).components[0]
        assert y0.coefficient((0,)) == 1
        assert y0.coefficient((1,)) == -1
        assert rec.y((1,)).components[0].constant_term() == 1
        resum = rec.resum.components[0]
        assert (resum - RadiusIndexedSeries.constant(fld, 1, 2, 1, 1)).is_zero()

    def test_nabla_of_y_cancels(self, fld):
        """Test nabla(y_i) cancels term by term."""
        z = additive_orbit(fld, 1, 1)
        rec = reconstruct(z)
        for i in [(0,), (1,)]:
            assert reconstruction_nabla(z, rec, i, 0) == {}

    def test_two_dimensional_chart(self):
        """Test resummation returns z over a two-dimensional chart."""
        k1 = cyclotomic_field(5, 1, N)
        z = OrbitExpansion(k1, 1, 2, 1, 2, {(0, 0): [1], (1, 0): [5], (0, 1): [1], (1, 1): [25]})
        rec = reconstruct(z)
        resum = rec.resum.components[0]
        const = RadiusIndexedSeries.constant(k1, 2, 2, 2, 1)
        assert (resum - const).min_coefficient_valuation() >= N - 2
        for i in [(0, 0), (1, 0), (0, 1)]:
            for tau in range(2):
                assert reconstruction_nabla(z, rec, i, tau) == {}

    def test_decay_guard(self):
        """Test coefficients growing too fast are refused."""
        k1 = cyclotomic_field(5, 1, N)
        slow = OrbitExpansion(k1, 1, 1, 1, 2, {(0,): [1], (1,): [PadicScalar(k1, [1], 3)]})
        with pytest.raises(DecayViolation):
            reconstruct(slow)


class TestSenRing:
    """Test the twisted action on u-series."""

    def test_level_must_cover_radius(self):
        """Test u-series of radius class n need level >= n."""
        k1 = cyclotomic_field(5, 1, N)
        with pytest.raises(LevelMismatch):
            SenRingElement.monomial(k1, 1, 1, 2, 3)

    def test_fixed_space_dimension(self):
        """Test the fixed u-series over K_1 have dimension p - 1."""
        g = GaloisElement(base_field(5, N), 6)
        for degree in (1, 3):
            assert fixed_space_dimension(g, 1, degree) == 4
