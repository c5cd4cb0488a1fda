"""Tests for the verification suites."""

import pytest

from senlab.errors import InvalidField
from senlab.models import CaseResult, SuiteName
from senlab.suites import SkipCase, SuiteContext, cases_for, run_case, run_suite


@pytest.fixture
def ctx():
    return SuiteContext(p=5, N=20, D=12, seed=0)


def find_case(suite, name):
    return dict(cases_for(suite))[name]


class TestSuiteContext:
    """Test run parameters."""

    def test_defaults(self):
        """Test the default run parameters."""
        ctx = SuiteContext()
        assert (ctx.p, ctx.N, ctx.D, ctx.seed) == (5, 20, 12, 0)
        assert ctx.target == 18

    def test_invalid_prime(self):
        """Test p must be prime."""
        with pytest.raises(InvalidField):
            SuiteContext(p=4)

    def test_exp_radius(self):
        """Test exp(s l) needs radius 2 at p = 2."""
        assert SuiteContext(p=5).exp_radius == 1
        assert SuiteContext(p=2).exp_radius == 2

    def test_rng_is_deterministic(self, ctx):
        """Test each case gets its own reproducible random stream."""
        a = ctx.rng(SuiteName.NORMS, "inversion").random()
        b = SuiteContext(seed=0).rng(SuiteName.NORMS, "inversion").random()
        c = SuiteContext(seed=1).rng(SuiteName.NORMS, "inversion").random()
        d = ctx.rng(SuiteName.NORMS, "substitution").random()
        assert a == b
        assert a != c
        assert a != d


class TestRegistry:
    """Test case registration."""

    @pytest.mark.parametrize("suite", list(SuiteName))
    def test_every_suite_has_cases(self, suite):
        """Test no suite is empty and case names are unique."""
        names = [name for name, _ in cases_for(suite)]
        assert names
        assert len(names) == len(set(names))

    def test_registration_order(self):
        """Test cases are listed in registration order."""
        names = [name for name, _ in cases_for(SuiteName.IDENTITIES)]
        assert names == ["alternating", "telescope", "shift-rule"]


class TestRunCase:
    """Test running single cases."""

    def test_passing_case(self, ctx):
        """Test a case records its checks."""
        result = run_case(ctx, SuiteName.IDENTITIES, "alternating",
                          find_case(SuiteName.IDENTITIES, "alternating"))
        assert result.checks == sum(m + 1 for m in range(13))
        assert result.failures == []
        assert result.skipped is None

    def test_skip(self):
        """Test inversion is skipped when D leaves no precision."""
        ctx = SuiteContext(p=5, N=2, D=10)
        result = run_case(ctx, SuiteName.NORMS, "inversion", find_case(SuiteName.NORMS, "inversion"))
        assert result.skipped
        assert result.checks == 0

    def test_skip_for_even_prime(self):
        """Test square root series are skipped at p = 2."""
        ctx = SuiteContext(p=2)
        result = run_case(ctx, SuiteName.SL2, "sqrt-series", find_case(SuiteName.SL2, "sqrt-series"))
        assert "2-integral" in result.skipped

    def test_exception_becomes_failure(self, ctx):
        """Test an unexpected exception is recorded as a failed check."""
        def broken(ctx, result, rng):
            result.check(True, "first", "ok", "ok")
            raise ZeroDivisionError("boom")

        result = run_case(ctx, SuiteName.NORMS, "broken", broken)
        assert result.checks == 2
        (failure,) = result.failures
        assert failure.expected == "no exception"
        assert failure.got == "ZeroDivisionError: boom"
        assert "seed=0" in failure.inputs

    def test_skip_case_raised_directly(self, ctx):
        """Test SkipCase carries its reason."""
        def not_here(ctx, result, rng):
            raise SkipCase("not for this prime")

        result = run_case(ctx, SuiteName.SEN, "not-here", not_here)
        assert result.skipped == "not for this prime"

    def test_failed_check(self, ctx):
        """Test a failing check keeps its discrepancy valuation as text."""
        def failing(ctx, result, rng):
            result.check(False, "x=1", "0", "1", discrepancy_valuation=3)

        result = run_case(ctx, SuiteName.SEN, "failing", failing)
        assert result.failures[0].discrepancy_valuation == "3"


class TestRunSuite:
    """Test whole suites at the default parameters."""

    def test_identities_pass(self, ctx):
        """Test the combinatorial identities hold."""
        report = run_suite(ctx, SuiteName.IDENTITIES)
        assert report.passed
        assert report.cases_run > 0
        assert report.skipped == []
        assert report.wall_time is None

    def test_timings(self, ctx):
        """Test wall time is reported only on request."""
        report = run_suite(ctx, SuiteName.IDENTITIES, with_timings=True)
        assert report.wall_time is not None

    def test_deterministic(self, ctx):
        """Test the same seed gives the same report."""
        first = run_suite(ctx, SuiteName.IDENTITIES).to_dict()
        second = run_suite(ctx, SuiteName.IDENTITIES).to_dict()
        assert first == second

    @pytest.mark.parametrize("suite, name", [
        (SuiteName.PADIC, "ultrametric"),
        (SuiteName.NORMS, "substitution"),
        (SuiteName.CMAP, "cocycle"),
        (SuiteName.RECONSTRUCT, "decay-guard"),
        (SuiteName.SL2, "relations"),
        (SuiteName.SEN, "character-theta"),
    ])
    def test_sample_cases_pass(self, ctx, suite, name):
        """Test a sample of cases from each area passes."""
        result = run_case(ctx, suite, name, find_case(suite, name))
        assert result.checks > 0
        assert result.failures == [], result.failures


class TestCaseResult:
    """Test the check recorder."""

    def test_check_counts(self):
        """Test checks are counted whether or not they hold."""
        result = CaseResult(case="demo")
        assert result.check(True, "a", "b", "c")
        assert not result.check(False, "a", "b", "c")
        assert result.checks == 2
        assert len(result.failures) == 1
