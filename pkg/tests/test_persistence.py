"""Tests for input files and report persistence."""

import json
from fractions import Fraction

import pytest

from senlab.errors import ParseError
from senlab.models import CaseFailure, LiftKind, SuiteName, SuiteReport
from senlab.padic import base_field, cyclotomic_field, unramified_field
from senlab.persistence import (
    ReportPersistence,
    load_action,
    load_lt_model,
    load_rep,
    parse_field,
    parse_scalar,
    render_json,
    report_document,
)


N = 20


def write_json(path, data):
    path.write_text(json.dumps(data))
    return path


@pytest.fixture
def sample_reports():
    failing = SuiteReport(suite=SuiteName.SEN, cases_run=3, failures=[
        CaseFailure(case="iota", inputs="j=2", expected="0", got="5", discrepancy_valuation="1")])
    return [SuiteReport(suite=SuiteName.NORMS, cases_run=10, skipped=["inversion: too deep"]), failing]


class TestFieldsAndScalars:
    """Test field names and scalar forms."""

    @pytest.mark.parametrize("spec, expected", [
        ("Qp", base_field(5, N)),
        ("Q5", base_field(5, N)),
        ("unramified:2", unramified_field(5, 2, N)),
        ("cyclotomic:1", cyclotomic_field(5, 1, N)),
    ])
    def test_parse_field(self, spec, expected):
        """Test the accepted field names."""
        assert parse_field(5, spec, N) == expected

    def test_parse_field_dict(self):
        """Test the dictionary form of a field."""
        fld = cyclotomic_field(5, 1, N)
        assert parse_field(5, fld.to_dict(), N) == fld

    def test_parse_field_in_uniformizer_digits(self):
        """Test a field object may carry its precision in powers of the uniformizer."""
        spec = {"kind": "cyclotomic", "level": 1, "uniformizer_precision": 40}
        assert parse_field(5, spec, N) == cyclotomic_field(5, 1, 10)

    @pytest.mark.parametrize("spec", ["Q7", "ramified:2", "cyclotomic:x", 5])
    def test_unknown_field(self, spec):
        """Test unknown field names are refused."""
        with pytest.raises(ParseError):
            parse_field(5, spec, N)

    def test_parse_scalar(self):
        """Test integers, rationals and digit lists."""
        fld = base_field(5, N)
        assert parse_scalar(fld, 3) == 3
        assert parse_scalar(fld, "-1/2") == fld(Fraction(-1, 2))
        assert parse_scalar(fld, fld(7).to_text()) == 7

    @pytest.mark.parametrize("raw", ["abc", "1/0"])
    def test_bad_scalar(self, raw):
        """Test malformed scalars are refused."""
        with pytest.raises(ParseError):
            parse_scalar(base_field(5, N), raw)


class TestLubinTateModels:
    """Test model files."""

    def test_standard_model(self, tmp_path):
        """Test defaults for a minimal model."""
        model = load_lt_model(write_json(tmp_path / "m.json", {"p": 5}), N, 12)
        assert model.lift is LiftKind.STANDARD
        assert model.degree == 12
        assert model.uniformizer is None
        assert model.field == base_field(5, N)

    def test_overrides(self, tmp_path):
        """Test N, D, pi and the lift come from the file."""
        data = {"p": 5, "N": 10, "D": 6, "pi": "5", "lift": "multiplicative"}
        model = load_lt_model(write_json(tmp_path / "m.json", data), N, 12)
        assert model.field.precision == 10
        assert model.degree == 6
        assert model.uniformizer == 5
        assert model.lift is LiftKind.MULTIPLICATIVE

    def test_custom_coefficients(self, tmp_path):
        """Test "f" selects a custom lift and builds."""
        data = {"p": 5, "D": 6, "f": [0, 5, 0, 0, 0, 1]}
        model = load_lt_model(write_json(tmp_path / "m.json", data), N, 12)
        assert model.lift is LiftKind.CUSTOM
        G = model.build()
        assert G.lift is LiftKind.CUSTOM
        assert G.degree == 6

    @pytest.mark.parametrize("data", [
        {"N": 10},
        {"p": 5, "lift": "sideways"},
        {"p": 5, "lift": "custom"},
        {"p": "five"},
    ])
    def test_bad_models(self, tmp_path, data):
        """Test malformed model files."""
        with pytest.raises(ParseError):
            load_lt_model(write_json(tmp_path / "m.json", data), N, 12)

    def test_missing_file(self, tmp_path):
        """Test a missing file is a parse error."""
        with pytest.raises(ParseError):
            load_lt_model(tmp_path / "missing.json", N, 12)

    def test_malformed_json(self, tmp_path):
        """Test broken JSON is a parse error."""
        path = tmp_path / "m.json"
        path.write_text("{")
        with pytest.raises(ParseError):
            load_lt_model(path, N, 12)


class TestActions:
    """Test action files."""

    def test_character(self, tmp_path):
        """Test a character action with the default generator."""
        spec = load_action(write_json(tmp_path / "a.json", {"kind": "character", "s": 2}), 5, N, 12)
        assert spec.action.dimension == 1
        assert spec.gamma == 6
        assert spec.d == [[base_field(5, N).one()]]

    def test_trivial_with_d(self, tmp_path):
        """Test "dim" and an explicit d."""
        data = {"kind": "trivial", "dim": 2, "d": [[1, 2], [3, 4]], "gamma": 31}
        spec = load_action(write_json(tmp_path / "a.json", data), 5, N, 12)
        assert spec.action.dimension == 2
        assert spec.gamma == 31
        assert spec.d[1][0] == 3

    def test_exp(self, tmp_path):
        """Test an exponential action from a scalar matrix."""
        data = {"kind": "exp", "theta": [[5, 0], [0, 10]], "radius": 1}
        spec = load_action(write_json(tmp_path / "a.json", data), 5, N, 12)
        assert spec.action.dimension == 2
        assert spec.action.radius == 1

    def test_matrix_entries(self, tmp_path):
        """Test an action given by its series entries."""
        data = {"kind": "matrix", "entries": [["1", "0"], ["1*T1", "1"]], "degree": 3}
        spec = load_action(write_json(tmp_path / "a.json", data), 5, N, 12)
        assert spec.action.degree == 3
        assert spec.action.coefficient_matrix((1,))[1][0] == 1

    def test_radius_two_generator(self, tmp_path):
        """Test gamma defaults to 1 + p^radius."""
        data = {"kind": "unipotent", "radius": 2}
        spec = load_action(write_json(tmp_path / "a.json", data), 5, N, 12)
        assert spec.gamma == 26

    @pytest.mark.parametrize("data", [
        {"s": 2},
        {"kind": "spiral"},
        {"kind": "character"},
        {"kind": "trivial", "dim": 2, "d": [[1]]},
        {"kind": "trivial", "dim": 2, "d": [[1, 2]]},
        {"kind": "matrix", "entries": "T1"},
        {"kind": "character", "s": 2, "gamma": "x"},
        {"kind": "character", "s": 2, "radius": "one"},
    ])
    def test_bad_actions(self, tmp_path, data):
        """Test malformed action files."""
        with pytest.raises(ParseError):
            load_action(write_json(tmp_path / "a.json", data), 5, N, 12)


class TestRepresentations:
    """Test representation files."""

    def test_symmetric_powers(self, tmp_path):
        """Test the shorthand for a direct sum of Sym^k."""
        rep = load_rep(write_json(tmp_path / "r.json", {"sym": [2, 0]}))
        assert rep.dimension == 4

    def test_explicit_matrices(self, tmp_path):
        """Test dim, D1, D2 and H."""
        data = {"dim": 2, "D1": [[0, 0], [1, 0]], "D2": [[0, 1], [0, 0]], "H": [[-1, 0], [0, 1]]}
        assert load_rep(write_json(tmp_path / "r.json", data)).dimension == 2

    @pytest.mark.parametrize("data", [
        {"sym": []},
        {"sym": [-1]},
        {"sym": "2"},
        {"dim": 2, "D1": [[0]], "D2": [[0]], "H": [[0]]},
        {"D1": [[0]]},
    ])
    def test_bad_representations(self, tmp_path, data):
        """Test malformed representation files."""
        with pytest.raises(ParseError):
            load_rep(write_json(tmp_path / "r.json", data))


class TestReportPersistence:
    """Test report documents on disk."""

    def test_document(self, sample_reports):
        """Test the document records parameters and the overall verdict."""
        document = report_document(sample_reports, 5, 20, 12, 7)
        assert document["params"] == {"p": 5, "N": 20, "D": 12, "seed": 7}
        assert document["passed"] is False
        assert [s["suite"] for s in document["suites"]] == ["norms", "sen"]

    def test_render_json_is_canonical(self):
        """Test sorted keys and a trailing newline."""
        text = render_json({"b": 1, "a": [1, 2]})
        assert text.endswith("\n")
        assert text.index('"a"') < text.index('"b"')

    def test_save_and_load(self, tmp_path, sample_reports):
        """Test reports survive a round trip through disk."""
        persistence = ReportPersistence(tmp_path / "out" / "report.json")
        persistence.save_reports(sample_reports, 5, 20, 12, 0)

        loaded = persistence.load_reports()
        assert [r.to_dict() for r in loaded] == [r.to_dict() for r in sample_reports]

    def test_load_nonexistent(self, tmp_path):
        """Test loading when no report was written."""
        assert ReportPersistence(tmp_path / "report.json").load_reports() == []

    def test_load_bad_report(self, tmp_path):
        """Test a file that is not a report."""
        path = write_json(tmp_path / "report.json", {"params": {}})
        with pytest.raises(ParseError):
            ReportPersistence(path).load_reports()
