"""Tests for the senlab command line."""

import json

import pytest

from senlab import main as cli
from senlab.config import Config, THREADS_ENV
from senlab.main import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, build_parser, main, resolve_config
from senlab.models import CaseFailure, SuiteName, SuiteReport


@pytest.fixture(autouse=True)
def isolated_config(tmp_path, monkeypatch):
    """Keep the user's config file and environment out of every run."""
    path = tmp_path / "config" / "config.json"
    monkeypatch.setattr(Config, "get_config_path", classmethod(lambda cls: path))
    monkeypatch.delenv(THREADS_ENV, raising=False)
    return path


def write_json(path, data):
    path.write_text(json.dumps(data))
    return str(path)


class TestParser:
    """Test argument parsing and configuration."""

    def test_shared_flags_after_subcommand(self):
        """Test shared flags are accepted after every subcommand."""
        args = build_parser().parse_args(["verify", "all", "--p", "7", "--N", "10", "--json"])
        assert (args.p, args.N, args.json) == (7, 10, True)

    def test_flags_override_config(self, isolated_config):
        """Test command-line values win over the config file."""
        Config(p=3, D=8, seed=5).save()
        args = build_parser().parse_args(["verify", "all", "--p", "7", "--threads", "2"])
        config = resolve_config(args)
        assert (config.p, config.D, config.seed, config.threads) == (7, 8, 5, 2)

    def test_level_must_be_positive(self):
        """Test --level rejects zero."""
        with pytest.raises(SystemExit):
            build_parser().parse_args(["lt", "model.json", "--level", "0"])

    def test_command_required(self):
        """Test a subcommand is required."""
        with pytest.raises(SystemExit):
            build_parser().parse_args([])


class TestVerify:
    """Test senlab verify."""

    def test_json_report(self, capsys):
        """Test a passing suite exits 0 and prints the JSON document."""
        assert main(["verify", "identities", "--json", "--threads", "2"]) == EXIT_OK
        document = json.loads(capsys.readouterr().out)
        assert document["params"] == {"p": 5, "N": 20, "D": 12, "seed": 0}
        assert document["passed"] is True
        assert [s["suite"] for s in document["suites"]] == ["identities"]

    def test_all_suites_pass(self, capsys):
        """Test every suite passes on the default parameters."""
        assert main(["verify", "all", "--seed", "42", "--json"]) == EXIT_OK
        document = json.loads(capsys.readouterr().out)
        assert document["passed"] is True
        assert all(not s["failures"] for s in document["suites"])

    def test_table(self, capsys):
        """Test the human-readable summary."""
        assert main(["verify", "identities"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "identities" in out
        assert "pass" in out

    def test_out_file(self, tmp_path, capsys):
        """Test --out writes the same document."""
        out = tmp_path / "reports" / "run.json"
        assert main(["verify", "identities", "--out", str(out), "--json"]) == EXIT_OK
        assert json.loads(out.read_text()) == json.loads(capsys.readouterr().out)

    def test_failure_exit_code(self, monkeypatch, capsys):
        """Test a failed check exits 1 and is listed."""
        failing = SuiteReport(suite=SuiteName.SEN, cases_run=1, failures=[
            CaseFailure(case="iota", inputs="j=1", expected="0", got="1")])
        monkeypatch.setattr(cli, "run_suites", lambda *args, **kwargs: [failing])
        assert main(["verify", "sen"]) == EXIT_FAILURE
        out = capsys.readouterr().out
        assert "FAIL" in out
        assert "sen/iota" in out

    def test_unknown_suite(self):
        """Test an unknown suite is a usage error."""
        assert main(["verify", "astrology"]) == EXIT_USAGE

    def test_invalid_prime(self):
        """Test p = 4 is a usage error."""
        assert main(["verify", "identities", "--p", "4"]) == EXIT_USAGE


class TestLubinTate:
    """Test senlab lt."""

    def test_multiplicative_model(self, tmp_path, capsys):
        """Test the report on the multiplicative group."""
        model = write_json(tmp_path / "m.json", {"p": 5, "lift": "multiplicative", "D": 6})
        assert main(["lt", model, "--level", "2", "--json"]) == EXIT_OK
        document = json.loads(capsys.readouterr().out)
        assert document["model"]["q"] == 5
        assert document["model"]["lift"] == "multiplicative"
        assert len(document["endomorphisms"]) == 3
        assert document["torsion_slopes"] == {
            "1": [{"slope": "1/4", "multiplicity": 4}],
            "2": [{"slope": "1/20", "multiplicity": 20}],
        }

    def test_human_output(self, tmp_path, capsys):
        """Test the group law is printed."""
        model = write_json(tmp_path / "m.json", {"p": 5, "D": 6})
        assert main(["lt", model]) == EXIT_OK
        assert "F(X, Y) =" in capsys.readouterr().out

    def test_missing_model(self, tmp_path):
        """Test a missing model file is a usage error."""
        assert main(["lt", str(tmp_path / "missing.json")]) == EXIT_USAGE

    def test_bad_lift(self, tmp_path):
        """Test an invalid lift is a usage error."""
        model = write_json(tmp_path / "m.json", {"p": 5, "f": [0, 5, 1], "D": 6})
        assert main(["lt", model]) == EXIT_USAGE


class TestSen:
    """Test senlab sen."""

    def test_character_action(self, tmp_path, capsys):
        """Test Theta = 2 for the character chi^2."""
        action = write_json(tmp_path / "a.json", {"kind": "character", "s": 2})
        assert main(["sen", action, "--D", "4", "--json"]) == EXIT_OK
        document = json.loads(capsys.readouterr().out)
        assert document["gamma"] == 6
        assert document["theta"]["spectrum"] == [2]
        assert document["kernel"] == []
        assert len(document["iota"]["coefficients"]) == 5

    def test_unipotent_kernel(self, tmp_path, capsys):
        """Test the unipotent action has a one-dimensional kernel."""
        action = write_json(tmp_path / "a.json", {"kind": "unipotent"})
        assert main(["sen", action, "--D", "2"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "kernel: (" in out
        assert "u^2:" in out

    def test_bad_action(self, tmp_path):
        """Test an unknown kind is a usage error."""
        action = write_json(tmp_path / "a.json", {"kind": "spiral"})
        assert main(["sen", action]) == EXIT_USAGE


class TestSl2:
    """Test senlab sl2 decompose."""

    def test_decompose_json(self, tmp_path, capsys):
        """Test the decomposition of Sym^2 + Sym^0."""
        rep = write_json(tmp_path / "r.json", {"sym": [2, 0]})
        assert main(["sl2", "decompose", rep, "--json"]) == EXIT_OK
        assert json.loads(capsys.readouterr().out) == {"dim": 4, "decomposition": [2, 0]}

    def test_decompose_text(self, tmp_path, capsys):
        """Test the human-readable decomposition."""
        rep = write_json(tmp_path / "r.json", {"sym": [1, 1]})
        assert main(["sl2", "decompose", rep]) == EXIT_OK
        assert "Sym^1 + Sym^1" in capsys.readouterr().out

    def test_not_a_representation(self, tmp_path):
        """Test broken relations are a usage error."""
        data = {"dim": 2, "D1": [[0, 0], [1, 0]], "D2": [[0, 1], [0, 0]], "H": [[-2, 0], [0, 2]]}
        rep = write_json(tmp_path / "r.json", data)
        assert main(["sl2", "decompose", rep]) == EXIT_USAGE
