"""Input files for the CLI and JSON report persistence."""

import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, List, Optional, Sequence, Union

from .errors import ParseError
from .linalg import Matrix, from_rows, identity
from .lubin_tate import LTFormalGroup, lt_build
from .models import LiftKind, SuiteReport
from .orbits import (
    AnalyticMatrixAction,
    character_action,
    exp_action,
    generator_character,
    trivial_action,
    unipotent_action,
)
from .padic import FieldDescriptor, PadicScalar, base_field, cyclotomic_field, unramified_field
from .series import RadiusIndexedSeries
from .sl2 import Sl2Triple, direct_sum, symk_matrices


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _read_json(path: PathLike) -> Any:
    path = Path(path)
    try:
        with open(path, 'r') as f:
            return json.load(f)
    except FileNotFoundError as e:
        raise ParseError(f"{path}: file not found") from e
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: malformed JSON ({e})") from e


def _require(data: Any, key: str, source: PathLike) -> Any:
    if not isinstance(data, dict):
        raise ParseError(f"{source}: expected a JSON object")
    if key not in data:
        raise ParseError(f"{source}: missing field {key!r}")
    return data[key]


def parse_field(p: int, spec: Any, precision: int) -> FieldDescriptor:
    """Field named in an input file.

    Accepted forms: "Qp" (or "Q5" for p = 5), "unramified:<f>",
    "cyclotomic:<level>", or the dictionary written by
    ``FieldDescriptor.to_dict``.
    """
    if isinstance(spec, dict):
        data = dict(spec)
        data.setdefault("p", p)
        if "uniformizer_precision" not in data:
            data.setdefault("precision", precision)
        return FieldDescriptor.from_dict(data)
    if not isinstance(spec, str):
        raise ParseError(f"field must be a string or an object, got {spec!r}")
    text = spec.strip()
    if text in ("Qp", f"Q{p}"):
        return base_field(p, precision)
    kind, _, arg = text.partition(":")
    try:
        n = int(arg)
    except ValueError:
        raise ParseError(f"unknown field {spec!r}") from None
    if kind == "unramified":
        return unramified_field(p, n, precision)
    if kind == "cyclotomic":
        return cyclotomic_field(p, n, precision)
    raise ParseError(f"unknown field {spec!r}")


def parse_scalar(fld: FieldDescriptor, raw: Any) -> PadicScalar:
    """A scalar given as an integer, a rational string or a canonical digit list."""
    try:
        if isinstance(raw, str) and "@v" in raw:
            return fld.from_text(raw)
        return fld(Fraction(str(raw)))
    except (ValueError, ZeroDivisionError) as e:
        raise ParseError(f"bad scalar {raw!r}: {e}") from e


def _parse_matrix(fld: FieldDescriptor, rows: Any, source: PathLike) -> Matrix:
    if not isinstance(rows, list) or not rows or any(not isinstance(r, list) for r in rows):
        raise ParseError(f"{source}: expected a non-empty list of rows")
    if any(len(r) != len(rows) for r in rows):
        raise ParseError(f"{source}: matrix must be square")
    return from_rows(fld, [[parse_scalar(fld, x) for x in row] for row in rows])


# -- Lubin-Tate models -----------------------------------------------------


@dataclass
class LTModel:
    """A Lubin-Tate model file: F, pi, the Frobenius lift and the degree D."""

    field: FieldDescriptor
    uniformizer: Optional[PadicScalar]
    lift: LiftKind
    degree: int
    f_coefficients: Optional[List[PadicScalar]] = None

    def build(self) -> LTFormalGroup:
        return lt_build(self.field, uniformizer=self.uniformizer, f_series=self.f_coefficients,
                        degree=self.degree, lift=self.lift)


def load_lt_model(path: PathLike, precision: int, default_degree: int) -> LTModel:
    """
    Read a model file such as {"p": 5, "F": "Qp", "pi": "5", "lift": "standard", "D": 12}.

    Args:
        path: Model file
        precision: N, unless the file sets "N"
        default_degree: D, unless the file sets "D"

    Raises:
        ParseError: Malformed JSON, missing or invalid fields
    """
    data = _read_json(path)
    p = _require(data, "p", path)
    try:
        p = int(p)
        N = int(data.get("N", precision))
        D = int(data.get("D", default_degree))
    except (TypeError, ValueError) as e:
        raise ParseError(f"{path}: {e}") from e
    fld = parse_field(p, data.get("F", "Qp"), N)

    f_coefficients = None
    if "f" in data:
        f_coefficients = [parse_scalar(fld, c) for c in data["f"]]
        lift = LiftKind.CUSTOM
    else:
        try:
            lift = LiftKind(data.get("lift", LiftKind.STANDARD.value))
        except ValueError:
            raise ParseError(f"{path}: unknown lift {data.get('lift')!r}") from None
        if lift is LiftKind.CUSTOM:
            raise ParseError(f"{path}: a custom lift needs its coefficients in \"f\"")

    pi = parse_scalar(fld, data["pi"]) if "pi" in data else None
    logger.debug(f"Loaded Lubin-Tate model from {path}: p={p}, N={N}, D={D}, lift={lift.value}")
    return LTModel(field=fld, uniformizer=pi, lift=lift, degree=D, f_coefficients=f_coefficients)


# -- actions ---------------------------------------------------------------


@dataclass
class ActionSpec:
    """An analytic matrix action with the generator gamma and the matrix d for iota."""

    action: AnalyticMatrixAction
    gamma: int
    d: Matrix


ACTION_KINDS = ("trivial", "character", "unipotent", "exp", "matrix")


def load_action(path: PathLike, p: int, precision: int, default_degree: int) -> ActionSpec:
    """
    Read an action file.

    The "kind" field picks the model: "trivial" (with "dim"), "character"
    (with "s"), "unipotent", "exp" (with "theta", a scalar matrix) or
    "matrix" (with "entries", series in canonical text form in T1).
    Optional fields: "p", "N", "F", "radius" (default 1), "degree", "gamma"
    (default 1 + p^radius) and "d" (default the identity).

    Raises:
        ParseError: Malformed JSON, unknown kind, missing or invalid fields
    """
    data = _read_json(path)
    kind = _require(data, "kind", path)
    if kind not in ACTION_KINDS:
        raise ParseError(f"{path}: unknown action kind {kind!r}, expected one of {', '.join(ACTION_KINDS)}")
    try:
        p = int(data.get("p", p))
        N = int(data.get("N", precision))
        radius = int(data.get("radius", 1))
        degree = int(data["degree"]) if "degree" in data else None
    except (TypeError, ValueError) as e:
        raise ParseError(f"{path}: {e}") from e
    fld = parse_field(p, data.get("F", "Qp"), N)

    try:
        action = _build_action(kind, data, fld, radius, degree, default_degree, path)
    except (TypeError, ValueError) as e:
        raise ParseError(f"{path}: {e}") from e

    try:
        gamma = int(data.get("gamma", generator_character(p, radius)))
    except (TypeError, ValueError) as e:
        raise ParseError(f"{path}: bad gamma: {e}") from e
    d = _parse_matrix(fld, data["d"], path) if "d" in data else identity(fld, action.dimension)
    if len(d) != action.dimension:
        raise ParseError(f"{path}: d is {len(d)}x{len(d)}, the action has dimension {action.dimension}")
    logger.debug(f"Loaded {kind} action from {path}: dimension {action.dimension}, radius {radius}")
    return ActionSpec(action=action, gamma=gamma, d=d)


def _build_action(kind: str, data: dict, fld: FieldDescriptor, radius: int, degree: Optional[int],
                  default_degree: int, path: PathLike) -> AnalyticMatrixAction:
    if kind == "trivial":
        return trivial_action(fld, int(_require(data, "dim", path)), radius, degree or 0)
    if kind == "character":
        return character_action(fld, int(_require(data, "s", path)), radius, degree)
    if kind == "unipotent":
        return unipotent_action(fld, radius, degree)
    if kind == "exp":
        return exp_action(_parse_matrix(fld, _require(data, "theta", path), path), radius, degree)
    rows = _require(data, "entries", path)
    if not isinstance(rows, list) or any(not isinstance(r, list) for r in rows):
        raise ParseError(f"{path}: entries must be a list of rows")
    D = default_degree if degree is None else degree
    return AnalyticMatrixAction([
        [RadiusIndexedSeries.from_text(fld, 1, radius, D, str(text)) for text in row]
        for row in rows])


# -- sl2 representations ---------------------------------------------------


def load_rep(path: PathLike) -> Sl2Triple:
    """
    Read a representation file.

    Either {"dim": n, "D1": ..., "D2": ..., "H": ...} with rational entries,
    or {"sym": [k1, k2, ...]} for a direct sum of symmetric powers.

    Raises:
        ParseError: Malformed JSON or matrices of the wrong shape
    """
    data = _read_json(path)
    if isinstance(data, dict) and "sym" in data:
        ks = data["sym"]
        if not isinstance(ks, list) or not ks or any(not isinstance(k, int) or k < 0 for k in ks):
            raise ParseError(f"{path}: \"sym\" must be a non-empty list of non-negative integers")
        return direct_sum(*(symk_matrices(k) for k in ks))
    try:
        return Sl2Triple.from_dict(data)
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"{path}: bad representation: {e}") from e


# -- reports ---------------------------------------------------------------


def report_document(reports: Sequence[SuiteReport], p: int, N: int, D: int, seed: int) -> dict:
    """The JSON document of a verify run. The thread count is not recorded."""
    return {
        "params": {"p": p, "N": N, "D": D, "seed": seed},
        "passed": all(r.passed for r in reports),
        "suites": [r.to_dict() for r in reports],
    }


def render_json(document: Any) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


class ReportPersistence:
    """
    Handles persistence of verification reports to disk.

    A report file holds the run parameters and one entry per suite.
    """

    def __init__(self, report_path: PathLike):
        """
        Initialize report persistence.

        Args:
            report_path: File the report is written to (parent directories are created)
        """
        self.report_path = Path(report_path)

    def save_document(self, document: Any) -> None:
        """Write any JSON document in canonical form."""
        self.report_path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.report_path, 'w') as f:
            f.write(render_json(document))
        logger.info(f"Wrote report to {self.report_path}")

    def save_reports(self, reports: Sequence[SuiteReport], p: int, N: int, D: int, seed: int) -> None:
        """
        Save suite reports to disk.

        Args:
            reports: Reports in canonical suite order
            p, N, D, seed: Run parameters recorded alongside
        """
        self.save_document(report_document(reports, p, N, D, seed))

    def load_reports(self) -> List[SuiteReport]:
        """
        Load suite reports from disk.

        Returns:
            Reports in file order, or an empty list when there is no file

        Raises:
            ParseError: The file exists but is not a report
        """
        if not self.report_path.exists():
            return []
        data = _read_json(self.report_path)
        try:
            return [SuiteReport.from_dict(s) for s in _require(data, "suites", self.report_path)]
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"{self.report_path}: bad report: {e}") from e
