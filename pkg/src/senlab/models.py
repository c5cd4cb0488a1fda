"""Shared enums and report models for senlab."""
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional


class FieldKind(Enum):
    """Kind of finite extension of Q_p carried by a field descriptor."""
    BASE = "base"  # Q_p itself
    CYCLOTOMIC = "cyclotomic"  # Q_p(zeta_{p^m})
    UNRAMIFIED = "unramified"  # Q_p[X]/(P), P irreducible mod p
    USER = "user"  # user polynomial, unramified or Eisenstein


class LiftKind(Enum):
    """Frobenius lift used to build a Lubin-Tate formal group."""
    STANDARD = "standard"  # pi*T + T^q
    MULTIPLICATIVE = "multiplicative"  # (1+T)^p - 1, only over Q_p with pi = p
    CUSTOM = "custom"  # user supplied polynomial


class SuiteName(Enum):
    """Verification suites the CLI can run."""
    PADIC = "padic"
    IDENTITIES = "identities"
    NORMS = "norms"
    CMAP = "cmap"
    RECONSTRUCT = "reconstruct"
    LUBIN_TATE = "lubin-tate"
    SL2 = "sl2"
    SEN = "sen"

    @classmethod
    def parse(cls, selector: str) -> List["SuiteName"]:
        """Expand a selector ("all" or a suite name) into suites in canonical order."""
        if selector == "all":
            return list(cls)
        return [cls(selector)]


@dataclass
class CaseFailure:
    """A single failed check inside a suite."""
    case: str
    inputs: str
    expected: str
    got: str
    discrepancy_valuation: Optional[str] = None

    def to_dict(self) -> dict:
        """Convert to dictionary for JSON serialization."""
        return {
            "case": self.case,
            "inputs": self.inputs,
            "expected": self.expected,
            "got": self.got,
            "discrepancy_valuation": self.discrepancy_valuation,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CaseFailure":
        """Create from dictionary (JSON deserialization)."""
        return cls(
            case=data["case"],
            inputs=data["inputs"],
            expected=data["expected"],
            got=data["got"],
            discrepancy_valuation=data.get("discrepancy_valuation"),
        )


@dataclass
class CaseResult:
    """Outcome of one named case: how many checks ran and which failed."""
    case: str
    checks: int = 0
    failures: List[CaseFailure] = field(default_factory=list)
    skipped: Optional[str] = None  # reason, when the case does not apply to this prime
    wall_time: float = 0.0

    def check(self, ok: bool, inputs: str, expected: str, got: str,
              discrepancy_valuation: Optional[object] = None) -> bool:
        """Count a check and record a failure when it did not hold."""
        self.checks += 1
        if not ok:
            self.failures.append(CaseFailure(
                case=self.case,
                inputs=inputs,
                expected=expected,
                got=got,
                discrepancy_valuation=None if discrepancy_valuation is None else str(discrepancy_valuation),
            ))
        return ok


@dataclass
class SuiteReport:
    """Aggregated result of one verification suite."""
    suite: SuiteName
    cases_run: int = 0
    failures: List[CaseFailure] = field(default_factory=list)
    skipped: List[str] = field(default_factory=list)
    wall_time: Optional[float] = None  # only reported with --timings

    @property
    def passed(self) -> bool:
        return not self.failures

    @classmethod
    def from_cases(cls, suite: SuiteName, results: List[CaseResult],
                   with_timings: bool = False) -> "SuiteReport":
        """Merge case results (already in canonical order) into a report."""
        report = cls(suite=suite)
        for result in results:
            if result.skipped:
                report.skipped.append(f"{result.case}: {result.skipped}")
                continue
            report.cases_run += result.checks
            report.failures.extend(result.failures)
        if with_timings:
            report.wall_time = round(sum(r.wall_time for r in results), 6)
        return report

    def to_dict(self) -> dict:
        """Convert to dictionary for JSON serialization."""
        data = {
            "suite": self.suite.value,
            "passed": self.passed,
            "cases_run": self.cases_run,
            "failures": [f.to_dict() for f in self.failures],
            "skipped": list(self.skipped),
        }
        if self.wall_time is not None:
            data["wall_time"] = self.wall_time
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "SuiteReport":
        """Create from dictionary (JSON deserialization)."""
        return cls(
            suite=SuiteName(data["suite"]),
            cases_run=data.get("cases_run", 0),
            failures=[CaseFailure.from_dict(f) for f in data.get("failures", [])],
            skipped=list(data.get("skipped", [])),
            wall_time=data.get("wall_time"),
        )
