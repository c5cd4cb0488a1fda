"""Main entry point for the senlab command line."""

import argparse
import logging
import sys
from typing import Callable, List, Optional, Sequence

from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table
from rich.text import Text

from .config import Config
from .errors import SenlabError, UnknownSuite
from .linalg import to_text
from .lubin_tate import lt_torsion_slopes
from .models import CaseResult, SuiteName, SuiteReport
from .persistence import (
    ReportPersistence,
    load_action,
    load_lt_model,
    load_rep,
    render_json,
    report_document,
)
from .sen import iota, sen_kernel, sen_operator
from .sl2 import isotypic_decompose
from .suite_runner import run_suites
from .suites import SuiteContext


logger = logging.getLogger("senlab")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with the shared flags accepted after every subcommand."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, help="prime (default from config, 5)")
    common.add_argument("--N", type=int,
                        help="absolute precision in powers of p (default 20); "
                             "a field of ramification index e carries e*N uniformizer digits")
    common.add_argument("--D", type=int, help="series truncation degree (default 12)")
    common.add_argument("--seed", type=int, help="seed for every random sample (default 0)")
    common.add_argument("--out", help="also write the JSON report to this file")
    common.add_argument("--json", action="store_true", help="print the JSON report instead of tables")
    common.add_argument("--verbose", "-v", action="store_true", help="debug logging on stderr")
    common.add_argument("--timings", action="store_true", help="include wall times in reports")
    common.add_argument("--threads", type=int, help="worker threads (overrides the config file and SENLAB_THREADS)")

    parser = argparse.ArgumentParser(
        prog="senlab",
        description="p-adic Sen theory calculator and identity verifier.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    verify = commands.add_parser("verify", parents=[common], help="run identity suites")
    verify.add_argument("suite", help=f"all, or one of: {', '.join(s.value for s in SuiteName)}")

    lt = commands.add_parser("lt", parents=[common], help="report on a Lubin-Tate model file")
    lt.add_argument("model", help="model file, e.g. {\"p\": 5, \"F\": \"Qp\", \"lift\": \"standard\"}")
    lt.add_argument("--level", type=_positive_int, default=1, help="torsion levels 1..n to report (default 1)")

    sen = commands.add_parser("sen", parents=[common], help="Sen operator of an action file")
    sen.add_argument("action", help="action file")

    sl2 = commands.add_parser("sl2", help="sl2 representations")
    sl2_commands = sl2.add_subparsers(dest="sl2_command", required=True)
    decompose = sl2_commands.add_parser("decompose", parents=[common], help="isotypic decomposition")
    decompose.add_argument("rep", help="representation file with dim, D1, D2, H")

    return parser


def setup_logging(verbose: bool) -> None:
    """Route log records to stderr through rich; stdout carries reports only."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def resolve_config(args: argparse.Namespace) -> Config:
    """Stored configuration with command-line flags applied on top."""
    config = Config.load()
    for name in ("p", "N", "D", "seed", "threads"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(config, name, value)
    return config


def _emit(args: argparse.Namespace, document: dict, render: Callable[[Console], None]) -> None:
    if args.out:
        ReportPersistence(args.out).save_document(document)
    if args.json:
        sys.stdout.write(render_json(document))
        sys.stdout.flush()
    else:
        render(Console(markup=False, highlight=False))


# -- verify ----------------------------------------------------------------


def _log_case(suite: SuiteName, result: CaseResult) -> None:
    status = "skipped" if result.skipped else f"{len(result.failures)} of {result.checks} failed"
    logger.debug(f"{suite.value}/{result.case}: {status} in {result.wall_time:.3f}s")


def _render_reports(reports: Sequence[SuiteReport]) -> Callable[[Console], None]:
    def render(console: Console) -> None:
        table = Table(title="senlab verify")
        table.add_column("suite")
        table.add_column("checks", justify="right")
        table.add_column("failures", justify="right")
        table.add_column("skipped", justify="right")
        table.add_column("status")
        for r in reports:
            status = Text("pass", style="green") if r.passed else Text("FAIL", style="bold red")
            table.add_row(r.suite.value, str(r.cases_run), str(len(r.failures)), str(len(r.skipped)), status)
        console.print(table)
        for r in reports:
            for failure in r.failures:
                console.print(f"{r.suite.value}/{failure.case}: {failure.inputs}: "
                              f"expected {failure.expected}, got {failure.got}"
                              + (f" (valuation {failure.discrepancy_valuation})"
                                 if failure.discrepancy_valuation is not None else ""))
    return render


def run_verify(args: argparse.Namespace, config: Config) -> int:
    """Run the selected suites; 0 when every check passes, 1 otherwise."""
    try:
        suites = SuiteName.parse(args.suite)
    except ValueError:
        raise UnknownSuite(
            f"unknown suite {args.suite!r}; expected all or one of {', '.join(s.value for s in SuiteName)}"
        ) from None
    ctx = SuiteContext(p=config.p, N=config.N, D=config.D, seed=config.seed)
    threads = config.worker_count()
    logger.info(f"Running {', '.join(s.value for s in suites)} with p={ctx.p}, N={ctx.N}, D={ctx.D}, "
                f"seed={ctx.seed} on {threads} threads")

    reports = run_suites(ctx, suites, threads=threads, with_timings=args.timings, on_case_done=_log_case)
    document = report_document(reports, ctx.p, ctx.N, ctx.D, ctx.seed)
    _emit(args, document, _render_reports(reports))
    return EXIT_OK if document["passed"] else EXIT_FAILURE


# -- lt --------------------------------------------------------------------


def run_lt(args: argparse.Namespace, config: Config) -> int:
    """Group law, endomorphism samples and torsion slopes of a model file."""
    model = load_lt_model(args.model, config.N, config.D)
    G = model.build()
    samples = [G.uniformizer, G.base(2), G.base(-1)]
    slopes = {str(n): [s.to_dict() for s in lt_torsion_slopes(G, n)] for n in range(1, args.level + 1)}
    document = {
        "model": {
            "field": G.base.to_dict(),
            "pi": G.uniformizer.to_text(),
            "q": G.q,
            "lift": G.lift.value,
            "D": G.degree,
        },
        "group_law": G.group_law.to_text(),
        "endomorphisms": [G.endomorphism(a).to_dict() for a in samples],
        "torsion_slopes": slopes,
    }

    def render(console: Console) -> None:
        console.print(f"Lubin-Tate group, q = {G.q}, lift {G.lift.value}, degree {G.degree}")
        console.print(f"F(X, Y) = {G.group_law.to_text()}")
        for endo in document["endomorphisms"]:
            console.print(f"[{endo['a']}](T) = {endo['series']}")
        table = Table(title="torsion slopes")
        table.add_column("level", justify="right")
        table.add_column("slope", justify="right")
        table.add_column("multiplicity", justify="right")
        for level, entries in slopes.items():
            for entry in entries:
                table.add_row(level, entry["slope"], str(entry["multiplicity"]))
        console.print(table)

    _emit(args, document, render)
    return EXIT_OK


# -- sen -------------------------------------------------------------------


def run_sen(args: argparse.Namespace, config: Config) -> int:
    """Theta, its spectrum and kernel, and the iota expansion to degree D."""
    spec = load_action(args.action, config.p, config.N, config.D)
    theta = sen_operator(spec.action, spec.gamma)
    kernel_basis = sen_kernel(theta)
    expansion = iota(spec.d, theta, config.D)
    document = {
        "gamma": spec.gamma,
        "theta": theta.to_dict(),
        "kernel": [[x.to_text() for x in v] for v in kernel_basis],
        "iota": expansion.to_dict(),
    }

    def render(console: Console) -> None:
        console.print(f"Theta = {to_text(theta.theta)}")
        console.print(f"spectrum: {theta.spectrum if theta.spectrum is not None else 'not integral'}")
        if kernel_basis:
            for v in kernel_basis:
                console.print(f"kernel: ({', '.join(x.to_text() for x in v)})")
        else:
            console.print("kernel: 0")
        for j, c in enumerate(expansion.coefficients):
            console.print(f"u^{j}: {to_text(c)}")

    _emit(args, document, render)
    return EXIT_OK


# -- sl2 -------------------------------------------------------------------


def run_sl2_decompose(args: argparse.Namespace, config: Config) -> int:
    """Multiset {k} with rep = sum of Sym^k."""
    rep = load_rep(args.rep)
    multiset = isotypic_decompose(rep)
    document = {"dim": rep.dimension, "decomposition": multiset}

    def render(console: Console) -> None:
        console.print(" + ".join(f"Sym^{k}" for k in multiset))

    _emit(args, document, render)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    config = resolve_config(args)

    handlers = {
        "verify": run_verify,
        "lt": run_lt,
        "sen": run_sen,
        "sl2": run_sl2_decompose,
    }
    try:
        return handlers[args.command](args, config)
    except SenlabError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
