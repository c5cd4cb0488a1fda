"""Concurrent runner for verification suites."""

import asyncio
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .models import CaseFailure, CaseResult, SuiteName, SuiteReport
from .suites import CaseFn, SuiteContext, cases_for, run_case


logger = logging.getLogger(__name__)


class SuiteRunner:
    """
    Runs the cases of one or more suites on a pool of worker threads.

    Every case is its own task; results are collected by (suite, position)
    so reports come out in canonical order whatever order cases finish in.
    """

    def __init__(
        self,
        ctx: SuiteContext,
        max_concurrent: Optional[int] = None,
        with_timings: bool = False,
    ):
        """
        Initialize the runner.

        Args:
            ctx: Parameters shared by every case
            max_concurrent: Optional limit on cases running at once (and worker threads)
            with_timings: Record wall time in the reports
        """
        self.ctx = ctx
        self.max_concurrent = max_concurrent
        self.with_timings = with_timings

        self.active_tasks: Dict[str, asyncio.Task] = {}
        self.results: Dict[Tuple[SuiteName, int], CaseResult] = {}

        # Optional concurrency limiter
        self.semaphore = asyncio.Semaphore(max_concurrent) if max_concurrent else None
        self._executor = ThreadPoolExecutor(max_workers=max_concurrent, thread_name_prefix="senlab-case")

        # Callback for progress display
        self._on_case_done_callback: Optional[Callable[[SuiteName, CaseResult], None]] = None

    def set_on_case_done_callback(self, callback: Callable[[SuiteName, CaseResult], None]) -> None:
        """Set callback to be called when a case finishes."""
        self._on_case_done_callback = callback

    def submit(self, suite: SuiteName) -> int:
        """
        Start every case of a suite.

        Args:
            suite: Suite to run

        Returns:
            Number of cases started
        """
        cases = cases_for(suite)
        for index, (name, fn) in enumerate(cases):
            key = f"{suite.value}/{name}"
            task = asyncio.create_task(self._process_case(suite, index, name, fn))
            self.active_tasks[key] = task
        logger.info(f"Suite {suite.value}: {len(cases)} cases submitted")
        return len(cases)

    async def _process_case(self, suite: SuiteName, index: int, name: str, fn: CaseFn) -> None:
        """Run one case (concurrently with the others)."""
        key = f"{suite.value}/{name}"

        try:
            if self.semaphore:
                async with self.semaphore:
                    await self._do_process_case(suite, index, name, fn)
            else:
                await self._do_process_case(suite, index, name, fn)

        except Exception as e:
            logger.error(f"Case {key} failed: {e}", exc_info=True)
            result = CaseResult(case=name, checks=1)
            result.failures.append(CaseFailure(
                case=name,
                inputs=f"p={self.ctx.p}, N={self.ctx.N}, D={self.ctx.D}, seed={self.ctx.seed}",
                expected="case completes",
                got=f"{type(e).__name__}: {e}",
            ))
            self.results[(suite, index)] = result
            self._notify_case_done(suite, result)

        finally:
            if key in self.active_tasks:
                del self.active_tasks[key]

    async def _do_process_case(self, suite: SuiteName, index: int, name: str, fn: CaseFn) -> None:
        """Hand the case to a worker thread (separate for semaphore handling)."""
        loop = asyncio.get_running_loop()
        result = await loop.run_in_executor(self._executor, run_case, self.ctx, suite, name, fn)
        self.results[(suite, index)] = result
        self._notify_case_done(suite, result)

    def _notify_case_done(self, suite: SuiteName, result: CaseResult) -> None:
        if self._on_case_done_callback:
            try:
                self._on_case_done_callback(suite, result)
            except Exception as e:
                logger.error(f"Progress callback failed for {suite.value}/{result.case}: {e}")

    def get_active_count(self) -> int:
        """Number of cases not yet finished."""
        return len(self.active_tasks)

    async def wait_for_all(self) -> None:
        """Wait for all submitted cases to complete."""
        if self.active_tasks:
            await asyncio.gather(*list(self.active_tasks.values()), return_exceptions=True)

    def report(self, suite: SuiteName) -> SuiteReport:
        """Report for a suite from the results collected so far, in canonical order."""
        results = [self.results[(suite, i)] for i in range(len(cases_for(suite)))
                   if (suite, i) in self.results]
        return SuiteReport.from_cases(suite, results, self.with_timings)

    async def run(self, suites: Sequence[SuiteName]) -> List[SuiteReport]:
        """Run the suites and return their reports in the order given."""
        for suite in suites:
            self.submit(suite)
        await self.wait_for_all()
        return [self.report(suite) for suite in suites]

    async def shutdown(self) -> None:
        """Cancel pending cases and release the worker threads."""
        tasks = list(self.active_tasks.values())
        for task in tasks:
            if not task.done():
                task.cancel()

        if tasks:
            await asyncio.gather(*tasks, return_exceptions=True)

        self.active_tasks.clear()
        # running cases cannot be interrupted; queued ones are dropped
        self._executor.shutdown(wait=False, cancel_futures=True)


def run_suites(ctx: SuiteContext, suites: Sequence[SuiteName], threads: Optional[int] = None,
               with_timings: bool = False,
               on_case_done: Optional[Callable[[SuiteName, CaseResult], None]] = None) -> List[SuiteReport]:
    """Blocking entry point: run suites on ``threads`` workers and return their reports."""

    async def main() -> List[SuiteReport]:
        runner = SuiteRunner(ctx, max_concurrent=threads, with_timings=with_timings)
        if on_case_done:
            runner.set_on_case_done_callback(on_case_done)
        try:
            return await runner.run(suites)
        finally:
            await runner.shutdown()

    return asyncio.run(main())
