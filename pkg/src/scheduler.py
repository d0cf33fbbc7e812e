"""
Verification Scheduler

Runs verify tasks (pure numeric callables) serially or concurrently and
assembles their outcomes in task-id order, so the report does not depend on
completion order.
"""

import asyncio
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional

from .convex_core import ModelError
from .logging_config import LogContext, get_logger
from .metrics import MetricsCollector
from .report import CheckResult, RunReport, TaskOutcome

logger = get_logger("scheduler")


class ExecutionMode(Enum):
    """Execution mode"""
    PARALLEL = "parallel"
    SERIAL = "serial"
    AUTO = "auto"


@dataclass
class VerifyTask:
    """
    One unit of verification work

    Attributes:
        id: Unique, sortable id (``suite.case``)
        suite: Suite the task belongs to
        run: Callable producing the task's checks and tables
        description: One line for logs
    """
    id: str
    suite: str
    run: Callable[[], TaskOutcome]
    description: str = ""


@dataclass
class TaskResult:
    task_id: str
    suite: str
    outcome: TaskOutcome
    duration: float
    error: Optional[str] = None

    @property
    def success(self) -> bool:
        return self.error is None and all(c.passed for c in self.outcome.checks)


@dataclass
class ExecutionResult:
    """Execution result, sorted by task id"""
    mode: ExecutionMode
    total_time: float
    task_count: int
    results: List[TaskResult] = field(default_factory=list)

    def to_report(self, name: str, grid: Dict[str, object]) -> RunReport:
        report = RunReport(name=name, grid=dict(grid))
        for result in self.results:
            report.add(result.task_id, result.outcome)
            report.timings[result.task_id] = result.duration
        report.timings['total'] = self.total_time
        return report


class VerificationScheduler:
    """
    Scheduler for verify tasks

    Tasks run in worker threads (``asyncio.to_thread``) under a semaphore of
    ``max_concurrent`` slots. A task raising :class:`ModelError` becomes a
    failed check instead of aborting the run.

    Example:
        >>> scheduler = VerificationScheduler(max_concurrent=4)
        >>> result = scheduler.run_sync(tasks, ExecutionMode.AUTO)
        >>> report = result.to_report("verify", {'n': 1024})
    """

    def __init__(
        self,
        max_concurrent: int = 4,
        metrics: Optional[MetricsCollector] = None,
    ) -> None:
        if max_concurrent < 1:
            raise ValueError("max_concurrent must be at least 1")
        self.max_concurrent = max_concurrent
        self.metrics = metrics or MetricsCollector()
        self.execution_history: List[ExecutionResult] = []

    def _run_one(self, task: VerifyTask) -> TaskResult:
        """Execute one task in the calling thread."""
        with LogContext(task_id=task.id, suite=task.suite):
            logger.debug("task %s started: %s", task.id, task.description)
            self.metrics.inc('tasks.started')
            start = time.perf_counter()
            error = None
            try:
                outcome = task.run()
            except ModelError as e:
                error = f"{type(e).__name__}: {e}"
                logger.warning("task %s failed: %s", task.id, error)
                outcome = TaskOutcome(checks=[CheckResult(
                    name=f"{task.suite}.task_completed",
                    invariant="task runs to completion",
                    residual=1.0,
                    threshold=0.0,
                    passed=False,
                    detail=error,
                )])
            duration = time.perf_counter() - start
            self.metrics.record_time(f'task.{task.suite}', duration)
            for check in outcome.checks:
                check.task_id = check.task_id or task.id
                self.metrics.inc('checks.passed' if check.passed else 'checks.failed')
            result = TaskResult(task.id, task.suite, outcome, duration, error)
            self.metrics.inc('tasks.completed' if result.success else 'tasks.failed')
            logger.info("task %s %s in %.2fs", task.id, "passed" if result.success else "FAILED", duration)
            return result

    async def execute_task(self, task: VerifyTask, semaphore: asyncio.Semaphore) -> TaskResult:
        async with semaphore:
            return await asyncio.to_thread(self._run_one, task)

    async def execute_parallel(self, tasks: List[VerifyTask]) -> ExecutionResult:
        logger.info("running %d tasks, up to %d at a time", len(tasks), self.max_concurrent)
        start = time.perf_counter()
        semaphore = asyncio.Semaphore(self.max_concurrent)
        results = await asyncio.gather(*[self.execute_task(t, semaphore) for t in tasks])
        return ExecutionResult(ExecutionMode.PARALLEL, time.perf_counter() - start, len(tasks),
                               sorted(results, key=lambda r: r.task_id))

    async def execute_serial(self, tasks: List[VerifyTask]) -> ExecutionResult:
        logger.info("running %d tasks serially", len(tasks))
        start = time.perf_counter()
        results = [self._run_one(t) for t in tasks]
        return ExecutionResult(ExecutionMode.SERIAL, time.perf_counter() - start, len(tasks),
                               sorted(results, key=lambda r: r.task_id))

    async def schedule(self, tasks: List[VerifyTask], mode: ExecutionMode = ExecutionMode.AUTO) -> ExecutionResult:
        """
        Run tasks

        Args:
            tasks: Task list with unique ids
            mode: AUTO runs concurrently when there is more than one task and
                more than one slot

        Returns:
            Execution result sorted by task id
        """
        if not tasks:
            raise ValueError("No tasks to execute")
        ids = [t.id for t in tasks]
        if len(set(ids)) != len(ids):
            raise ValueError("task ids must be unique")

        if mode == ExecutionMode.AUTO:
            parallel = len(tasks) > 1 and self.max_concurrent > 1
            mode = ExecutionMode.PARALLEL if parallel else ExecutionMode.SERIAL

        if mode == ExecutionMode.PARALLEL:
            result = await self.execute_parallel(tasks)
        elif mode == ExecutionMode.SERIAL:
            result = await self.execute_serial(tasks)
        else:
            raise ValueError(f"Unknown execution mode: {mode}")

        self.execution_history.append(result)
        return result

    def run_sync(self, tasks: List[VerifyTask], mode: ExecutionMode = ExecutionMode.AUTO) -> ExecutionResult:
        """Blocking entry point for the CLI."""
        return asyncio.run(self.schedule(tasks, mode))


__all__ = ['ExecutionMode', 'VerifyTask', 'TaskResult', 'ExecutionResult', 'VerificationScheduler']
