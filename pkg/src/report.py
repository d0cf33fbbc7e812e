"""
Run Reports

Check results, tables and the writer that turns a run into files:
one CSV per table, ``summary.txt`` and ``report.json``.

CSV tables are the reproducible contract: ``,`` separator, ``.`` decimal,
LF line endings and ``repr`` floats (shortest round-trip form). Timings stay
out of them.
"""

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Sequence

import numpy as np

from .logging_config import get_logger

logger = get_logger("report")


@dataclass
class CheckResult:
    """
    One asserted invariant

    Attributes:
        name: Dotted ``module.invariant`` id, e.g. ``energy.c_two_path``
        invariant: What is asserted, in words
        residual: Measured quantity compared against ``threshold``
        threshold: Largest (or, with ``at_least``, smallest) acceptable residual
        passed: Outcome
        task_id: Task that produced the check
        detail: Case description or the error that failed the task
        anchor: Statement the check instantiates, e.g. ``Thm 2.1``
    """

    name: str
    invariant: str
    residual: float
    threshold: float
    passed: bool
    task_id: str = ""
    detail: str = ""
    anchor: str = ""

    @classmethod
    def at_most(cls, name: str, invariant: str, residual: float, threshold: float,
                detail: str = "", anchor: str = "") -> "CheckResult":
        return cls(name, invariant, float(residual), float(threshold),
                   bool(residual <= threshold), detail=detail, anchor=anchor)

    @classmethod
    def at_least(cls, name: str, invariant: str, residual: float, threshold: float,
                 detail: str = "", anchor: str = "") -> "CheckResult":
        return cls(name, invariant, float(residual), float(threshold),
                   bool(residual >= threshold), detail=detail, anchor=anchor)

    @classmethod
    def holds(cls, name: str, invariant: str, ok: bool, detail: str = "",
              anchor: str = "") -> "CheckResult":
        return cls(name, invariant, 0.0 if ok else 1.0, 0.0, bool(ok), detail=detail, anchor=anchor)

    @property
    def module(self) -> str:
        return self.name.split('.', 1)[0]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'invariant': self.invariant,
            'residual': _json_float(self.residual),
            'threshold': _json_float(self.threshold),
            'passed': self.passed,
            'task_id': self.task_id,
            'detail': self.detail,
            'anchor': self.anchor,
        }


@dataclass
class Table:
    """A named table with fixed headers."""

    name: str
    headers: Sequence[str]
    rows: List[Dict[str, Any]] = field(default_factory=list)

    def add(self, **row: Any) -> None:
        self.rows.append(row)


@dataclass
class TaskOutcome:
    """What one task contributes to a report."""

    checks: List[CheckResult] = field(default_factory=list)
    tables: List[Table] = field(default_factory=list)


@dataclass
class RunReport:
    """
    Result of a scenario run or a verify suite

    ``checks`` and ``tables`` are sorted by task id when the report is
    assembled, so two runs of the same inputs give identical files.
    """

    name: str
    grid: Dict[str, Any] = field(default_factory=dict)
    checks: List[CheckResult] = field(default_factory=list)
    tables: List[Table] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def add(self, task_id: str, outcome: TaskOutcome) -> None:
        for check in outcome.checks:
            check.task_id = check.task_id or task_id
            self.checks.append(check)
        self.tables.extend(outcome.tables)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'passed': self.passed,
            'grid': self.grid,
            'checks': [c.to_dict() for c in self.checks],
            'anchors': {anchor: all(c.passed for c in checks)
                        for anchor, checks in self.by_anchor().items()},
            'tables': sorted(t.name for t in self.tables),
            'timings': self.timings,
        }

    def by_anchor(self) -> Dict[str, List[CheckResult]]:
        """Checks grouped by anchor, in order of first appearance; unanchored checks are left out."""
        groups: Dict[str, List[CheckResult]] = {}
        for c in self.checks:
            if c.anchor:
                groups.setdefault(c.anchor, []).append(c)
        return groups

    def anchor_lines(self) -> List[str]:
        """
        One line per anchor: passed count and the deciding check

        The deciding check is the first failure, or the largest residual
        when everything passed.
        """
        lines = []
        for anchor, checks in self.by_anchor().items():
            failed = [c for c in checks if not c.passed]
            worst = failed[0] if failed else max(checks, key=lambda c: c.residual)
            passed = len(checks) - len(failed)
            lines.append(
                f"  {anchor}: {passed}/{len(checks)} passed, {worst.name} "
                f"residual={_fmt(worst.residual)} threshold={_fmt(worst.threshold)}"
            )
        return lines

    def summary_lines(self) -> List[str]:
        """Human-readable summary: one line per check, then one per anchor."""
        lines = [
            f"run: {self.name}",
            "grid: " + ", ".join(f"{k}={v}" for k, v in sorted(self.grid.items())),
            "",
        ]
        width = max((len(c.name) for c in self.checks), default=10)
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            line = f"[{status}] {c.name:<{width}}  residual={_fmt(c.residual)}  threshold={_fmt(c.threshold)}"
            if c.task_id:
                line += f"  task={c.task_id}"
            lines.append(line)
            if not c.passed:
                where = f"{c.invariant} [{c.anchor}]" if c.anchor else c.invariant
                lines.append(f"       {where}" + (f": {c.detail}" if c.detail else ""))
        anchors = self.anchor_lines()
        if anchors:
            lines.append("")
            lines.append("anchors:")
            lines.extend(anchors)
        lines.append("")
        lines.append(f"checks: {len(self.checks) - len(self.failures)}/{len(self.checks)} passed")
        lines.append(f"result: {'PASS' if self.passed else 'FAIL'}")
        return lines


def _fmt(value: float) -> str:
    return f"{value:.3e}" if math.isfinite(value) else str(value)


def _json_float(value: float) -> Any:
    # JSON has no infinities
    return value if math.isfinite(value) else str(value)


def format_cell(value: Any) -> str:
    """CSV cell text: floats via repr, everything else via str."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    if value is None:
        return ""
    return str(value)


class ReportWriter:
    """
    Writes a RunReport into a directory

    Example:
        >>> writer = ReportWriter("results/ray_nu03")
        >>> paths = writer.write(report)
    """

    def __init__(self, out_dir: str):
        self.out_dir = Path(out_dir)

    def write_table(self, table: Table) -> Path:
        path = self.out_dir / f"{table.name}.csv"
        with open(path, 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f, delimiter=',', lineterminator='\n')
            writer.writerow(list(table.headers))
            for row in table.rows:
                writer.writerow([format_cell(row.get(h)) for h in table.headers])
        return path

    def write(self, report: RunReport, include_timings: bool = True) -> List[Path]:
        """
        Write every table, the summary and the JSON report

        Args:
            report: Assembled run report
            include_timings: Put wall-clock data into summary and JSON

        Returns:
            Paths written, tables first
        """
        self.out_dir.mkdir(parents=True, exist_ok=True)
        paths = []
        seen = set()
        for table in report.tables:
            if table.name in seen:
                raise ValueError(f"duplicate table name {table.name!r}")
            seen.add(table.name)
            paths.append(self.write_table(table))

        lines = report.summary_lines()
        if include_timings and report.timings:
            lines.append("")
            lines.append("timings:")
            lines.extend(f"  {k}: {v:.2f}s" for k, v in sorted(report.timings.items()))
        summary = self.out_dir / "summary.txt"
        summary.write_text("\n".join(lines) + "\n", encoding="utf-8")
        paths.append(summary)

        payload = report.to_dict()
        if not include_timings:
            payload.pop('timings')
        json_path = self.out_dir / "report.json"
        json_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        paths.append(json_path)
        logger.info("wrote %d files to %s", len(paths), self.out_dir)
        return paths


def load_csv(path: str) -> List[Dict[str, str]]:
    """Read a table back (tests and external scripts)."""
    with open(path, newline='', encoding='utf-8') as f:
        return list(csv.DictReader(f))


__all__ = [
    'CheckResult', 'Table', 'TaskOutcome', 'RunReport', 'ReportWriter',
    'format_cell', 'load_csv',
]
