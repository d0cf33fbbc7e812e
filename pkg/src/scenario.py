"""
Scenario Runner

Loads a JSON scenario, resolves its numeric settings and potentials, runs
its task through the verification scheduler and writes the report files.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from .config_manager import ConfigManager, NumericConfig
from .convex_core import ModelError
from .logging_config import get_logger
from .report import ReportWriter, RunReport, TaskOutcome
from .scheduler import ExecutionMode, VerificationScheduler, VerifyTask
from .suites import (
    SUITES,
    SuiteContext,
    c_checks,
    e_check_checks,
    envelope_checks,
    ray_checks,
    rwn_checks,
    segment_checks,
    verify_suite,
    with_anchors,
)
from .toric_model import ToricGeometry, ToricPotential
from .validation import TASK_ROLES, ValidationError, parse_scenario_text
from .zoo import parse_potential

logger = get_logger("scenario")

DEFAULT_RESULTS_DIR = "results"


@dataclass
class Scenario:
    """
    A validated scenario file

    Attributes:
        name: Run name (defaults to the file stem)
        task: segment | ray | envelope | e_check | rwn_compare | verify_all
        geometry: dim, n and optional window settings
        potentials: Potential specs by role
        schedules: Schedule overrides
        tolerances: Tolerance overrides
        out_dir: Directory the report files go to
        suite: Suite selector for verify_all
    """
    name: str
    task: str
    geometry: Dict[str, Any]
    potentials: Dict[str, Any] = field(default_factory=dict)
    schedules: Dict[str, Any] = field(default_factory=dict)
    tolerances: Dict[str, Any] = field(default_factory=dict)
    out_dir: str = ""
    suite: str = "all"

    @classmethod
    def from_mapping(cls, data: Dict[str, Any], default_name: str = "scenario") -> "Scenario":
        name = str(data.get('name') or default_name)
        outputs = data.get('outputs', {})
        scenario = cls(
            name=name,
            task=data['task'],
            geometry=dict(data['geometry']),
            potentials=dict(data.get('potentials', {})),
            schedules=dict(data.get('schedules', {})),
            tolerances=dict(data.get('tolerances', {})),
            out_dir=outputs.get('dir') or str(Path(DEFAULT_RESULTS_DIR) / name),
            suite=data.get('suite', 'all'),
        )
        if scenario.dim == 2 and scenario.task != 'segment':
            raise ValidationError("dimension 2 supports the segment task only", field='geometry.dim')
        if scenario.suite != 'all' and scenario.suite not in SUITES:
            raise ValidationError(f"unknown suite {scenario.suite!r}; expected 'all' or one of {', '.join(SUITES)}",
                                  field='suite')
        return scenario

    @property
    def dim(self) -> int:
        return int(self.geometry.get('dim', 1))

    def overrides(self) -> Dict[str, Any]:
        """Scenario sections as a ConfigManager override layer."""
        grid = {k: self.geometry[k] for k in ('n', 'window_L', 'window_m') if k in self.geometry}
        return {'grid': grid, 'schedules': dict(self.schedules), 'tolerances': dict(self.tolerances)}

    def numeric(self, config_file: Optional[str] = None) -> NumericConfig:
        return ConfigManager(config_file, overrides=self.overrides()).numeric()

    def build_potentials(self, geom: ToricGeometry) -> Dict[str, ToricPotential]:
        """
        Construct every potential the task reads

        Raises:
            ValidationError: a spec does not build on this geometry
        """
        built = {}
        for role in TASK_ROLES[self.task]:
            try:
                built[role] = parse_potential(geom, self.potentials[role])
            except (ValueError, ModelError) as e:
                raise ValidationError(str(e), field=f'potentials.{role}') from e
        return built


def load_scenario(path: str) -> Scenario:
    """
    Read and validate a scenario file

    Raises:
        ValidationError: unreadable file, bad JSON or schema problem
    """
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as e:
        raise ValidationError(f"cannot read scenario: {e.strerror or e}") from e
    data = parse_scenario_text(text)
    return Scenario.from_mapping(data, default_name=Path(path).stem)


def _task_outcome(scenario: Scenario, ctx: SuiteContext, pots: Dict[str, ToricPotential]) -> TaskOutcome:
    task = scenario.task
    if task == 'segment':
        return segment_checks(ctx, pots['phi0'], pots['phi1'])
    if task == 'ray':
        out = ray_checks(ctx, pots['phi'], pots['psi'])
        study = c_checks(ctx, pots['psi'])
        return TaskOutcome(out.checks + study.checks, out.tables + study.tables)
    if task == 'envelope':
        return envelope_checks(ctx, pots['psi'], pots['phi'])
    if task == 'e_check':
        return e_check_checks(ctx, pots['psi'], pots['phi'])
    if task == 'rwn_compare':
        return rwn_checks(ctx, pots['phi'], pots['psi'])
    raise ValueError(f"task {task!r} has no single-task runner")


def run_scenario(
    path: str,
    config_file: Optional[str] = None,
    out_dir: Optional[str] = None,
    scheduler: Optional[VerificationScheduler] = None,
    write: bool = True,
) -> RunReport:
    """
    Run one scenario file

    Args:
        path: Scenario JSON file
        config_file: Optional YAML layer below the scenario's own overrides
        out_dir: Output directory (overrides the scenario's ``outputs.dir``)
        scheduler: Scheduler to reuse
        write: Write CSV tables, summary and JSON report

    Returns:
        The assembled report

    Raises:
        ValidationError: the scenario does not parse, validate or build
    """
    scenario = load_scenario(path)
    config = scenario.numeric(config_file)
    scheduler = scheduler or VerificationScheduler(config.max_concurrent)
    logger.info("scenario %s: task %s at n=%d", scenario.name, scenario.task, config.n)

    if scenario.task == 'verify_all':
        report = verify_suite(scenario.suite, config, ExecutionMode.AUTO, scheduler)
        report.name = scenario.name
    else:
        ctx = SuiteContext(config, scenario.dim)
        pots = scenario.build_potentials(ctx.geom)
        task = VerifyTask(f"{scenario.task}.{scenario.name}", scenario.task,
                          lambda: with_anchors(_task_outcome(scenario, ctx, pots)),
                          description=", ".join(p.label for p in pots.values()))
        result = scheduler.run_sync([task], ExecutionMode.SERIAL)
        report = result.to_report(scenario.name, ctx.grid_metadata)
        report.grid['dim'] = scenario.dim

    if write:
        ReportWriter(out_dir or scenario.out_dir).write(report)
    return report


def table_names(report: RunReport) -> List[str]:
    return sorted(t.name for t in report.tables)


__all__ = ['Scenario', 'load_scenario', 'run_scenario', 'table_names', 'DEFAULT_RESULTS_DIR']
