"""
Scenario Validation

Parses and validates scenario files before any numeric work starts.
"""

import json
import math
from typing import Any, Dict, List, Mapping, Optional, Tuple

from .zoo import ZOO


class ValidationError(Exception):
    """Scenario input error with a field path and, for JSON syntax, a position"""

    def __init__(
        self,
        message: str,
        field: Optional[str] = None,
        line: Optional[int] = None,
        column: Optional[int] = None,
    ):
        self.message = message
        self.field = field
        self.line = line
        self.column = column
        super().__init__(str(self))

    def __str__(self) -> str:
        where = []
        if self.line is not None:
            where.append(f"line {self.line}, column {self.column}")
        if self.field:
            where.append(f"field '{self.field}'")
        return f"{self.message} ({'; '.join(where)})" if where else self.message


# Roles each task reads from the scenario's "potentials" section
TASK_ROLES: Dict[str, Tuple[str, ...]] = {
    'segment': ('phi0', 'phi1'),
    'ray': ('phi', 'psi'),
    'envelope': ('psi', 'phi'),
    'e_check': ('psi', 'phi'),
    'rwn_compare': ('phi', 'psi'),
    'verify_all': (),
}


class ScenarioValidator:
    """
    Validator for scenario mappings

    Each ``validate_*`` method returns ``(is_valid, error)`` for one section;
    :meth:`validate_all` collects every problem with its field path.

    Example:
        >>> validator = ScenarioValidator()
        >>> errors = validator.validate_all({'schema_version': 1, 'task': 'ray'})
        >>> errors[0][0]
        'geometry'
    """

    SCHEMA_VERSION = 1

    TOP_LEVEL_KEYS = (
        'schema_version', 'name', 'geometry', 'potentials', 'task',
        'schedules', 'tolerances', 'outputs', 'suite',
    )

    GEOMETRY_KEYS = ('dim', 'n', 'window_L', 'window_m')

    # Grid sizes beyond these are not desk-scale runs
    MAX_POLYTOPE_N = 1 << 14
    MAX_WINDOW_M = 1 << 16

    def validate_schema_version(self, value: Any) -> Tuple[bool, str]:
        if not isinstance(value, int) or isinstance(value, bool):
            return False, "schema_version must be an integer"
        if value != self.SCHEMA_VERSION:
            return False, f"unsupported schema_version {value} (supported: {self.SCHEMA_VERSION})"
        return True, ""

    def validate_geometry(self, geometry: Any) -> List[Tuple[str, str]]:
        """
        Validate the geometry section

        Returns:
            List of (field path, error) pairs
        """
        if not isinstance(geometry, Mapping):
            return [('geometry', "must be an object")]
        errors = []
        for key in geometry:
            if key not in self.GEOMETRY_KEYS:
                errors.append((f'geometry.{key}', "unknown key"))
        dim = geometry.get('dim', 1)
        if dim not in (1, 2):
            errors.append(('geometry.dim', "must be 1 or 2"))
        n = geometry.get('n')
        if not _is_int(n) or not 2 <= n <= self.MAX_POLYTOPE_N:
            errors.append(('geometry.n', f"must be an integer in [2, {self.MAX_POLYTOPE_N}]"))
        if 'window_L' in geometry and not _is_positive(geometry['window_L']):
            errors.append(('geometry.window_L', "must be a positive number"))
        m = geometry.get('window_m')
        if m is not None and (not _is_int(m) or not 2 <= m <= self.MAX_WINDOW_M):
            errors.append(('geometry.window_m', f"must be an integer in [2, {self.MAX_WINDOW_M}]"))
        return errors

    def validate_potential(self, path: str, spec: Any) -> Tuple[bool, str]:
        """
        Validate one potential spec without building it

        Args:
            path: Field path used in the error
            spec: "NAME(arg)" text or a mapping
        """
        if isinstance(spec, str):
            name = spec.split('(', 1)[0].strip().upper()
            if name not in ZOO:
                return False, f"unknown zoo potential {name!r}; known: {', '.join(ZOO)}"
            return True, ""
        if isinstance(spec, Mapping):
            if 'table' in spec:
                table = spec['table']
                if not isinstance(table, list) or not table:
                    return False, "table must be a non-empty list"
                for v in table:
                    if v is not None and v != 'inf' and not _is_number(v):
                        return False, f"table entries must be numbers, null or 'inf' (got {v!r})"
                return True, ""
            name = str(spec.get('zoo', '')).upper()
            if name not in ZOO:
                return False, f"unknown zoo potential {name!r}; known: {', '.join(ZOO)}"
            if ZOO[name].params and not _is_number(spec.get('param')):
                return False, f"{name} needs a numeric param ({ZOO[name].params})"
            if 'shift' in spec and not _is_number(spec['shift']):
                return False, "shift must be a number"
            return True, ""
        return False, "must be a string or an object"

    def validate_task(self, task: Any) -> Tuple[bool, str]:
        if task not in TASK_ROLES:
            return False, f"unknown task {task!r}; expected one of {', '.join(TASK_ROLES)}"
        return True, ""

    def validate_tolerances(self, tolerances: Any) -> List[Tuple[str, str]]:
        if not isinstance(tolerances, Mapping):
            return [('tolerances', "must be an object")]
        return [
            (f'tolerances.{key}', "must be a positive number")
            for key, value in tolerances.items()
            if not _is_positive(value)
        ]

    def validate_schedules(self, schedules: Any) -> List[Tuple[str, str]]:
        if not isinstance(schedules, Mapping):
            return [('schedules', "must be an object")]
        errors = []
        for key in ('l', 'c'):
            if key in schedules:
                values = schedules[key]
                if (not isinstance(values, list) or len(values) < 3
                        or not all(_is_positive(v) for v in values)
                        or any(b <= a for a, b in zip(values, values[1:]))):
                    errors.append((f'schedules.{key}', "must be an increasing list of at least 3 positive numbers"))
        for key in ('t_samples', 'tau'):
            if key in schedules:
                block = schedules[key]
                if not isinstance(block, Mapping):
                    errors.append((f'schedules.{key}', "must be an object with count and span"))
                    continue
                count, span = block.get('count'), block.get('span')
                if count is not None and (not _is_int(count) or count < 2):
                    errors.append((f'schedules.{key}.count', "must be an integer >= 2"))
                if span is not None and (not isinstance(span, list) or len(span) != 2
                                         or not all(_is_number(v) for v in span) or span[1] <= span[0]):
                    errors.append((f'schedules.{key}.span', "must be [lo, hi] with lo < hi"))
        for key in ('ray_l_max_exponent', 'c_max_exponent', 'test_curve_tail_exponent'):
            if key in schedules and (not _is_int(schedules[key]) or schedules[key] < 2):
                errors.append((f'schedules.{key}', "must be an integer >= 2"))
        return errors

    def validate_outputs(self, outputs: Any) -> Tuple[bool, str]:
        if not isinstance(outputs, Mapping):
            return False, "must be an object"
        out_dir = outputs.get('dir')
        if out_dir is not None and (not isinstance(out_dir, str) or not out_dir.strip()):
            return False, "dir must be a non-empty string"
        if isinstance(out_dir, str) and '..' in out_dir.replace('\\', '/').split('/'):
            return False, "dir cannot contain '..'"
        return True, ""

    def validate_all(self, data: Any) -> List[Tuple[str, str]]:
        """
        Validate a whole scenario mapping

        Returns:
            List of (field path, error) pairs, empty if valid
        """
        if not isinstance(data, Mapping):
            return [('', "scenario must be a JSON object")]
        errors: List[Tuple[str, str]] = []
        for key in data:
            if key not in self.TOP_LEVEL_KEYS:
                errors.append((key, "unknown key"))

        ok, error = self.validate_schema_version(data.get('schema_version'))
        if not ok:
            errors.append(('schema_version', error))
        if 'geometry' not in data:
            errors.append(('geometry', "missing"))
        else:
            errors.extend(self.validate_geometry(data['geometry']))

        task = data.get('task')
        ok, error = self.validate_task(task)
        if not ok:
            errors.append(('task', error))

        potentials = data.get('potentials', {})
        if not isinstance(potentials, Mapping):
            errors.append(('potentials', "must be an object"))
        else:
            for role, spec in potentials.items():
                ok, error = self.validate_potential(f'potentials.{role}', spec)
                if not ok:
                    errors.append((f'potentials.{role}', error))
            for role in TASK_ROLES.get(task, ()):
                if role not in potentials:
                    errors.append((f'potentials.{role}', f"required by task {task!r}"))

        if 'tolerances' in data:
            errors.extend(self.validate_tolerances(data['tolerances']))
        if 'schedules' in data:
            errors.extend(self.validate_schedules(data['schedules']))
        if 'suite' in data and (task != 'verify_all' or not isinstance(data['suite'], str)):
            errors.append(('suite', "only a verify_all task takes a suite name"))
        if 'outputs' in data:
            ok, error = self.validate_outputs(data['outputs'])
            if not ok:
                errors.append(('outputs', error))
        return errors


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_positive(value: Any) -> bool:
    return _is_number(value) and value > 0


def parse_scenario_text(text: str) -> Dict[str, Any]:
    """
    Parse and validate scenario JSON

    Raises:
        ValidationError: JSON syntax error (with line/column) or the first
            schema problem (with its field path)
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"invalid JSON: {e.msg}", line=e.lineno, column=e.colno) from e
    errors = get_validator().validate_all(data)
    if errors:
        field, message = errors[0]
        extra = f" (+{len(errors) - 1} more)" if len(errors) > 1 else ""
        raise ValidationError(message + extra, field=field or None)
    return data


# Global validator instance
_global_validator: Optional[ScenarioValidator] = None


def get_validator() -> ScenarioValidator:
    """Get global ScenarioValidator instance"""
    global _global_validator
    if _global_validator is None:
        _global_validator = ScenarioValidator()
    return _global_validator


__all__ = [
    'ValidationError',
    'ScenarioValidator',
    'TASK_ROLES',
    'parse_scenario_text',
    'get_validator',
]
