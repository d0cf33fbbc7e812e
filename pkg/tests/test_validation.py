"""
Tests for scenario validation
"""

import json

import pytest

from src.validation import ScenarioValidator, ValidationError, get_validator, parse_scenario_text


def scenario(**overrides):
    data = {
        'schema_version': 1,
        'name': 'ray-nu',
        'geometry': {'dim': 1, 'n': 64, 'window_L': 8.0, 'window_m': 256},
        'potentials': {'phi': 'ZERO', 'psi': 'NU(0.25)'},
        'task': 'ray',
    }
    data.update(overrides)
    return data


class TestScenarioValidator:
    """Test section validators"""

    def setup_method(self):
        self.validator = ScenarioValidator()

    def test_valid_scenario(self):
        """Test a complete ray scenario"""
        assert self.validator.validate_all(scenario()) == []

    def test_schema_version(self):
        """Test integer versions only"""
        assert self.validator.validate_schema_version(1) == (True, "")
        assert not self.validator.validate_schema_version(2)[0]
        assert not self.validator.validate_schema_version(True)[0]
        assert not self.validator.validate_schema_version("1")[0]

    def test_geometry(self):
        """Test grid sizes and unknown keys"""
        errors = self.validator.validate_geometry({'dim': 3, 'n': 1, 'window_m': 1, 'depth': 2})
        fields = {field for field, _ in errors}

        assert fields == {'geometry.dim', 'geometry.n', 'geometry.window_m', 'geometry.depth'}
        assert self.validator.validate_geometry([]) == [('geometry', "must be an object")]

    def test_potentials(self):
        """Test zoo text, mappings and tables"""
        assert self.validator.validate_potential('p', 'NU(0.3)')[0]
        assert self.validator.validate_potential('p', {'zoo': 'CONST', 'param': -1})[0]
        assert self.validator.validate_potential('p', {'table': [0.0, 'inf', None]})[0]

        assert not self.validator.validate_potential('p', 'SPIKE(2)')[0]
        assert not self.validator.validate_potential('p', {'zoo': 'NU'})[0]
        assert not self.validator.validate_potential('p', {'table': []})[0]
        assert not self.validator.validate_potential('p', {'table': ['x']})[0]
        assert not self.validator.validate_potential('p', {'zoo': 'ZERO', 'shift': 'up'})[0]
        assert not self.validator.validate_potential('p', 3)[0]

    def test_missing_roles(self):
        """Test roles required by the task"""
        errors = self.validator.validate_all(scenario(potentials={'phi': 'ZERO'}))

        assert ('potentials.psi', "required by task 'ray'") in errors

    def test_unknown_task(self):
        """Test task names"""
        errors = self.validator.validate_all(scenario(task='flow'))

        assert errors[0][0] == 'task'

    def test_schedules(self):
        """Test schedule lists and sample blocks"""
        good = {'l': [1, 2, 4], 't_samples': {'count': 9, 'span': [0, 4]}, 'ray_l_max_exponent': 8}
        assert self.validator.validate_schedules(good) == []

        bad = {
            'l': [1, 1, 2],
            'c': [1, 2],
            'tau': {'count': 1, 'span': [1, 0]},
            't_samples': 5,
            'c_max_exponent': 1,
        }
        fields = {field for field, _ in self.validator.validate_schedules(bad)}
        assert fields == {
            'schedules.l', 'schedules.c', 'schedules.tau.count', 'schedules.tau.span',
            'schedules.t_samples', 'schedules.c_max_exponent',
        }

    def test_tolerances(self):
        """Test tolerances must be positive"""
        errors = self.validator.validate_tolerances({'tol_c': 0.0, 'am_chord': 1e-3, 'dual': float('nan')})

        assert [field for field, _ in errors] == ['tolerances.tol_c', 'tolerances.dual']

    def test_outputs(self):
        """Test output directories"""
        assert self.validator.validate_outputs({'dir': 'runs/a'})[0]
        assert not self.validator.validate_outputs({'dir': '../a'})[0]
        assert not self.validator.validate_outputs({'dir': ' '})[0]
        assert not self.validator.validate_outputs([])[0]

    def test_suite_only_for_verify_all(self):
        """Test the suite key"""
        assert ('suite', "only a verify_all task takes a suite name") in self.validator.validate_all(
            scenario(suite='ray'))
        assert self.validator.validate_all(
            scenario(task='verify_all', potentials={}, suite='ray')) == []

    def test_not_an_object(self):
        """Test non-mapping scenarios"""
        assert self.validator.validate_all([1]) == [('', "scenario must be a JSON object")]


class TestParseScenario:
    """Test parsing scenario text"""

    def test_round_trip(self):
        """Test valid text parses to its mapping"""
        data = scenario()

        assert parse_scenario_text(json.dumps(data)) == data

    def test_syntax_error_position(self):
        """Test JSON errors carry a line and column"""
        with pytest.raises(ValidationError) as exc_info:
            parse_scenario_text('{\n  "task": "ray",\n  oops\n}')

        assert exc_info.value.line == 3
        assert exc_info.value.column is not None
        assert "line 3" in str(exc_info.value)

    def test_first_schema_error(self):
        """Test the first field error is reported with a count"""
        data = scenario(schema_version=7, task='flow')

        with pytest.raises(ValidationError) as exc_info:
            parse_scenario_text(json.dumps(data))

        assert exc_info.value.field == 'schema_version'
        assert "+1 more" in exc_info.value.message

    def test_global_validator(self):
        """Test the shared validator instance"""
        assert get_validator() is get_validator()
