"""
Tests for the command-line surface
"""

import json
import logging

import pytest

from src.logging_config import ROOT_LOGGER
from toric_cli import EXIT_FAIL, EXIT_INPUT, EXIT_PASS, build_parser, main


@pytest.fixture(autouse=True)
def quiet_logs():
    yield
    logging.getLogger(ROOT_LOGGER).handlers.clear()


def envelope_scenario(tmp_path, psi="NU(0.25)"):
    path = tmp_path / "env.json"
    path.write_text(json.dumps({
        'schema_version': 1,
        'task': 'envelope',
        'geometry': {'dim': 1, 'n': 64, 'window_L': 8.0, 'window_m': 256},
        'potentials': {'psi': psi, 'phi': 'ZERO'},
    }))
    return path


class TestParser:
    """Test argument parsing"""

    def test_verify_defaults(self):
        """Test verify runs every suite by default"""
        args = build_parser().parse_args(['verify'])

        assert args.suite == 'all'
        assert args.n is None
        assert not args.serial

    def test_grid_flags(self):
        """Test grid overrides"""
        args = build_parser().parse_args(['verify', '--suite', 'energy', '--n', '256', '--window', '20',
                                          '--window-m', '1024', '--serial'])

        assert (args.suite, args.n, args.window, args.window_m) == ('energy', 256, 20.0, 1024)
        assert args.serial

    def test_unknown_suite(self):
        """Test argparse rejects unknown suites with exit code 2"""
        with pytest.raises(SystemExit) as exc_info:
            build_parser().parse_args(['verify', '--suite', 'plots'])

        assert exc_info.value.code == 2


class TestCommands:
    """Test commands and exit codes"""

    def test_zoo_list(self, capsys):
        """Test every canonical potential is listed"""
        assert main(['zoo', 'list', '--log-level', 'ERROR']) == EXIT_PASS

        out = capsys.readouterr().out
        for name in ('ZERO', 'CONST(c)', 'NU(nu)', 'EINF', 'BUMP(seed)'):
            assert name in out

    def test_zoo_show(self, capsys):
        """Test mass, Lelong number and c of NU"""
        assert main(['zoo', 'show', 'NU(0.25)', '--n', '64', '--log-level', 'ERROR']) == EXIT_PASS

        rows = dict(line.split(None, 1) for line in capsys.readouterr().out.strip().splitlines())
        assert rows['potential'] == 'NU(0.25)'
        assert rows['bounded'] == 'False'
        assert float(rows['mass']) == pytest.approx(0.75)
        assert float(rows['c_energy_slope']) == pytest.approx(-0.125, abs=5e-3)
        assert rows['in_E'] == 'False'
        assert rows['criteria_agree'] == 'True'

    def test_zoo_show_bad_spec(self, capsys):
        """Test unknown potentials are input errors"""
        assert main(['zoo', 'show', 'SPIKE(1)', '--n', '64', '--log-level', 'ERROR']) == EXIT_INPUT
        assert "unknown zoo potential" in capsys.readouterr().err

    def test_run_passes(self, tmp_path, capsys):
        """Test a passing scenario exits 0 and writes its report"""
        out = tmp_path / "out"

        code = main(['run', str(envelope_scenario(tmp_path)), '--out', str(out), '--log-level', 'ERROR'])

        assert code == EXIT_PASS
        assert "result: PASS" in capsys.readouterr().out
        assert (out / "report.json").exists()

    def test_run_missing_file(self, tmp_path, capsys):
        """Test unreadable scenarios are input errors"""
        code = main(['run', str(tmp_path / "absent.json"), '--log-level', 'ERROR'])

        assert code == EXIT_INPUT
        assert capsys.readouterr().err.startswith("error:")

    def test_run_invalid_scenario(self, tmp_path):
        """Test schema problems are input errors"""
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({'schema_version': 1, 'task': 'ray'}))

        assert main(['run', str(path), '--log-level', 'ERROR']) == EXIT_INPUT

    def test_run_unbuildable_potential(self, tmp_path):
        """Test potentials that fail to build are input errors"""
        path = envelope_scenario(tmp_path, psi="NU(1.5)")

        assert main(['run', str(path), '--out', str(tmp_path / "o"), '--log-level', 'ERROR']) == EXIT_INPUT

    def test_missing_config(self, tmp_path):
        """Test a missing config file is an input error"""
        code = main(['zoo', 'list', '--config', str(tmp_path / "none.yaml")])

        assert code == EXIT_INPUT

    def test_exit_codes(self):
        """Test the exit code contract"""
        assert (EXIT_PASS, EXIT_FAIL, EXIT_INPUT) == (0, 1, 2)
