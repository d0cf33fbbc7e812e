"""
Configuration Manager

Layered numeric configuration for the toric workbench.

Priority (highest to lowest): explicit overrides (CLI flags, scenario
sections) > an explicitly passed YAML file > the shipped defaults file
(``src/toric_defaults.yaml``) > built-in defaults. Environment variables are
never consulted, so a run is fully described by its inputs.
"""

import copy
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np
import yaml

from .convex_core import Grid1D
from .logging_config import get_logger

logger = get_logger("config")

DEFAULTS_FILE = Path(__file__).with_name("toric_defaults.yaml")


class ConfigManager:
    """
    Layered configuration manager

    Example:
        >>> config = ConfigManager()
        >>> config.get('grid.n')
        1024
        >>> config = ConfigManager(overrides={'grid': {'n': 256}})
        >>> config.numeric().h
        0.00390625
    """

    def __init__(
        self,
        config_file: Optional[str] = None,
        overrides: Optional[Dict[str, Any]] = None,
        use_shipped_defaults: bool = True,
    ):
        """
        Initialize configuration manager

        Args:
            config_file: Optional YAML file with user settings
            overrides: Nested dict applied above every file
            use_shipped_defaults: Read ``toric_defaults.yaml`` (tests may skip it)
        """
        self.config_file = config_file
        self.defaults: Dict[str, Any] = self._load_defaults()
        self.shipped: Dict[str, Any] = self._load_yaml(DEFAULTS_FILE) if use_shipped_defaults else {}
        self.config_data: Dict[str, Any] = self._load_yaml(Path(config_file)) if config_file else {}
        self.overrides: Dict[str, Any] = copy.deepcopy(overrides) if overrides else {}

    def _load_defaults(self) -> Dict[str, Any]:
        """
        Built-in defaults, identical to the shipped YAML file

        Returns:
            Default configuration dictionary
        """
        doubling = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0]
        return {
            'grid': {
                'n': 1024,
                'window_L': 40.0,
                'window_m': 4096,
            },
            'tolerances': {
                'tol_convex': 1e-9,
                'tol_slope': 1e-6,
                'constancy_factor': 5.0,
                'monotone': 1e-9,
                'am_chord': 5e-3,
                'tol_c': 5e-3,
                'c_agreement': 1e-2,
                'base_independence': 2e-3,
                'energy_law': 1e-2,
                'fast_brute_rel': 1e-12,
                'stabilization': 1e-9,
                'ray_agreement_factor': 10.0,
            },
            'schedules': {
                'l': list(doubling),
                'c': list(doubling),
                'c_max_exponent': 30,
                't_samples': {'count': 33, 'span': [0.0, 8.0]},
                'tau': {'count': 65, 'span': [-1.5, 0.25]},
                'test_curve_t_max': 16.0,
                'test_curve_tail_exponent': 16,
                'ray_l_max_exponent': 16,
            },
            'hcma': {
                't_rows': 65,
                'tol': 1e-9,
                'max_sweeps': 200,
            },
            'runner': {
                'max_concurrent': 4,
            },
            'logging': {
                'level': 'INFO',
                'format': 'colored',
            },
        }

    def _load_yaml(self, path: Path) -> Dict[str, Any]:
        """Read one YAML mapping; a missing shipped file is not an error."""
        if not path.exists():
            if path != DEFAULTS_FILE:
                raise FileNotFoundError(f"config file not found: {path}")
            logger.warning("shipped defaults file missing, using built-in defaults")
            return {}
        with open(path, 'r') as f:
            data = yaml.safe_load(f) or {}
        if not isinstance(data, dict):
            raise ValueError(f"config file {path} must contain a mapping")
        return data

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get configuration value by dotted key

        Args:
            key: Dot-separated path, e.g. 'tolerances.tol_c'
            default: Returned when no layer defines the key

        Returns:
            Configuration value
        """
        for layer in (self.overrides, self.config_data, self.shipped, self.defaults):
            value = self._get_nested(layer, key)
            if value is not None:
                return value
        return default

    def _get_nested(self, data: Dict[str, Any], key: str) -> Any:
        value: Any = data
        for k in key.split('.'):
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return None
        return value

    def set(self, key: str, value: Any) -> None:
        """
        Set an override (in-memory only)

        Args:
            key: Dot-separated key
            value: Value to set
        """
        keys = key.split('.')
        data = self.overrides
        for k in keys[:-1]:
            data = data.setdefault(k, {})
        data[keys[-1]] = value

    def save(self, file_path: str) -> None:
        """
        Write the merged configuration as YAML

        Args:
            file_path: Destination path
        """
        path = Path(file_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w') as f:
            yaml.safe_dump(self.get_all_config(), f, default_flow_style=False, sort_keys=True)
        logger.info("configuration saved to %s", path)

    def get_all_config(self) -> Dict[str, Any]:
        """
        Complete merged configuration

        Returns:
            Configuration dictionary with every layer applied
        """
        merged = copy.deepcopy(self.defaults)
        for layer in (self.shipped, self.config_data, self.overrides):
            self._deep_merge(merged, layer)
        return merged

    def _deep_merge(self, base: Dict, update: Dict) -> None:
        for key, value in update.items():
            if key in base and isinstance(base[key], dict) and isinstance(value, dict):
                self._deep_merge(base[key], value)
            else:
                base[key] = copy.deepcopy(value)

    def numeric(self) -> "NumericConfig":
        """Resolve the frozen numeric settings for one run."""
        return NumericConfig.from_mapping(self.get_all_config())


@dataclass(frozen=True)
class NumericConfig:
    """Resolved numeric settings passed explicitly to operations."""

    n: int = 1024
    window_L: float = 40.0
    window_m: int = 4096
    tol_convex: float = 1e-9
    tol_slope: float = 1e-6
    constancy_factor: float = 5.0
    monotone: float = 1e-9
    am_chord: float = 5e-3
    tol_c: float = 5e-3
    c_agreement: float = 1e-2
    base_independence: float = 2e-3
    energy_law: float = 1e-2
    fast_brute_rel: float = 1e-12
    stabilization: float = 1e-9
    ray_agreement_factor: float = 10.0
    l_schedule: Tuple[float, ...] = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0)
    c_schedule: Tuple[float, ...] = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0)
    c_max_exponent: int = 30
    t_count: int = 33
    t_span: Tuple[float, float] = (0.0, 8.0)
    tau_count: int = 65
    tau_span: Tuple[float, float] = (-1.5, 0.25)
    test_curve_t_max: float = 16.0
    test_curve_tail_exponent: int = 16
    ray_l_max_exponent: int = 16
    hcma_t_rows: int = 65
    hcma_tol: float = 1e-9
    hcma_max_sweeps: int = 200
    max_concurrent: int = 4

    @classmethod
    def from_mapping(cls, cfg: Dict[str, Any]) -> "NumericConfig":
        grid = cfg.get('grid', {})
        tol = cfg.get('tolerances', {})
        sch = cfg.get('schedules', {})
        hcma = cfg.get('hcma', {})
        runner = cfg.get('runner', {})
        base = cls()

        def pick(section: Dict[str, Any], key: str, current: Any, cast: Any) -> Any:
            return cast(section[key]) if key in section else current

        t_cfg = sch.get('t_samples', {})
        tau_cfg = sch.get('tau', {})
        return cls(
            n=pick(grid, 'n', base.n, int),
            window_L=pick(grid, 'window_L', base.window_L, float),
            window_m=pick(grid, 'window_m', base.window_m, int),
            tol_convex=pick(tol, 'tol_convex', base.tol_convex, float),
            tol_slope=pick(tol, 'tol_slope', base.tol_slope, float),
            constancy_factor=pick(tol, 'constancy_factor', base.constancy_factor, float),
            monotone=pick(tol, 'monotone', base.monotone, float),
            am_chord=pick(tol, 'am_chord', base.am_chord, float),
            tol_c=pick(tol, 'tol_c', base.tol_c, float),
            c_agreement=pick(tol, 'c_agreement', base.c_agreement, float),
            base_independence=pick(tol, 'base_independence', base.base_independence, float),
            energy_law=pick(tol, 'energy_law', base.energy_law, float),
            fast_brute_rel=pick(tol, 'fast_brute_rel', base.fast_brute_rel, float),
            stabilization=pick(tol, 'stabilization', base.stabilization, float),
            ray_agreement_factor=pick(tol, 'ray_agreement_factor', base.ray_agreement_factor, float),
            l_schedule=pick(sch, 'l', base.l_schedule, lambda v: tuple(float(x) for x in v)),
            c_schedule=pick(sch, 'c', base.c_schedule, lambda v: tuple(float(x) for x in v)),
            c_max_exponent=pick(sch, 'c_max_exponent', base.c_max_exponent, int),
            t_count=pick(t_cfg, 'count', base.t_count, int),
            t_span=pick(t_cfg, 'span', base.t_span, lambda v: (float(v[0]), float(v[1]))),
            tau_count=pick(tau_cfg, 'count', base.tau_count, int),
            tau_span=pick(tau_cfg, 'span', base.tau_span, lambda v: (float(v[0]), float(v[1]))),
            test_curve_t_max=pick(sch, 'test_curve_t_max', base.test_curve_t_max, float),
            test_curve_tail_exponent=pick(sch, 'test_curve_tail_exponent', base.test_curve_tail_exponent, int),
            ray_l_max_exponent=pick(sch, 'ray_l_max_exponent', base.ray_l_max_exponent, int),
            hcma_t_rows=pick(hcma, 't_rows', base.hcma_t_rows, int),
            hcma_tol=pick(hcma, 'tol', base.hcma_tol, float),
            hcma_max_sweeps=pick(hcma, 'max_sweeps', base.hcma_max_sweeps, int),
            max_concurrent=pick(runner, 'max_concurrent', base.max_concurrent, int),
        )

    @property
    def h(self) -> float:
        """Polytope spacing."""
        return 1.0 / self.n

    @property
    def h_x(self) -> float:
        """Window spacing."""
        return 2.0 * self.window_L / self.window_m

    @property
    def primal_tol(self) -> float:
        """Constancy threshold for window sup-distances."""
        return self.constancy_factor * self.h_x

    @property
    def dual_tol(self) -> float:
        """Constancy threshold for dual-side and quotient statements."""
        return self.constancy_factor * self.h

    def polytope_grid(self) -> Grid1D:
        return Grid1D.polytope(self.n)

    def window_grid(self) -> Grid1D:
        return Grid1D.window(self.window_L, self.window_m)

    def t_samples(self) -> np.ndarray:
        return np.linspace(self.t_span[0], self.t_span[1], self.t_count)

    def tau_samples(self) -> np.ndarray:
        """Uniform tau grid plus the saturation points -1 and 0."""
        grid = np.linspace(self.tau_span[0], self.tau_span[1], self.tau_count)
        extra = [tau for tau in (-1.0, 0.0) if self.tau_span[0] <= tau <= self.tau_span[1]]
        return np.unique(np.concatenate([grid, np.array(extra)]))

    def ray_l_schedule(self) -> Tuple[float, ...]:
        return tuple(float(2 ** k) for k in range(self.ray_l_max_exponent + 1))


_global_config: Optional[ConfigManager] = None


def get_config() -> ConfigManager:
    """Get global ConfigManager instance"""
    global _global_config
    if _global_config is None:
        _global_config = ConfigManager()
    return _global_config


DEFAULT_NUMERIC = NumericConfig()
