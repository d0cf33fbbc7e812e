"""
Shared fixtures

Reduced scale (n=64, L=8, m=256) keeps unit tests fast; desk-scale
fixtures back the tests marked ``slow``.
"""

import pytest

from src.config_manager import NumericConfig
from src.convex_core import Grid1D
from src.suites import SuiteContext
from src.toric_model import ToricGeometry
from src.zoo import bump, const, einf, nu_singular


@pytest.fixture(scope="session")
def small_config():
    """Numeric settings at reduced scale."""
    return NumericConfig(n=64, window_L=8.0, window_m=256, t_count=9, t_span=(0.0, 4.0), max_concurrent=2)


@pytest.fixture(scope="session")
def geom():
    """Standard interval geometry with 64 cells."""
    return ToricGeometry.standard(64)


@pytest.fixture(scope="session")
def window():
    """Window [-8, 8] with 256 cells (h_x = 1/16)."""
    return Grid1D.window(8.0, 256)


@pytest.fixture(scope="session")
def wide_window():
    """Window [-40, 40] with 2048 cells, wide enough for NU ray tails."""
    return Grid1D.window(40.0, 2048)


@pytest.fixture(scope="session")
def small_ctx(small_config):
    return SuiteContext(small_config)


@pytest.fixture(scope="session")
def zero(geom):
    return geom.reference()


@pytest.fixture(scope="session")
def zoo_small(geom):
    """The standard zoo on the reduced geometry, keyed by label."""
    pots = [const(geom, -1.0), nu_singular(geom, 0.25), nu_singular(geom, 0.5), einf(geom)]
    return {p.label: p for p in pots}


@pytest.fixture(scope="session")
def bumps(geom):
    return [bump(geom, seed) for seed in (1, 2, 3, 4)]


@pytest.fixture(scope="session")
def desk_geom():
    """Desk-scale geometry (n=1024)."""
    return ToricGeometry.standard(1024)


@pytest.fixture(scope="session")
def desk_window():
    """Desk-scale window (L=40, m=4096)."""
    return Grid1D.window(40.0, 4096)
