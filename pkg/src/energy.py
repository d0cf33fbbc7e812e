"""
Aubin-Mabuchi Energy

Energy of toric potentials by two independent formulas (dual integral and
mixed Monge-Ampere measures on the window), the sandwich bounds for
non-positive potentials, the cutoff constant c_psi by an energy-slope limit
and a mass-deficit limit, and full-mass (class E) membership.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid

from .config_manager import DEFAULT_NUMERIC
from .convex_core import (
    DomainError,
    Grid1D,
    InconsistencyError,
    OrderingError,
    ScheduleError,
    WindowTooSmallError,
)
from .logging_config import get_logger
from .toric_model import (
    ToricPotential,
    cutoff,
    domain_measure,
    dual_sup_diff,
    is_below,
    node_masses,
    potential_sup,
    to_primal,
)

logger = get_logger("energy")

C_METHODS = ("energy_slope", "mass_deficit")


# ============================================================================
# Reports
# ============================================================================

@dataclass(frozen=True)
class MixedEnergy:
    """Window evaluation of the mixed-measure energy with its tail bound."""

    value: float
    tail_bound: float

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class BoundsCheck:
    """int u MA(u) <= AM(u) <= (1/(n+1)) int u MA(u) for u <= 0."""

    lhs: float
    mid: float
    rhs: float
    ok: bool


@dataclass
class EnergyReport:
    """Energy values and, for cutoff-constant runs, the per-l table."""

    am_dual: Optional[float] = None
    am_mixed: Optional[float] = None
    two_path_gap: Optional[float] = None
    c_energy_slope: Optional[float] = None
    c_mass_deficit: Optional[float] = None
    tail_estimate: Optional[float] = None
    l_schedule: List[float] = field(default_factory=list)
    per_l_values: List[Dict[str, float]] = field(default_factory=list)
    cutoff_energy_convex: Optional[bool] = None
    cutoff_energy_decreasing: Optional[bool] = None

    def __post_init__(self):
        if self.am_dual is not None and self.am_mixed is not None and self.two_path_gap is None:
            self.two_path_gap = abs(self.am_dual - self.am_mixed)

    @property
    def c(self) -> Optional[float]:
        """Whichever cutoff constant was computed (energy slope first)."""
        return self.c_energy_slope if self.c_energy_slope is not None else self.c_mass_deficit

    def to_dict(self) -> Dict[str, Any]:
        return {
            'am_dual': self.am_dual,
            'am_mixed': self.am_mixed,
            'two_path_gap': self.two_path_gap,
            'c_energy_slope': self.c_energy_slope,
            'c_mass_deficit': self.c_mass_deficit,
            'tail_estimate': self.tail_estimate,
            'l_schedule': list(self.l_schedule),
            'per_l_values': [dict(row) for row in self.per_l_values],
        }


@dataclass(frozen=True)
class MembershipE:
    """Full-mass membership with both criteria."""

    in_E: bool
    deficit: float
    c_energy_slope: float
    by_mass: bool
    by_energy: bool

    @property
    def consistent(self) -> bool:
        return self.by_mass == self.by_energy


# ============================================================================
# Energy
# ============================================================================

@lru_cache(maxsize=16)
def _simplex_weights(n: int) -> np.ndarray:
    """Node weights integrating the piecewise-linear interpolant over the simplex.

    Each lattice triangle has area h^2 / 2 and gives a third of it to each vertex.
    """
    h = 1.0 / n
    counts = np.zeros((n + 1, n + 1))
    i, j = np.indices((n, n))
    lower = i + j <= n - 1
    for di, dj in ((0, 0), (1, 0), (0, 1)):
        np.add.at(counts, (i[lower] + di, j[lower] + dj), 1.0)
    upper = i + j <= n - 2
    for di, dj in ((1, 0), (0, 1), (1, 1)):
        np.add.at(counts, (i[upper] + di, j[upper] + dj), 1.0)
    weights = counts * h * h / 6.0
    weights.setflags(write=False)
    return weights


def am(pot: ToricPotential) -> float:
    """AM(phi) = -n! * integral over P of (dual(phi) - g0).

    Raises:
        UnboundedPotentialError: dual not finite on the whole polytope
    """
    pot.require_bounded("am")
    rel = pot.dual.values - pot.geom.g0.values
    if pot.geom.dim == 1:
        return float(-trapezoid(rel, pot.geom.nodes))
    grid = pot.geom.polytope_grid
    weights = _simplex_weights(grid.axis.n_cells)
    inside = grid.mask
    return float(-2.0 * np.sum(weights[inside] * rel[inside]))


def _relative_with_masses(pot: ToricPotential, window: Grid1D) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    f = to_primal(pot, window, strict=True)
    f0 = pot.geom.f0(window)
    return f.relative_values(), node_masses(f0), node_masses(f)


def am_mixed(pot: ToricPotential, window: Grid1D, tol: float = DEFAULT_NUMERIC.am_chord) -> MixedEnergy:
    """(1/2)[int phi~ MA(f0) + int phi~ MA(f)] on the window (dim 1).

    The reference measure puts mass below 2 e^{-L} outside [-L, L], so the
    truncation error is at most 2 sup|phi~| e^{-L}.

    Raises:
        WindowTooSmallError: tail bound above ``tol`` or tails not reached
    """
    if pot.geom.dim != 1:
        raise DomainError("am_mixed is one-dimensional")
    pot.require_bounded("am_mixed")
    rel, mass0, mass1 = _relative_with_masses(pot, window)
    sup_abs = float(np.max(np.abs(rel)))
    tail_bound = 2.0 * sup_abs * math.exp(-window.hi)
    if tail_bound > tol:
        required = math.log(2.0 * sup_abs / tol)
        raise WindowTooSmallError(
            f"mixed-energy tail bound {tail_bound:.3e} exceeds {tol:.1e}", required
        )
    value = 0.5 * (float(np.dot(rel, mass0)) + float(np.dot(rel, mass1)))
    return MixedEnergy(value, tail_bound)


def am_difference(u: ToricPotential, v: ToricPotential, window: Grid1D) -> float:
    """AM(u) - AM(v) = (1/2)[int (u - v) MA(u) + int (u - v) MA(v)] (dim 1)."""
    if u.geom.dim != 1:
        raise DomainError("am_difference is one-dimensional")
    u.require_bounded("am_difference")
    v.require_bounded("am_difference")
    fu = to_primal(u, window)
    fv = to_primal(v, window)
    diff = fu.values - fv.values
    return 0.5 * (float(np.dot(diff, node_masses(fu))) + float(np.dot(diff, node_masses(fv))))


def energy_report(pot: ToricPotential, window: Optional[Grid1D] = None) -> EnergyReport:
    """am by the dual formula and, in dim 1 with a window, by mixed measures."""
    report = EnergyReport(am_dual=am(pot))
    if pot.geom.dim == 1 and window is not None:
        report.am_mixed = am_mixed(pot, window).value
        report.two_path_gap = abs(report.am_dual - report.am_mixed)
    return report


def am_bounds_check(
    pot: ToricPotential,
    window: Grid1D,
    slack: float = 1e-6,
    quadrature_slack: float = DEFAULT_NUMERIC.am_chord,
) -> BoundsCheck:
    """Check int u MA(u) <= AM(u) <= (1/2) int u MA(u) for a potential u <= 0.

    Raises:
        DomainError: the potential has a positive part
    """
    if pot.geom.dim != 1:
        raise DomainError("am_bounds_check is one-dimensional")
    pot.require_bounded("am_bounds_check")
    top = potential_sup(pot)
    if top > slack:
        raise DomainError(f"potential has a positive part (sup {top:.3e})")
    f = to_primal(pot, window)
    lhs = float(np.dot(f.relative_values(), node_masses(f)))
    mid = am(pot)
    rhs = lhs / (pot.geom.dim + 1)
    allowance = slack + quadrature_slack
    ok = (lhs <= mid + allowance) and (mid <= rhs + allowance)
    return BoundsCheck(lhs, mid, rhs, ok)


def strict_domination_gap(u: ToricPotential, v: ToricPotential) -> Tuple[float, float]:
    """(am(u) - am(v), sup(u - v)) for u >= v; equal energies force u = v."""
    if not is_below(v, u, tol=1e-12):
        raise OrderingError("strict domination needs v <= u")
    gap = am(u) - am(v)
    dual_gap = dual_sup_diff(u.dual, v.dual)
    return gap, dual_gap


# ============================================================================
# Cutoff constant
# ============================================================================

def _sublevel_cells(h_vals: np.ndarray, other: np.ndarray, tol: float) -> np.ndarray:
    """Cells on which the hull touches ``other`` at both endpoints."""
    finite = np.isfinite(h_vals) & np.isfinite(other)
    contact = np.zeros(h_vals.shape, dtype=bool)
    contact[finite] = np.abs(h_vals[finite] - other[finite]) <= tol
    return contact[:-1] & contact[1:]


def _richardson(ls: Sequence[float], values: Sequence[float]) -> Tuple[float, float]:
    """Limit of secant slopes under an error proportional to 1/l.

    Uses the secants over the last three schedule points, each attached to its
    interval midpoint; the returned tail estimate is the change from the
    previous triple (or from the last secant when only three points exist).
    """
    def estimate(k: int) -> Tuple[float, float]:
        l0, l1, l2 = ls[k - 2], ls[k - 1], ls[k]
        s1 = (values[k - 1] - values[k - 2]) / (l1 - l0)
        s2 = (values[k] - values[k - 1]) / (l2 - l1)
        m1, m2 = 0.5 * (l0 + l1), 0.5 * (l1 + l2)
        return (s2 * m2 - s1 * m1) / (m2 - m1), s2

    last = len(ls) - 1
    c, s_last = estimate(last)
    if len(ls) >= 4:
        previous, _ = estimate(last - 1)
        return c, abs(c - previous)
    return c, abs(c - s_last)


def _check_schedule(l_schedule: Sequence[float]) -> List[float]:
    ls = [float(l) for l in l_schedule]
    if len(ls) < 3:
        raise ScheduleError(f"schedule needs at least 3 levels, got {len(ls)}")
    if any(b <= a for a, b in zip(ls, ls[1:])) or ls[0] <= 0:
        raise ScheduleError("schedule must be positive and strictly increasing")
    return ls


def _clip_c(value: float, label: str) -> float:
    if value < -1.0 - 1e-6 or value > 1e-6:
        logger.warning("c estimate %.6g for %s clipped to [-1, 0]", value, label)
    return float(min(0.0, max(-1.0, value)))


def _is_discretely_convex(ls: Sequence[float], values: Sequence[float], tol: float) -> bool:
    slopes = np.diff(values) / np.diff(ls)
    return bool(np.all(np.diff(slopes) >= -tol))


def c_of(
    psi: ToricPotential,
    method: str = "energy_slope",
    base: Optional[ToricPotential] = None,
    l_schedule: Sequence[float] = DEFAULT_NUMERIC.l_schedule,
    tol: Optional[float] = None,
    window: Optional[Grid1D] = None,
    contact_tol: float = 1e-9,
) -> EnergyReport:
    """Cutoff constant c_psi = lim am(max(base - l, psi)) / l.

    ``energy_slope`` extrapolates secant slopes of the cutoff energies.
    ``mass_deficit`` (dim 1) measures -(1/2)(omega_0 + omega_{psi_l}) mass of
    the sublevel set {psi <= base - l} on the polytope and extrapolates it
    linearly in 1/l from the last two levels. With a window and base ZERO
    each row also carries the energy bracket
    (1/l) int g_l MA(g_l) <= am(g_l)/l <= (1/2)(1/l) int g_l MA(g_l).

    Raises:
        ScheduleError: fewer than three levels, or the tail estimate exceeds ``tol``
        OrderingError: psi not bounded above
    """
    if method not in C_METHODS:
        raise ValueError(f"unknown c method {method!r}; expected one of {C_METHODS}")
    ls = _check_schedule(l_schedule)
    base = base if base is not None else psi.geom.reference()
    base.require_bounded("c_of base")
    if not math.isfinite(potential_sup(psi)):
        raise OrderingError(f"{psi.label or 'psi'} is not bounded above")
    if method == "mass_deficit" and psi.geom.dim != 1:
        raise DomainError("mass_deficit is one-dimensional")

    rows: List[Dict[str, float]] = []
    energies: List[float] = []
    level_c: List[float] = []
    for l in ls:
        gamma = cutoff(psi, l, base)
        energy = am(gamma)
        energies.append(energy)
        row: Dict[str, float] = {'l': l, 'am_cutoff': energy, 'am_over_l': energy / l}
        if method == "mass_deficit":
            m0, m1 = sublevel_masses(psi, base, gamma, l, contact_tol)
            c_l = -0.5 * (m0 + m1)
            level_c.append(c_l)
            row.update({'mass_omega0': m0, 'mass_omega_l': m1, 'c_l': c_l})
        if window is not None and psi.geom.dim == 1 and base.label == "ZERO":
            f = to_primal(gamma, window, strict=False)
            integral = float(np.dot(f.relative_values(), node_masses(f)))
            row.update({'bracket_low': integral / l, 'bracket_high': 0.5 * integral / l})
        rows.append(row)
        logger.debug("c_of %s l=%g am=%.6g", psi.label, l, energy)

    report = EnergyReport(l_schedule=ls, per_l_values=rows)
    report.cutoff_energy_decreasing = bool(np.all(np.diff(energies) <= 1e-9 * max(1.0, max(map(abs, energies)))))
    report.cutoff_energy_convex = _is_discretely_convex(ls, energies, 1e-9)

    if method == "energy_slope":
        c, tail = _richardson(ls, energies)
        report.c_energy_slope = _clip_c(c, psi.label)
    else:
        # c_l - c = O(1/l) along a doubling schedule
        ratio = ls[-1] / ls[-2]
        c = (ratio * level_c[-1] - level_c[-2]) / (ratio - 1.0)
        tail = abs(c - level_c[-1])
        report.c_mass_deficit = _clip_c(c, psi.label)
    report.tail_estimate = tail
    if tol is not None and tail > tol:
        raise ScheduleError(
            f"schedule up to l={ls[-1]:g} leaves tail estimate {tail:.3e} above {tol:.1e}"
        )
    return report


def sublevel_masses(
    psi: ToricPotential,
    base: ToricPotential,
    gamma: ToricPotential,
    l: float,
    contact_tol: float = 1e-9,
) -> Tuple[float, float]:
    """Masses of {psi <= base - l} for the base measure and for MA(gamma).

    gamma = max(base - l, psi) equals base - l on the sublevel set; its gradient
    image is the contact of the hull with dual(base) + l, where the base measure
    lives. MA(gamma) carries the sublevel set onto everything off the contact
    with dual(psi).
    """
    tol = contact_tol * max(1.0, gamma.dual.scale)
    h = psi.geom.h
    hull = gamma.dual.values
    lifted = base.dual.values + l
    on_base = _sublevel_cells(hull, lifted, tol)
    on_psi = _sublevel_cells(hull, psi.dual.values, tol)
    return float(h * on_base.sum()), float(h * (~on_psi).sum())


def is_in_E(
    psi: ToricPotential,
    l_schedule: Sequence[float] = DEFAULT_NUMERIC.l_schedule,
    tol_c: float = DEFAULT_NUMERIC.tol_c,
    lenient: bool = False,
) -> MembershipE:
    """Full-mass membership by domain measure and by the cutoff constant.

    With ``lenient`` a disagreement is logged and returned in the result
    (``consistent`` is False) instead of raised.

    Raises:
        InconsistencyError: the two criteria disagree
    """
    deficit = psi.geom.vol - domain_measure(psi)
    c = c_of(psi, "energy_slope", l_schedule=l_schedule).c_energy_slope
    by_mass = deficit <= psi.geom.h
    by_energy = abs(c) <= tol_c
    result = MembershipE(by_mass and by_energy, float(deficit), float(c), by_mass, by_energy)
    if not result.consistent:
        if not lenient:
            raise InconsistencyError(
                f"E membership criteria disagree for {psi.label or 'psi'}: "
                f"mass deficit {deficit:.3e} vs energy slope {c:.3e}"
            )
        logger.error(
            "E membership criteria disagree for %s: deficit=%.3e c=%.3e", psi.label, deficit, c
        )
    return result


__all__ = [
    'MixedEnergy', 'BoundsCheck', 'EnergyReport', 'MembershipE', 'C_METHODS',
    'am', 'am_mixed', 'am_difference', 'energy_report', 'am_bounds_check',
    'strict_domination_gap', 'c_of', 'sublevel_masses', 'is_in_E',
]
