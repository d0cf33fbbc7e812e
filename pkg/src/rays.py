"""
Geodesic Rays from Singularity Data

The ray v(phi, psi) is the limit of the segments joining phi to
max(phi - l, psi) on [0, l], continued by max(phi - t, psi) for t > l. On the
dual side that family is

    dual^l_t = (1 - t/l) dual(phi) + (t/l) H_l     (t <= l)
    dual^l_t = H_t                                  (t > l)

with H_l the dual of max(phi - l, psi). It decreases in l, so the limit is
approached monotonically; the remaining 1/l error is removed by one
Richardson step on the doubling schedule, clipped to the certified bracket
and closed by a hull.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config_manager import DEFAULT_NUMERIC
from .convex_core import (
    DomainError,
    ExtGridFn,
    Grid1D,
    NotConvergedError,
    OrderingError,
    hull_values,
    sup_distance,
)
from .energy import am, c_of
from .geodesics import GeodesicPath, diff_quotients, segment
from .logging_config import get_logger
from .toric_model import (
    ToricPotential,
    cutoff,
    dual_inf_diff,
    dual_sup_diff,
    is_below,
    to_primal,
)

logger = get_logger("rays")


@dataclass(eq=False)
class RayApprox:
    """Sampled approximation of v(phi, psi).

    Attributes:
        phi: Bounded starting potential
        psi: Singularity datum, psi <= phi
        l_schedule: Doubling levels used for the l-limit
        path: Per-t duals after the limit and the closed hull
        monotone_gap: Window sup-distance between the last two limit estimates
        family_violation: Largest increase of dual^l_t in l (0 for an exact family)
        converged: monotone_gap within the primal constancy threshold
    """

    phi: ToricPotential
    psi: ToricPotential
    l_schedule: Tuple[float, ...]
    path: GeodesicPath
    monotone_gap: float
    family_violation: float
    converged: bool
    last_level: Tuple[ExtGridFn, ...] = field(default_factory=tuple)

    @property
    def t_samples(self) -> np.ndarray:
        return self.path.t_samples

    @property
    def duals(self) -> Tuple[ExtGridFn, ...]:
        return self.path.duals

    def potential(self, i: int) -> ToricPotential:
        return self.path.potential(i)

    def constancy_gap(self) -> float:
        """Window sup-distance of v_t to phi over all samples."""
        base = self.path.primal(0).values
        return max(sup_distance(self.path.primal(i).values, base) for i in range(len(self.t_samples)))

    def is_constant(self, tol: Optional[float] = None) -> bool:
        tol = tol if tol is not None else DEFAULT_NUMERIC.constancy_factor * self.path.window.h
        return self.constancy_gap() <= tol


# ============================================================================
# Family
# ============================================================================

def _ordered(phi: ToricPotential, psi: ToricPotential) -> None:
    phi.require_bounded("ray construction")
    if not is_below(psi, phi, tol=1e-12):
        raise OrderingError(f"{psi.label or 'psi'} is not below {phi.label or 'phi'}")


def linearized_subgeodesic(phi: ToricPotential, psi: ToricPotential, l: float, t: float) -> ToricPotential:
    """u^l_t: the segment to max(phi - l, psi) for t <= l, gamma_t afterwards."""
    _ordered(phi, psi)
    if l <= 0 or t < 0:
        raise DomainError(f"need l > 0 and t >= 0, got l={l}, t={t}")
    if t >= l:
        return cutoff(psi, t, phi).relabel(f"u^{l:g}({t:g})")
    hull = cutoff(psi, l, phi).dual.values
    s = t / l
    values = (1.0 - s) * phi.dual.values + s * hull
    return ToricPotential(phi.geom, ExtGridFn(phi.geom.polytope_grid, values), label=f"u^{l:g}({t:g})")


def segment_quotient_bounds(phi: ToricPotential, psi: ToricPotential, l: float,
                            window: Optional[Grid1D] = None) -> Dict[str, float]:
    """m and M of the segment from phi to max(phi - l, psi) on [0, l].

    Both are measured on the segment and recomputed as sup/inf of
    max(-l, psi - phi)/l from the dual identities.
    """
    _ordered(phi, psi)
    target = cutoff(psi, l, phi)
    path = segment(phi, target, [0.0, l], alpha=0.0, beta=l, window=window)
    m, M = diff_quotients(path, l, 0.0)
    return {
        'l': l,
        'm': m,
        'M': M,
        'm_dual': dual_inf_diff(target.dual, phi.dual) / l,
        'M_dual': dual_sup_diff(target.dual, phi.dual) / l,
    }


def _family_at(phi_vals: np.ndarray, hull_l: np.ndarray, hull_t: Dict[float, np.ndarray],
               l: float, t: float) -> np.ndarray:
    if t >= l:
        return hull_t[t]
    s = t / l
    return (1.0 - s) * phi_vals + s * hull_l


def build_ray(
    phi: ToricPotential,
    psi: ToricPotential,
    l_schedule: Optional[Sequence[float]] = None,
    t_samples: Optional[Sequence[float]] = None,
    window: Optional[Grid1D] = None,
    gap_tol: Optional[float] = None,
) -> RayApprox:
    """Approximate v(phi, psi) at the given times.

    The l-limit per t is estimated by 2 dual^{l_k}_t - dual^{l_{k-1}}_t, clipped
    to [dual(phi), min(dual^{l_k}_t, H_t)] and replaced by its closed hull.
    ``monotone_gap`` compares that estimate with the one a level earlier.

    Raises:
        OrderingError: psi not below phi
    """
    if phi.geom.dim != 1:
        raise DomainError("build_ray is one-dimensional")
    _ordered(phi, psi)
    ls = tuple(float(l) for l in (l_schedule if l_schedule is not None else DEFAULT_NUMERIC.ray_l_schedule()))
    if len(ls) < 3 or any(b <= a for a, b in zip(ls, ls[1:])):
        raise DomainError("ray schedule needs at least three increasing levels")
    ts = np.asarray(t_samples if t_samples is not None else DEFAULT_NUMERIC.t_samples(), dtype=float)
    window = window or DEFAULT_NUMERIC.window_grid()
    gap_tol = gap_tol if gap_tol is not None else DEFAULT_NUMERIC.constancy_factor * window.h
    grid = phi.geom.polytope_grid
    phi_vals = phi.dual.values

    # H_t for every sample time; gamma_t caps the family from above on the dual side
    hull_t = {float(t): cutoff(psi, float(t), phi).dual.values for t in ts}

    previous: Optional[List[np.ndarray]] = None
    prev_estimate: Optional[List[np.ndarray]] = None
    estimate: Optional[List[np.ndarray]] = None
    violation = 0.0
    nodes = grid.nodes
    for k, l in enumerate(ls):
        hull_l = cutoff(psi, l, phi).dual.values
        current = [_family_at(phi_vals, hull_l, hull_t, l, float(t)) for t in ts]
        if previous is not None:
            for cur, prev in zip(current, previous):
                violation = max(violation, float(np.max(cur - prev)))
        if previous is not None and k >= len(ls) - 2:
            prev_estimate = estimate
            estimate = [
                _limit_estimate(cur, prev, phi_vals, hull_t[float(t)], nodes)
                for cur, prev, t in zip(current, previous, ts)
            ]
        previous = current
        logger.debug("ray %s: level l=%g done", psi.label, l)

    duals = tuple(ExtGridFn(grid, values) for values in estimate)
    path = GeodesicPath(phi.geom, ts, duals, window, label=f"ray({phi.label},{psi.label})")
    gap = 0.0
    for new, old in zip(estimate, prev_estimate):
        fa = to_primal(ToricPotential(phi.geom, ExtGridFn(grid, new)), window, strict=False)
        fb = to_primal(ToricPotential(phi.geom, ExtGridFn(grid, old)), window, strict=False)
        gap = max(gap, sup_distance(fa.values, fb.values))
    converged = gap <= gap_tol
    if not converged:
        logger.warning("ray %s not converged: gap %.3e above %.3e", psi.label, gap, gap_tol)
    return RayApprox(
        phi, psi, ls, path, gap, max(0.0, violation), converged,
        tuple(ExtGridFn(grid, values) for values in previous),
    )


def _limit_estimate(cur: np.ndarray, prev: np.ndarray, lower: np.ndarray, cap: np.ndarray,
                    nodes: np.ndarray) -> np.ndarray:
    """Richardson step in 1/l, clipped to the bracket, then the closed hull."""
    extrapolated = 2.0 * cur - prev
    upper = np.minimum(cur, cap)
    clipped = np.minimum(np.maximum(extrapolated, lower), upper)
    return hull_values(clipped, nodes)


# ============================================================================
# Checks
# ============================================================================

@dataclass(frozen=True)
class RayEnergyProfile:
    """am(v_t) samples with their affine fit."""

    t: np.ndarray
    am: np.ndarray
    slope: float
    intercept: float
    chord_deviation: np.ndarray
    c_psi: float
    am_phi: float

    @property
    def slope_error(self) -> float:
        return abs(self.slope - self.c_psi)

    @property
    def intercept_error(self) -> float:
        return abs(self.intercept - self.am_phi)

    @property
    def law_residual(self) -> float:
        """max |am(v_t) - am(phi) - c t| over samples."""
        return float(np.max(np.abs(self.am - self.am_phi - self.c_psi * self.t)))

    def rows(self) -> List[Dict[str, float]]:
        return [
            {'t': float(t), 'am': float(a), 'am_chord_dev': float(d)}
            for t, a, d in zip(self.t, self.am, self.chord_deviation)
        ]


def ray_energy_profile(ray: RayApprox, l_schedule: Sequence[float] = DEFAULT_NUMERIC.l_schedule) -> RayEnergyProfile:
    """am along the ray, its least-squares line and the cutoff constant c_psi.

    Raises:
        NotConvergedError: the ray did not converge
    """
    if not ray.converged:
        raise NotConvergedError("energy profile needs a converged ray", ray.monotone_gap)
    energies = ray.path.energies()
    ts = ray.t_samples
    slope, intercept = np.polyfit(ts, energies, 1)
    chord = energies[0] + (energies[-1] - energies[0]) * (ts - ts[0]) / (ts[-1] - ts[0])
    c_psi = c_of(ray.psi, "energy_slope", l_schedule=l_schedule).c_energy_slope
    return RayEnergyProfile(ts, energies, float(slope), float(intercept),
                            energies - chord, float(c_psi), am(ray.phi))


@dataclass
class MembershipReport:
    """Outcome of the R(phi, psi) checks for a ray and an optional competitor."""

    starts_at_phi: float = 0.0
    emanation_excess: float = 0.0
    above_psi_excess: float = 0.0
    m: float = 0.0
    M: float = 0.0
    normalized: bool = False
    constant: bool = False
    sandwich_excess: float = 0.0
    t_monotone_excess: float = 0.0
    competitor_checked: bool = False
    competitor_rejected: Optional[str] = None
    competitor_excess: Optional[float] = None
    tol_dual: float = 0.0
    tol_primal: float = 0.0

    @property
    def ok(self) -> bool:
        core = (
            self.starts_at_phi <= self.tol_primal
            and self.emanation_excess <= self.tol_primal
            and self.above_psi_excess <= self.tol_dual
            and (self.normalized or self.constant)
            and self.sandwich_excess <= 1e-9
            and self.t_monotone_excess <= self.tol_dual
        )
        if self.competitor_checked and self.competitor_rejected is None:
            core = core and self.competitor_excess <= self.tol_dual
        return core


def _competitor_problem(ray: RayApprox, competitor: GeodesicPath, tol_dual: float, tol_q: float) -> Optional[str]:
    if competitor.t_samples.shape != ray.t_samples.shape or not np.allclose(competitor.t_samples, ray.t_samples):
        return "competitor is sampled at different times"
    if sup_distance(competitor.duals[0].values, ray.phi.dual.values) > tol_dual:
        return "competitor does not start at phi"
    for i in range(len(competitor.t_samples)):
        if not is_below(ray.psi, competitor.potential(i), tol=tol_dual):
            return f"competitor drops below psi at t={competitor.t_samples[i]:g}"
    m, M = competitor.m, competitor.M
    normalized = abs(M) <= tol_q and abs(m + 1.0) <= tol_q
    constant = abs(M) <= tol_q and abs(m) <= tol_q
    if not (normalized or constant):
        return f"competitor is not normalized (m={m:.4g}, M={M:.4g})"
    return None


def membership_check(
    ray: RayApprox,
    competitor: Optional[GeodesicPath] = None,
    tol_dual: Optional[float] = None,
    tol_primal: Optional[float] = None,
) -> MembershipReport:
    """Check that the ray lies in R(phi, psi) and sits below a competitor.

    A competitor that is not itself in R(phi, psi) is rejected (recorded in
    ``competitor_rejected``) without failing the ray.

    Raises:
        NotConvergedError: the ray did not converge
    """
    if not ray.converged:
        raise NotConvergedError("membership check needs a converged ray", ray.monotone_gap)
    path = ray.path
    tol_dual = tol_dual if tol_dual is not None else DEFAULT_NUMERIC.constancy_factor * ray.phi.geom.h
    tol_primal = tol_primal if tol_primal is not None else DEFAULT_NUMERIC.constancy_factor * path.window.h
    report = MembershipReport(tol_dual=tol_dual, tol_primal=tol_primal)

    phi_primal = to_primal(ray.phi, path.window, strict=False).values
    report.starts_at_phi = sup_distance(path.primal(0).values, phi_primal)
    lip = max(abs(path.M), abs(path.m))
    report.m, report.M = path.m, path.M
    excess = 0.0
    for i in range(1, min(4, len(ray.t_samples))):
        dist = sup_distance(path.primal(i).values, phi_primal)
        excess = max(excess, dist - lip * float(ray.t_samples[i]))
    report.emanation_excess = excess

    report.above_psi_excess = max(
        0.0, max(dual_sup_diff(ray.psi.dual, d) for d in path.duals)
    )
    report.normalized = abs(path.M) <= tol_dual and abs(path.m + 1.0) <= tol_dual
    report.constant = ray.is_constant(tol_primal)

    sandwich = 0.0
    for i, t in enumerate(ray.t_samples):
        gamma = cutoff(ray.psi, float(t), ray.phi).dual.values
        d = path.duals[i].values
        sandwich = max(sandwich, float(np.max(ray.phi.dual.values - d)), float(np.max(d - gamma)))
    report.sandwich_excess = max(0.0, sandwich)
    report.t_monotone_excess = max(
        0.0,
        max(dual_sup_diff(path.duals[i + 1], path.duals[i]) for i in range(len(path.duals) - 1)),
    )

    if competitor is not None:
        report.competitor_checked = True
        problem = _competitor_problem(ray, competitor, tol_dual, tol_dual)
        if problem is not None:
            logger.info("competitor rejected: %s", problem)
            report.competitor_rejected = problem
        else:
            report.competitor_excess = max(
                0.0, max(dual_sup_diff(a, b) for a, b in zip(path.duals, competitor.duals))
            )
    return report


def hand_built_ray(
    phi: ToricPotential,
    nu: float,
    t_samples: Sequence[float],
    power: float = 1.0,
    window: Optional[Grid1D] = None,
) -> GeodesicPath:
    """Geodesic ray with dual(phi) + t (1 - p/nu)_+^power.

    Dual-affine in t, so a geodesic; it starts at phi with m = -1, M = 0 and
    stays above NU-type data whose Lelong number is at least ``nu``.
    """
    if phi.geom.dim != 1:
        raise DomainError("hand_built_ray is one-dimensional")
    if not 0.0 < nu <= 1.0 or power < 1.0:
        raise DomainError(f"need 0 < nu <= 1 and power >= 1, got nu={nu}, power={power}")
    phi.require_bounded("hand_built_ray")
    weight = np.maximum(0.0, 1.0 - phi.geom.nodes / nu) ** power
    ts = np.asarray(t_samples, dtype=float)
    duals = tuple(ExtGridFn(phi.geom.polytope_grid, phi.dual.values + float(t) * weight) for t in ts)
    return GeodesicPath(phi.geom, ts, duals, window or DEFAULT_NUMERIC.window_grid(),
                        label=f"hand_ray({phi.label},{nu:g},{power:g})")


__all__ = [
    'RayApprox', 'RayEnergyProfile', 'MembershipReport',
    'linearized_subgeodesic', 'segment_quotient_bounds', 'build_ray',
    'ray_energy_profile', 'membership_check', 'hand_built_ray',
]
