"""
Plurisubharmonic Envelopes

P(b0) is the largest potential below an obstacle b0. For obstacles built from
potentials the dual of P(min(phi_1, ..., phi_k)) is the closed hull of the
pointwise max of the duals; for general window obstacles the dual is the
conjugate of f0 + b0 restricted to the polytope. The singularity-type
envelope P_[psi](phi) is computed by the C -> inf iteration and by its closed
form (dual(phi) restricted to dom dual(psi)).
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .config_manager import DEFAULT_NUMERIC
from .convex_core import (
    INF,
    DomainError,
    EnvelopeInconsistencyError,
    ExtGridFn,
    Grid1D,
    InconsistencyError,
    SlopeData,
    conjugate_brute,
    hull_values,
    sup_distance,
)
from .energy import is_in_E
from .logging_config import get_logger
from .toric_model import (
    ToricGeometry,
    ToricPotential,
    lelong,
    node_masses,
    to_primal,
)

logger = get_logger("envelopes")


# ============================================================================
# Obstacles
# ============================================================================

@dataclass(frozen=True, eq=False)
class Obstacle:
    """Window obstacle b0 (relative to f0) with affine tails.

    ``tails`` are the asymptotic slopes of b0 itself. ``sources`` lists the
    potentials whose pointwise min b0 is, when it was built that way.
    """

    geom: ToricGeometry
    window: Grid1D
    values: np.ndarray
    tails: SlopeData
    sources: Tuple[ToricPotential, ...] = field(default_factory=tuple)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.window.n_nodes,):
            raise DomainError("obstacle values do not match the window")
        if not np.isfinite(vals).all():
            raise DomainError("obstacle must be finite on the window")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_potential(cls, pot: ToricPotential, window: Grid1D) -> "Obstacle":
        """b0 = phi~ on the window; tail slopes from the dual domain."""
        f = to_primal(pot, window, strict=False)
        f0 = pot.geom.f0(window)
        tails = SlopeData(
            f.tails.slope_left - f0.tails.slope_left,
            f.tails.slope_right - f0.tails.slope_right,
        )
        return cls(pot.geom, window, f.relative_values(), tails, (pot,))

    @classmethod
    def from_window(cls, geom: ToricGeometry, window: Grid1D, values: np.ndarray,
                    tail_slopes: Tuple[float, float] = (0.0, 0.0)) -> "Obstacle":
        return cls(geom, window, values, SlopeData(*tail_slopes))

    def minimum(self, other: "Obstacle") -> "Obstacle":
        """min(b0, b1); tail slopes follow the smaller branch on each side."""
        if other.window != self.window:
            raise DomainError("obstacles live on different windows")
        tails = SlopeData(
            max(self.tails.slope_left, other.tails.slope_left),
            min(self.tails.slope_right, other.tails.slope_right),
        )
        sources = self.sources + other.sources if self.sources and other.sources else ()
        return Obstacle(self.geom, self.window, np.minimum(self.values, other.values), tails, sources)


@dataclass
class EnvelopeResult:
    """Envelope with the diagnostics of how it was reached."""

    result: ToricPotential
    c_schedule: List[float] = field(default_factory=list)
    stabilization_C: Optional[float] = None
    closed_form_gap: float = 0.0
    c_monotone_violation: float = 0.0
    iterate: Optional[ToricPotential] = None


# ============================================================================
# Projections
# ============================================================================

def _dual_projection(sources: Sequence[ToricPotential]) -> ExtGridFn:
    merged = np.max(np.stack([s.dual.values for s in sources]), axis=0)
    if not np.isfinite(merged).any():
        raise DomainError("obstacle admits no potential below it")
    grid = sources[0].geom.polytope_grid
    if sources[0].geom.dim == 1:
        return ExtGridFn(grid, hull_values(merged, grid.nodes))
    return ExtGridFn(grid, merged)


def _primal_projection(b0: Obstacle) -> ExtGridFn:
    """Conjugate of F = f0 + b0 (window values plus affine tails) on the polytope."""
    geom = b0.geom
    f0 = geom.f0(b0.window)
    xs = b0.window.nodes
    fs = f0.values + b0.values
    s_left = f0.tails.slope_left + b0.tails.slope_left
    s_right = f0.tails.slope_right + b0.tails.slope_right
    ps = geom.nodes
    # beyond the window F is affine; p inside the tail slope range peaks on the window
    inside = (ps >= s_left - 1e-12) & (ps <= s_right + 1e-12)
    if not inside.any():
        raise DomainError(f"tail slopes [{s_left:g}, {s_right:g}] miss the polytope")
    values = np.full(ps.shape, INF)
    values[inside] = conjugate_brute(xs, fs, ps[inside])
    return ExtGridFn(geom.polytope_grid, values)


def proj(b0: Obstacle, use_sources: bool = True) -> ToricPotential:
    """P(b0): the largest potential below the obstacle.

    Obstacles built from potentials go through the exact dual identity unless
    ``use_sources`` is False; everything else through the primal conjugate.

    Raises:
        DomainError: no potential lies below b0
    """
    if b0.sources and use_sources:
        dual = _dual_projection(b0.sources)
    else:
        if b0.geom.dim != 1:
            raise DomainError("window obstacles are one-dimensional")
        dual = _primal_projection(b0)
    return ToricPotential(b0.geom, dual, label="P(b0)")


def proj_pair(b0: Obstacle, b1: Obstacle, use_sources: bool = True) -> ToricPotential:
    """P(b0, b1) = P(min(b0, b1))."""
    return proj(b0.minimum(b1), use_sources).relabel("P(b0,b1)")


def proj_potentials(*pots: ToricPotential) -> ToricPotential:
    """P(min(phi_1, ..., phi_k)) straight from the duals."""
    if not pots:
        raise DomainError("proj_potentials needs at least one potential")
    return ToricPotential(pots[0].geom, _dual_projection(pots), label="P(" + ",".join(p.label for p in pots) + ")")


# ============================================================================
# Singularity-type envelope
# ============================================================================

def closed_form_bracket(psi: ToricPotential, phi: ToricPotential) -> ToricPotential:
    """dual(phi) on dom dual(psi), +inf elsewhere, closed by a hull."""
    values = np.where(psi.dual.finite_mask, phi.dual.values, INF)
    grid = phi.geom.polytope_grid
    if phi.geom.dim == 1:
        values = hull_values(values, grid.nodes)
    return ToricPotential(phi.geom, ExtGridFn(grid, values), label=f"P[{psi.label}]({phi.label})")


def _c_iterate(psi: ToricPotential, phi: ToricPotential, c: float) -> np.ndarray:
    merged = np.maximum(psi.dual.values - c, phi.dual.values)
    if phi.geom.dim == 1:
        return hull_values(merged, phi.geom.nodes)
    return merged


def p_bracket(
    psi: ToricPotential,
    phi: ToricPotential,
    c_schedule: Sequence[float] = DEFAULT_NUMERIC.c_schedule,
    c_max_exponent: int = DEFAULT_NUMERIC.c_max_exponent,
    stabilization: float = DEFAULT_NUMERIC.stabilization,
    window: Optional[Grid1D] = None,
    gap_tol: Optional[float] = None,
) -> EnvelopeResult:
    """P_[psi](phi) = usc lim_C P(psi + C, phi), with its closed form.

    The C-iteration runs over ``c_schedule`` and keeps doubling up to
    2**c_max_exponent until two successive iterates agree within
    ``stabilization``. The closed form is returned as the result; the gap
    between the two paths is measured on the window.

    Raises:
        EnvelopeInconsistencyError: no stabilization and the paths disagree
    """
    phi.require_bounded("p_bracket")
    window = window or DEFAULT_NUMERIC.window_grid()
    gap_tol = gap_tol if gap_tol is not None else DEFAULT_NUMERIC.constancy_factor * window.h
    schedule = [float(c) for c in c_schedule]
    if not schedule:
        raise DomainError("empty C schedule")
    limit = float(2 ** c_max_exponent)
    while schedule[-1] < limit:
        schedule.append(schedule[-1] * 2.0)

    used: List[float] = []
    previous: Optional[np.ndarray] = None
    stabilized: Optional[float] = None
    violation = 0.0
    for c in schedule:
        current = _c_iterate(psi, phi, c)
        used.append(c)
        if previous is not None:
            # P(psi + C, phi) grows with C, so the dual may only decrease
            both = np.isfinite(current) & np.isfinite(previous)
            if both.any():
                violation = max(violation, float(np.max(current[both] - previous[both])))
            if sup_distance(current, previous) <= stabilization:
                stabilized = c
                previous = current
                break
        previous = current
    iterate = ToricPotential(phi.geom, ExtGridFn(phi.geom.polytope_grid, previous), label="P(psi+C,phi)")
    closed = closed_form_bracket(psi, phi)

    if phi.geom.dim == 1:
        gap = sup_distance(
            to_primal(iterate, window, strict=False).values,
            to_primal(closed, window, strict=False).values,
        )
    else:
        gap = sup_distance(iterate.dual.values, closed.dual.values)
    if stabilized is None:
        logger.warning("C iteration for %s did not stabilize up to C=%g", psi.label, used[-1])
        if gap > gap_tol:
            raise EnvelopeInconsistencyError(
                f"C iteration and closed form disagree by {gap:.3e} without stabilization"
            )
    logger.debug("p_bracket %s: C*=%s gap=%.3e", psi.label, stabilized, gap)
    return EnvelopeResult(closed, used, stabilized, gap, max(0.0, violation), iterate)


@dataclass(frozen=True)
class ECheckReport:
    """Both sides of: psi in E iff P_[psi](phi) = phi."""

    in_E: bool
    gap: float
    threshold: float
    lelong_number: float
    closed_form_gap: float

    @property
    def consistent(self) -> bool:
        if self.in_E:
            return self.gap <= self.threshold
        return self.gap >= self.threshold


def envelope_gap(envelope: ToricPotential, phi: ToricPotential, window: Grid1D) -> float:
    """Window sup |P~ - phi~|."""
    return sup_distance(
        to_primal(envelope, window, strict=False).values,
        to_primal(phi, window, strict=False).values,
    )


def e_check(
    psi: ToricPotential,
    phi: ToricPotential,
    window: Optional[Grid1D] = None,
    l_schedule: Sequence[float] = DEFAULT_NUMERIC.l_schedule,
    tol_c: float = DEFAULT_NUMERIC.tol_c,
) -> ECheckReport:
    """Full mass against envelope saturation.

    In E the envelope gap must stay within 5 h_x; outside E with Lelong
    number nu it must reach nu * L / 2 at the window edge.

    Raises:
        InconsistencyError: the two verdicts disagree
    """
    if psi.geom.dim != 1:
        raise DomainError("e_check is one-dimensional")
    window = window or DEFAULT_NUMERIC.window_grid()
    membership = is_in_E(psi, l_schedule=l_schedule, tol_c=tol_c)
    bracket = p_bracket(psi, phi, window=window)
    gap = envelope_gap(bracket.result, phi, window)
    nu = max(lelong(psi, "low"), lelong(psi, "high"))
    if membership.in_E:
        threshold = DEFAULT_NUMERIC.constancy_factor * window.h
    else:
        threshold = nu * window.hi / 2.0
    report = ECheckReport(membership.in_E, gap, threshold, nu, bracket.closed_form_gap)
    if not report.consistent:
        raise InconsistencyError(
            f"E membership {membership.in_E} but envelope gap {gap:.3e} (threshold {threshold:.3e})"
        )
    return report


@dataclass(frozen=True)
class MaximalityReport:
    defect: float
    mass: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.defect <= self.bound


def maximality_defect(
    psi: ToricPotential,
    phi: ToricPotential,
    window: Optional[Grid1D] = None,
    factor: float = DEFAULT_NUMERIC.constancy_factor,
) -> MaximalityReport:
    """int |P~ - phi~| dMA(P) on the window for P = P_[psi](phi)."""
    if psi.geom.dim != 1:
        raise DomainError("maximality_defect is one-dimensional")
    window = window or DEFAULT_NUMERIC.window_grid()
    envelope = closed_form_bracket(psi, phi)
    fp = to_primal(envelope, window, strict=False)
    fphi = to_primal(phi, window, strict=False)
    masses = node_masses(fp)
    defect = float(np.dot(np.abs(fp.values - fphi.values), masses))
    mass = float(np.sum(masses))
    return MaximalityReport(defect, mass, factor * psi.geom.h * mass)


@dataclass(frozen=True)
class DominationReport:
    ae_min: float
    everywhere_min: float
    tol: float

    @property
    def premise(self) -> bool:
        return self.ae_min >= -self.tol

    @property
    def conclusion(self) -> bool:
        return self.everywhere_min >= -self.tol

    @property
    def ok(self) -> bool:
        return (not self.premise) or self.conclusion


def domination_check(
    psi_prime: ToricPotential,
    phi: ToricPotential,
    window: Optional[Grid1D] = None,
    tol: Optional[float] = None,
) -> DominationReport:
    """psi' >= phi a.e. for MA(psi') forces psi' >= phi on the window.

    The a.e. premise is read on nodes that carry MA(psi') mass.
    """
    if psi_prime.geom.dim != 1:
        raise DomainError("domination_check is one-dimensional")
    window = window or DEFAULT_NUMERIC.window_grid()
    tol = tol if tol is not None else DEFAULT_NUMERIC.constancy_factor * window.h
    fp = to_primal(psi_prime, window, strict=False)
    fphi = to_primal(phi, window, strict=False)
    diff = fp.values - fphi.values
    charged = node_masses(fp) > 0.0
    ae_min = float(np.min(diff[charged])) if charged.any() else math.inf
    return DominationReport(ae_min, float(np.min(diff)), tol)


__all__ = [
    'Obstacle', 'EnvelopeResult', 'ECheckReport', 'MaximalityReport', 'DominationReport',
    'proj', 'proj_pair', 'proj_potentials', 'closed_form_bracket', 'p_bracket',
    'envelope_gap', 'e_check', 'maximality_defect', 'domination_check',
]
