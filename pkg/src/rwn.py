"""
Test Curves and the Ross-Witt Nystrom Ray

Legendre transforms in t turn rays into test curves and back. On the dual
side the transform of a ray is sup_t (dual_t + t tau) and the inverse
transform of a curve is the closed hull of inf_tau (dual_tau - t tau). The
curve built from (phi, psi) is maximized tau by tau with the singularity-type
envelope, and the resulting ray is compared with the construction in
``rays``.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .config_manager import DEFAULT_NUMERIC
from .convex_core import (
    INF,
    ConvexityError,
    DomainError,
    ExtGridFn,
    Grid1D,
    OrderingError,
    convexity_defect,
    hull_values,
    sup_distance,
)
from .envelopes import p_bracket
from .geodesics import GeodesicPath, hcma_oracle, path_distance, segment
from .logging_config import get_logger
from .rays import RayApprox, build_ray
from .toric_model import (
    ToricGeometry,
    ToricPotential,
    cutoff,
    dual_sup_diff,
    is_below,
    to_primal,
)
from .zoo import bump, nu_singular

logger = get_logger("rwn")

BOTTOM = None  # test-curve value -inf; never enters arithmetic


# ============================================================================
# Test curves
# ============================================================================

@dataclass(eq=False)
class TestCurve:
    """Dual symbols per tau; ``None`` marks the bottom value.

    Attributes:
        geom: Geometry of the curve
        tau_samples: Increasing tau values
        per_tau: Dual per tau, or None for tau with value -inf
        t_grid: Times used for the infimum in t
        saturated: Per tau, whether every finite node stopped moving in t
    """

    __test__ = False  # not a pytest class

    geom: ToricGeometry
    tau_samples: np.ndarray
    per_tau: Tuple[Optional[ExtGridFn], ...]
    t_grid: np.ndarray = field(default_factory=lambda: np.zeros(0))
    saturated: Tuple[bool, ...] = field(default_factory=tuple)
    label: str = ""

    def potential(self, i: int) -> Optional[ToricPotential]:
        dual = self.per_tau[i]
        if dual is None:
            return None
        return ToricPotential(self.geom, dual, label=f"{self.label}@tau={self.tau_samples[i]:g}")

    def index(self, tau: float, tol: float = 1e-12) -> int:
        hits = np.flatnonzero(np.abs(self.tau_samples - tau) <= tol)
        if hits.size == 0:
            raise DomainError(f"tau={tau} is not a sample of the curve")
        return int(hits[0])

    @property
    def c_bound(self) -> float:
        """Largest tau with a finite value (the curve is bottom above it)."""
        finite = [tau for tau, d in zip(self.tau_samples, self.per_tau) if d is not None]
        return float(max(finite)) if finite else -INF


def test_curve_times(
    t_max: float = DEFAULT_NUMERIC.test_curve_t_max,
    step: float = 0.25,
    tail_exponent: int = DEFAULT_NUMERIC.test_curve_tail_exponent,
) -> np.ndarray:
    """Uniform times on [0, t_max] followed by doublings up to 2**tail_exponent."""
    uniform = np.arange(0.0, t_max + 0.5 * step, step)
    tail = [2.0 ** k for k in range(tail_exponent + 1) if 2.0 ** k > t_max]
    return np.concatenate([uniform, np.array(tail)])


def test_curve(
    phi: ToricPotential,
    psi: ToricPotential,
    tau_samples: Optional[Sequence[float]] = None,
    t_max: Optional[float] = None,
    tail_exponent: int = DEFAULT_NUMERIC.test_curve_tail_exponent,
    saturation_tol: float = 1e-9,
) -> TestCurve:
    """gamma*_tau = inf_t (max(phi - t, psi) - t tau) on the dual side.

    dual(gamma*_tau) = sup_t (H_t + t tau). Nodes where that sup is still
    growing between the last two tail times are not saturated and get +inf;
    tau > 0 gives the bottom value.

    Raises:
        OrderingError: psi not below phi
    """
    if phi.geom.dim != 1:
        raise DomainError("test curves are one-dimensional")
    phi.require_bounded("test_curve")
    if not is_below(psi, phi, tol=1e-12):
        raise OrderingError(f"{psi.label or 'psi'} is not below {phi.label or 'phi'}")
    taus = np.asarray(tau_samples if tau_samples is not None else DEFAULT_NUMERIC.tau_samples(), dtype=float)
    osc = dual_sup_diff(phi.dual, psi.dual)
    horizon = DEFAULT_NUMERIC.test_curve_t_max if t_max is None else t_max
    if np.isfinite(osc):
        horizon = max(horizon, float(np.ceil(osc)))
    ts = test_curve_times(horizon, tail_exponent=tail_exponent)
    hulls = np.stack([cutoff(psi, float(t), phi).dual.values for t in ts])
    nodes = phi.geom.nodes

    per_tau: List[Optional[ExtGridFn]] = []
    saturated: List[bool] = []
    for tau in taus:
        if tau > 0.0:
            per_tau.append(BOTTOM)
            saturated.append(True)
            continue
        lifted = hulls + ts[:, None] * tau
        best = np.max(lifted, axis=0)
        moving = lifted[-1] > lifted[-2] + saturation_tol * np.maximum(1.0, np.abs(lifted[-2]))
        values = np.where(moving, INF, best)
        if not np.isfinite(values).any():
            per_tau.append(BOTTOM)
            saturated.append(False)
            continue
        per_tau.append(ExtGridFn(phi.geom.polytope_grid, hull_values(values, nodes)))
        saturated.append(not bool(moving.any()))
    logger.debug("test curve %s: %d taus over %d times", psi.label, taus.size, ts.size)
    return TestCurve(phi.geom, taus, tuple(per_tau), ts, tuple(saturated), label=f"curve({phi.label},{psi.label})")


test_curve.__test__ = False
test_curve_times.__test__ = False


@dataclass(frozen=True)
class CurveProperties:
    """Deviations from: gamma*_tau = phi for tau <= -1, gamma*_0 = psi, bottom for tau > 0."""

    below_minus_one: float
    at_zero: float
    bottom_above_zero: bool
    concavity_defect: float


def curve_properties(curve: TestCurve, phi: ToricPotential, psi: ToricPotential,
                     window: Optional[Grid1D] = None) -> CurveProperties:
    """Check the pair properties of a curve and its concavity in tau on the window."""
    window = window or DEFAULT_NUMERIC.window_grid()
    low = 0.0
    zero_gap = INF
    bottom = True
    for i, tau in enumerate(curve.tau_samples):
        dual = curve.per_tau[i]
        if tau <= -1.0:
            low = max(low, INF if dual is None else sup_distance(dual.values, phi.dual.values))
        elif abs(tau) <= 1e-12:
            zero_gap = INF if dual is None else sup_distance(dual.values, psi.dual.values)
        elif tau > 0.0:
            bottom = bottom and dual is None
    return CurveProperties(low, zero_gap, bottom, concavity_in_tau(curve, window))


def concavity_in_tau(curve: TestCurve, window: Grid1D) -> float:
    """Largest positive second difference in tau of gamma*_tau on window nodes.

    Consecutive finite taus enter through divided differences.
    """
    rows = []
    taus = []
    for i, tau in enumerate(curve.tau_samples):
        pot = curve.potential(i)
        if pot is None:
            continue
        rows.append(to_primal(pot, window, strict=False).relative_values())
        taus.append(float(tau))
    worst = 0.0
    for k in range(1, len(rows) - 1):
        a, b, c = taus[k - 1], taus[k], taus[k + 1]
        # second divided difference, scaled back to a unit-spacing defect
        d2 = ((rows[k + 1] - rows[k]) / (c - b) - (rows[k] - rows[k - 1]) / (b - a)) * 0.5 * (c - a)
        worst = max(worst, float(np.max(d2)))
    return worst


# ============================================================================
# Legendre transforms in t
# ============================================================================

PathLike = Union[GeodesicPath, RayApprox]


def _as_path(path: PathLike) -> GeodesicPath:
    return path.path if isinstance(path, RayApprox) else path


def ray_legendre(
    path: PathLike,
    tau: float,
    velocity_tol: float = 1e-8,
    convexity_tol: Optional[float] = None,
) -> Optional[ToricPotential]:
    """phi*_tau = inf_t (phi_t - t tau), as the dual sup_t (dual_t + t tau).

    The dual grows without bound where the asymptotic velocity of dual_t
    (read from the last two samples) exceeds -tau; those nodes are +inf.
    Returns None (the bottom value) when no node is left.

    Raises:
        ConvexityError: the result is not convex within ``convexity_tol``
    """
    p = _as_path(path)
    ts = p.t_samples
    stack = np.stack([d.values for d in p.duals])
    velocity = (stack[-1] - stack[-2]) / (ts[-1] - ts[-2])
    best = np.max(stack + ts[:, None] * tau, axis=0)
    keep = np.isfinite(best) & (velocity + tau <= velocity_tol)
    if not keep.any():
        return None
    values = np.where(keep, best, INF)
    idx = np.flatnonzero(keep)
    if idx[-1] - idx[0] + 1 != idx.size:
        raise ConvexityError("transform domain is not an interval", 0.0)
    dual = ExtGridFn(p.geom.polytope_grid, values)
    tol = convexity_tol if convexity_tol is not None else DEFAULT_NUMERIC.constancy_factor * p.geom.h
    defect = convexity_defect(dual)
    if defect > tol:
        raise ConvexityError(f"transform at tau={tau:g} not convex (defect {defect:.3e}); extend the t range", defect)
    return ToricPotential(p.geom, dual, label=f"{p.label}*({tau:g})")


def inverse_transform(
    geom: ToricGeometry,
    duals_by_tau: Sequence[Tuple[float, ExtGridFn]],
    t_samples: Sequence[float],
    window: Optional[Grid1D] = None,
    label: str = "",
) -> GeodesicPath:
    """dual_t = closed hull of inf_tau (dual_tau - t tau) at each sample time."""
    ts = np.asarray(t_samples, dtype=float)
    if not duals_by_tau:
        raise DomainError("inverse transform needs at least one finite tau")
    taus = np.array([tau for tau, _ in duals_by_tau])
    stack = np.stack([d.values for _, d in duals_by_tau])
    nodes = geom.nodes
    duals = []
    for t in ts:
        merged = np.min(stack - t * taus[:, None], axis=0)
        duals.append(ExtGridFn(geom.polytope_grid, hull_values(merged, nodes)))
    return GeodesicPath(geom, ts, tuple(duals), window or DEFAULT_NUMERIC.window_grid(), label=label)


@dataclass(eq=False)
class RwnRay:
    """The ray from the maximized test curve, with its ingredients."""

    path: GeodesicPath
    curve: TestCurve
    maximized: Tuple[Optional[ExtGridFn], ...]

    @property
    def t_samples(self) -> np.ndarray:
        return self.path.t_samples


def rwn_ray(
    phi: ToricPotential,
    psi: ToricPotential,
    tau_samples: Optional[Sequence[float]] = None,
    t_samples: Optional[Sequence[float]] = None,
    window: Optional[Grid1D] = None,
    maximize: bool = True,
) -> RwnRay:
    """Ray phi_t = usc sup_tau (psi~_tau + t tau), psi~_tau = P_[gamma*_tau](phi).

    With ``maximize`` False the raw curve gamma*_tau is transformed instead.
    """
    window = window or DEFAULT_NUMERIC.window_grid()
    curve = test_curve(phi, psi, tau_samples)
    ts = t_samples if t_samples is not None else DEFAULT_NUMERIC.t_samples()
    maximized: List[Optional[ExtGridFn]] = []
    pairs: List[Tuple[float, ExtGridFn]] = []
    for i, tau in enumerate(curve.tau_samples):
        pot = curve.potential(i)
        if pot is None:
            maximized.append(None)
            continue
        dual = p_bracket(pot, phi, window=window).result.dual if maximize else pot.dual
        maximized.append(dual)
        pairs.append((float(tau), dual))
    path = inverse_transform(phi.geom, pairs, ts, window, label=f"rwn({phi.label},{psi.label})")
    return RwnRay(path, curve, tuple(maximized))


# ============================================================================
# Comparisons
# ============================================================================

@dataclass(frozen=True)
class RayComparison:
    primal_gap: float
    dual_gap: float


def compare_rays(a: Union[PathLike, RwnRay], b: Union[PathLike, RwnRay]) -> RayComparison:
    """Window and dual sup-distances over all common samples.

    Raises:
        DomainError: the rays are sampled at different times
    """
    pa = a.path if isinstance(a, (RayApprox, RwnRay)) else a
    pb = b.path if isinstance(b, (RayApprox, RwnRay)) else b
    primal = path_distance(pa, pb)
    dual = max(sup_distance(x.values, y.values) for x, y in zip(pa.duals, pb.duals))
    return RayComparison(primal, dual)


def fixed_point_gap(ray: PathLike, tau: float, c: float) -> float:
    """Dual sup-distance between phi*_tau and P(phi*_tau + C, phi_0)."""
    p = _as_path(ray)
    star = ray_legendre(p, tau)
    if star is None:
        raise DomainError(f"transform is bottom at tau={tau:g}")
    phi0 = p.potential(0)
    merged = np.maximum(star.dual.values - c, phi0.dual.values)
    projected = hull_values(merged, p.geom.nodes)
    return sup_distance(projected, star.dual.values)


@dataclass(frozen=True)
class InvolutionGap:
    """Distance between transforms of the rwn ray and the maximized curve."""

    domain_gap: float
    value_gap: float


def involution_gap(rwn: RwnRay, taus: Optional[Sequence[float]] = None) -> InvolutionGap:
    """Apply ray_legendre to the rwn ray and compare with psi~_tau.

    Domain endpoints are compared in polytope units; values on the common
    domain.
    """
    curve = rwn.curve
    domain_gap = 0.0
    value_gap = 0.0
    for i, tau in enumerate(curve.tau_samples):
        if taus is not None and not np.any(np.isclose(taus, tau)):
            continue
        target = rwn.maximized[i]
        if target is None or tau > 0.0:
            continue
        star = ray_legendre(rwn.path, float(tau))
        if star is None:
            domain_gap = INF
            continue
        lo_a, hi_a = star.dual.domain
        lo_b, hi_b = target.domain
        domain_gap = max(domain_gap, abs(lo_a - lo_b), abs(hi_a - hi_b))
        common = star.dual.finite_mask & target.finite_mask
        if common.any():
            value_gap = max(value_gap, float(np.max(np.abs(star.dual.values[common] - target.values[common]))))
    return InvolutionGap(domain_gap, value_gap)


def rwn_ordering_excess(rwn: RwnRay, competitor: GeodesicPath) -> float:
    """Largest amount by which the rwn ray rises above a competitor (dual side)."""
    if competitor.t_samples.shape != rwn.path.t_samples.shape:
        raise DomainError("competitor is sampled at different times")
    return max(0.0, max(dual_sup_diff(a, b) for a, b in zip(rwn.path.duals, competitor.duals)))


# ============================================================================
# Refinement studies
# ============================================================================

@dataclass
class RefinementStudy:
    kind: str
    levels: List[int]
    spacings: List[float]
    errors: List[float]

    @property
    def ratios(self) -> List[float]:
        return [a / b if b > 0 else INF for a, b in zip(self.errors, self.errors[1:])]

    def worst_ratio(self, floor: float = 1e-12) -> float:
        """Smallest error ratio per halving; halvings that start below ``floor`` are resolved and skipped."""
        kept = [r for a, r in zip(self.errors, self.ratios) if a > floor]
        return min(kept) if kept else INF

    def rows(self) -> List[Dict[str, float]]:
        return [{'level': float(l), 'h': h, 'error': e} for l, h, e in zip(self.levels, self.spacings, self.errors)]


def refinement_study(
    kind: str,
    levels: Sequence[int],
    window_L: float = 8.0,
    window_m: int = 256,
    nu: float = 0.3,
    seeds: Tuple[int, int] = (1, 2),
    t_rows: int = 17,
    t_samples: Optional[Sequence[float]] = None,
    tau_samples: Optional[Sequence[float]] = None,
) -> RefinementStudy:
    """Error under polytope refinement; ``levels`` are polytope cell counts.

    ``hcma``: window distance between the wide-stencil oracle and the
    dual-affine segment for a BUMP pair. The window cell count scales with
    the level, reaching ``window_m`` at the finest one. ``ray_agreement``:
    window distance between build_ray and rwn_ray for NU(nu) from ZERO on a
    fixed window.
    """
    errors: List[float] = []
    spacings: List[float] = []
    if kind == "hcma":
        finest = max(levels)
        for level in levels:
            geom = ToricGeometry.standard(level)
            phi0, phi1 = bump(geom, seeds[0]), bump(geom, seeds[1])
            window = Grid1D.window(window_L, max(8, window_m * level // finest))
            oracle = hcma_oracle(phi0, phi1, t_rows=t_rows, window=window)
            exact = segment(phi0, phi1, oracle.t_samples, window=window)
            errors.append(path_distance(oracle, exact))
            spacings.append(geom.h)
    elif kind == "ray_agreement":
        window = Grid1D.window(window_L, window_m)
        ts = t_samples if t_samples is not None else np.linspace(0.0, 4.0, 9)
        for level in levels:
            geom = ToricGeometry.standard(level)
            phi, psi = geom.reference(), nu_singular(geom, nu)
            ray = build_ray(phi, psi, t_samples=ts, window=window)
            other = rwn_ray(phi, psi, tau_samples, ts, window)
            errors.append(compare_rays(ray, other).primal_gap)
            spacings.append(geom.h)
    else:
        raise ValueError(f"unknown refinement study {kind!r}")
    logger.info("refinement %s: errors %s", kind, ["%.3e" % e for e in errors])
    return RefinementStudy(kind, list(levels), spacings, errors)


__all__ = [
    'BOTTOM', 'TestCurve', 'CurveProperties', 'RwnRay', 'RayComparison', 'InvolutionGap',
    'RefinementStudy',
    'test_curve_times', 'test_curve', 'curve_properties', 'concavity_in_tau',
    'ray_legendre', 'inverse_transform', 'rwn_ray', 'compare_rays',
    'fixed_point_gap', 'involution_gap', 'rwn_ordering_excess', 'refinement_study',
]
