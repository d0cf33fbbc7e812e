"""
Toric Model

Torus-invariant omega_0-psh potentials encoded by their Legendre duals on the
moment polytope. A potential phi is stored as the symbol g = (f0 + phi)^*;
order reverses (psi <= phi iff g_psi >= g_phi), pointwise max becomes the
convex hull of the pointwise min, and the Monge-Ampere mass is the measure of
the dual's effective domain.

The log coordinate is x = log|z|, so a Lelong number nu shows up as the
asymptotic slope of phi~ ~ nu * x at x -> -inf.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple, Union

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.special import xlogy

from .cache import array_digest, get_transform_cache
from .convex_core import (
    INF,
    TOL_CONVEX,
    ConvexityError,
    DomainError,
    ExtGridFn,
    Grid1D,
    PrimalFunction,
    ProductGrid,
    UnboundedPotentialError,
    WindowTooSmallError,
    convexity_defect,
    hull_of_min,
    legendre_inv,
    required_half_width,
)
from .logging_config import get_logger

logger = get_logger("toric_model")


# ============================================================================
# Geometry and potentials
# ============================================================================

@dataclass(frozen=True, eq=False)
class ToricGeometry:
    """Moment polytope grid with the reference dual g0 (vol normalized to 1)."""

    dim: int
    polytope_grid: Union[Grid1D, ProductGrid]
    g0: ExtGridFn
    vol: float = 1.0

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise DomainError(f"dimension must be 1 or 2, got {self.dim}")
        if self.g0.grid != self.polytope_grid:
            raise DomainError("g0 lives on a different grid")
        if not self.g0.finite_everywhere:
            raise DomainError("g0 must be finite on the whole polytope")
        if convexity_defect(self.g0) > TOL_CONVEX * self.g0.scale:
            raise ConvexityError("g0 is not convex")
        if self.vol != 1.0:
            raise DomainError("total mass is normalized to 1")

    @classmethod
    def standard(cls, n: int) -> "ToricGeometry":
        """P = [0, 1] with g0(p) = p log p + (1 - p) log(1 - p)."""
        grid = Grid1D.polytope(n)
        p = grid.nodes
        q = np.clip(1.0 - p, 0.0, None)
        return cls(1, grid, ExtGridFn(grid, xlogy(p, p) + xlogy(q, q)))

    @classmethod
    def simplex(cls, n: int) -> "ToricGeometry":
        """Unit simplex in the plane with the Fubini-Study type reference dual."""
        grid = ProductGrid(Grid1D.polytope(n), simplex=True)
        p1, p2 = grid.points
        q = np.clip(1.0 - p1 - p2, 0.0, None)
        values = np.where(grid.mask, xlogy(p1, p1) + xlogy(p2, p2) + xlogy(q, q), INF)
        return cls(2, grid, ExtGridFn(grid, values))

    @property
    def h(self) -> float:
        return self.polytope_grid.h

    @property
    def nodes(self) -> np.ndarray:
        if self.dim != 1:
            raise DomainError("node coordinates are one-dimensional")
        return self.polytope_grid.nodes

    def key(self) -> Tuple:
        return (self.dim, self.polytope_grid.key())

    def f0(self, window: Grid1D) -> PrimalFunction:
        """Reference primal on the window (cached)."""
        if self.dim != 1:
            raise DomainError("primal window functions are one-dimensional")
        key = array_digest("f0", self.polytope_grid.key(), window.key(), self.g0.values)
        return get_transform_cache().get_or_compute(key, lambda: _strict_primal(self.g0, window))

    def reference(self) -> "ToricPotential":
        return ToricPotential(self, self.g0, label="ZERO")


@dataclass(frozen=True, eq=False)
class ToricPotential:
    """A potential phi given by its dual symbol on the polytope grid."""

    geom: ToricGeometry
    dual: ExtGridFn
    label: str = ""

    def __post_init__(self):
        if self.dual.grid != self.geom.polytope_grid:
            raise DomainError("dual lives on a different grid than the geometry")
        defect = convexity_defect(self.dual)
        if defect > TOL_CONVEX * self.dual.scale:
            raise ConvexityError(f"dual symbol is not convex (defect {defect:.3e})", defect)

    @property
    def bounded(self) -> bool:
        return self.dual.finite_everywhere

    @property
    def values(self) -> np.ndarray:
        return self.dual.values

    def shift(self, c: float) -> "ToricPotential":
        """phi + c, i.e. dual - c."""
        return ToricPotential(self.geom, self.dual.shift(-c), self.label)

    def relabel(self, label: str) -> "ToricPotential":
        return ToricPotential(self.geom, self.dual, label)

    def require_bounded(self, what: str = "operation") -> None:
        if not self.bounded:
            raise UnboundedPotentialError(f"{what} needs a bounded potential ({self.label or 'unnamed'})")

    @cached_property
    def relative_dual(self) -> np.ndarray:
        """dual - g0 (+inf off the domain)."""
        return self.dual.values - self.geom.g0.values


@dataclass(frozen=True, eq=False)
class MeasureReport:
    """Monge-Ampere measure of a potential on the window (dim 1)."""

    window: Optional[Grid1D]
    density: Optional[np.ndarray]
    node_mass: Optional[np.ndarray]
    mass: float
    deficit: float


# ============================================================================
# Evaluation on the window
# ============================================================================

def _strict_primal(dual: ExtGridFn, window: Grid1D) -> PrimalFunction:
    f = legendre_inv(dual, window)
    if not f.exact_tails:
        raise WindowTooSmallError(
            "window does not reach the affine tail regime",
            required_half_width(dual, window),
        )
    return f


def to_primal(pot: ToricPotential, window: Grid1D, strict: bool = True) -> PrimalFunction:
    """Conjugate f = (dual)^* on the window, with f0 attached as reference.

    ``relative_values()`` on the result gives phi~ = f - f0. With ``strict``
    the window must contain both tail kinks of the dual; potentials with
    sub-linear decay (kinks far outside any window) pass ``strict=False`` and
    still get exact node values.

    Raises:
        WindowTooSmallError: strict mode and the window misses a tail kink
    """
    if pot.geom.dim != 1:
        raise DomainError("to_primal is one-dimensional")
    f0 = pot.geom.f0(window)
    key = array_digest("primal", pot.geom.key(), window.key(), pot.dual.values)
    f = get_transform_cache().get_or_compute(key, lambda: legendre_inv(pot.dual, window))
    if strict and not f.exact_tails:
        raise WindowTooSmallError(
            f"window too small for {pot.label or 'potential'}",
            required_half_width(pot.dual, window),
        )
    return PrimalFunction(
        f.window, f.values, f.tails, f.tail_offsets, f.exact_tails, reference=f0
    )


def relative_tail_limits(pot: ToricPotential) -> Tuple[float, float]:
    """Limits of phi~ as x -> -inf and x -> +inf.

    Left of every kink f(x) = p_lo x - g(p_lo) and f0(x) = -g0(0); the limit
    is finite only when the domain starts at 0, likewise on the right.
    """
    grid = pot.geom.polytope_grid
    i0, i1 = pot.dual.domain_indices
    g, g0 = pot.dual.values, pot.geom.g0.values
    left = (g0[0] - g[0]) if i0 == 0 else -INF
    right = (g0[-1] - g[-1]) if i1 == grid.n_cells else -INF
    return float(left), float(right)


def sup_inf(pot: ToricPotential, window: Grid1D, strict: bool = False) -> Tuple[float, float]:
    """sup and inf of phi~ over window nodes and tail limits."""
    rel = to_primal(pot, window, strict=strict).relative_values()
    left, right = relative_tail_limits(pot)
    sup = max(float(np.max(rel)), left, right)
    inf = min(float(np.min(rel)), left, right)
    return sup, inf


def dual_sup_diff(a: ExtGridFn, b: ExtGridFn) -> float:
    """sup_x (f_a - f_b) computed as sup_p (g_b - g_a)."""
    fa, fb = np.isfinite(a.values), np.isfinite(b.values)
    # only g_b finite contributes -inf, only g_a finite contributes +inf
    diffs = []
    both = fa & fb
    if both.any():
        diffs.append(float(np.max(b.values[both] - a.values[both])))
    if (fb & ~fa).any():
        diffs.append(-INF)
    if (fa & ~fb).any():
        diffs.append(INF)
    return max(diffs) if diffs else -INF


def dual_inf_diff(a: ExtGridFn, b: ExtGridFn) -> float:
    """inf_x (f_a - f_b) computed as inf_p (g_b - g_a)."""
    fa, fb = np.isfinite(a.values), np.isfinite(b.values)
    diffs = []
    both = fa & fb
    if both.any():
        diffs.append(float(np.min(b.values[both] - a.values[both])))
    if (fb & ~fa).any():
        diffs.append(-INF)
    if (fa & ~fb).any():
        diffs.append(INF)
    return min(diffs) if diffs else INF


def potential_sup(pot: ToricPotential) -> float:
    """sup of phi~ from the dual identity."""
    return dual_sup_diff(pot.dual, pot.geom.g0)


def potential_inf(pot: ToricPotential) -> float:
    """inf of phi~ from the dual identity (-inf for unbounded potentials)."""
    return dual_inf_diff(pot.dual, pot.geom.g0)


def is_below(psi: ToricPotential, phi: ToricPotential, tol: float = 0.0) -> bool:
    """psi <= phi + tol, tested as dual(psi) >= dual(phi) - tol."""
    return dual_sup_diff(psi.dual, phi.dual) <= tol


# ============================================================================
# Operations
# ============================================================================

def _same_geometry(a: ToricPotential, b: ToricPotential) -> None:
    if a.geom is not b.geom and a.geom.key() != b.geom.key():
        raise DomainError("potentials live on different geometries")


def toric_max(a: ToricPotential, b: ToricPotential) -> ToricPotential:
    """max(a, b): dual = convex hull of min(dual a, dual b)."""
    _same_geometry(a, b)
    return ToricPotential(a.geom, hull_of_min(a.dual, b.dual), label=f"max({a.label},{b.label})")


def cutoff(psi: ToricPotential, l: float, base: Optional[ToricPotential] = None) -> ToricPotential:
    """max(base - l, psi); with base ZERO this is the canonical cutoff."""
    base = base if base is not None else psi.geom.reference()
    base.require_bounded("cutoff base")
    if l < 0:
        raise DomainError(f"cutoff level must be >= 0, got {l}")
    return toric_max(base.shift(-l), psi).relabel(f"cutoff({psi.label},{l:g})")


def node_masses(f: PrimalFunction) -> np.ndarray:
    """Mass of f'' dx carried by each window node.

    Interior nodes get the slope jump across their cell; the edge nodes also
    collect the slope change between the window edge and the tails, so the
    total equals slope_right - slope_left exactly.
    """
    h = f.window.h
    slopes = np.diff(f.values) / h
    masses = np.zeros(f.window.n_nodes)
    masses[1:-1] = np.diff(slopes)
    masses[0] = slopes[0] - f.tails.slope_left
    masses[-1] = f.tails.slope_right - slopes[-1]
    return np.maximum(masses, 0.0)


def _domain_area(pot: ToricPotential) -> float:
    grid: ProductGrid = pot.geom.polytope_grid
    p1, p2 = grid.points
    finite = pot.dual.finite_mask
    pts = np.column_stack([p1[finite], p2[finite]])
    if pts.shape[0] < 3:
        return 0.0
    try:
        return float(ConvexHull(pts).volume) / 0.5
    except QhullError:
        return 0.0


def ma_measure(pot: ToricPotential, window: Optional[Grid1D] = None) -> MeasureReport:
    """Monge-Ampere measure; total mass = |dom(dual)| (vol normalized).

    dim 2 reports the normalized domain area only.
    """
    if pot.geom.dim == 2:
        mass = min(1.0, _domain_area(pot))
        return MeasureReport(None, None, None, mass, pot.geom.vol - mass)
    if window is None:
        raise DomainError("ma_measure in dimension 1 needs a window")
    f = to_primal(pot, window, strict=False)
    masses = node_masses(f)
    density = np.zeros_like(masses)
    density[1:-1] = masses[1:-1] / window.h
    mass = float(np.sum(masses))
    return MeasureReport(window, density, masses, mass, pot.geom.vol - mass)


def domain_measure(pot: ToricPotential) -> float:
    """|dom(dual)| read directly off the polytope grid."""
    if pot.geom.dim == 2:
        return min(1.0, _domain_area(pot))
    lo, hi = pot.dual.domain
    return hi - lo


# second difference of dual - g0 above which the dual counts as blowing up at a vertex
BLOWUP_CURVATURE = 1.0


def _blows_up(rel: np.ndarray) -> bool:
    """rel holds dual - g0 at the three finite nodes nearest a vertex, nearest first."""
    return rel.size == 3 and bool(np.all(np.isfinite(rel))) and rel[0] - 2.0 * rel[1] + rel[2] > BLOWUP_CURVATURE


def lelong(psi: ToricPotential, vertex: str = "low") -> float:
    """Lelong number at a torus-fixed point: the slope deficit of the domain.

    A dual that is +inf only at the vertex node and blows up next to it
    (EINF's 1/p) has the vertex in the closure of its domain, so the
    number is 0 there rather than one cell.
    """
    if psi.geom.dim != 1:
        raise DomainError("lelong is one-dimensional")
    if vertex not in ("low", "high"):
        raise ValueError(f"vertex must be 'low' or 'high', got {vertex!r}")
    lo, hi = psi.dual.domain
    i0, i1 = psi.dual.domain_indices
    rel = psi.dual.values - psi.geom.g0.values
    last = psi.geom.nodes.size - 1
    if vertex == "low":
        return 0.0 if i0 == 1 and _blows_up(rel[1:4]) else lo
    return 0.0 if i1 == last - 1 and _blows_up(rel[last - 1:last - 4:-1]) else 1.0 - hi


__all__ = [
    'ToricGeometry', 'ToricPotential', 'MeasureReport',
    'to_primal', 'relative_tail_limits', 'sup_inf',
    'dual_sup_diff', 'dual_inf_diff', 'potential_sup', 'potential_inf', 'is_below',
    'toric_max', 'cutoff', 'node_masses', 'ma_measure', 'domain_measure', 'lelong',
]
