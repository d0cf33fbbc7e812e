"""
Convex Core

Grids, extended-real grid functions, discrete Legendre-Fenchel transforms and
convex envelopes. Every other module works on top of these primitives.

Extended reals use ``numpy.inf`` as the +inf sentinel; -inf and NaN are never
valid grid values. Transforms act on the piecewise-affine interpolant of the
node data (plus affine tails in the primal), so conjugates of convex
piecewise-affine data are exact maxima over nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .logging_config import get_logger

logger = get_logger("convex_core")

INF = np.inf

TOL_CONVEX = 1e-9
TOL_SLOPE = 1e-6

# Lattice directions for the 2D envelope sweep.
LATTICE_DIRECTIONS: Tuple[Tuple[int, int], ...] = (
    (1, 0), (0, 1), (1, 1), (1, -1), (1, 2), (2, 1), (1, -2), (2, -1)
)


# ============================================================================
# Errors
# ============================================================================

class ModelError(Exception):
    """Base class for numeric model errors"""


class ConvexityError(ModelError):
    """Input expected to be convex fails the convexity tolerance"""

    def __init__(self, message: str, defect: float = 0.0):
        super().__init__(message)
        self.defect = defect


class DomainError(ModelError):
    """Empty effective domain, mismatched grids or undefined arithmetic"""


class WindowTooSmallError(ModelError):
    """The primal window does not reach the affine tail regime"""

    def __init__(self, message: str, required_L: float):
        super().__init__(f"{message} (required window_L >= {required_L:.6g})")
        self.required_L = required_L


class UnboundedPotentialError(ModelError):
    """Operation needs a bounded potential"""


class ScheduleError(ModelError):
    """A schedule is too short or malformed for the requested tolerance"""


class OrderingError(ModelError):
    """psi <= phi was required but fails"""


class NotConvergedError(ModelError):
    """Iteration or limit did not reach its tolerance"""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class EnvelopeInconsistencyError(ModelError):
    """Envelope evaluation paths disagree and neither stabilized"""


class InconsistencyError(ModelError):
    """Two independent criteria disagree beyond tolerance"""


# ============================================================================
# Grids
# ============================================================================

@dataclass(frozen=True)
class Grid1D:
    """Uniform grid with ``n_cells`` cells on [lo, hi]."""

    lo: float
    hi: float
    n_cells: int

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or self.lo >= self.hi:
            raise DomainError(f"grid needs finite lo < hi, got [{self.lo}, {self.hi}]")
        if int(self.n_cells) != self.n_cells or self.n_cells < 8:
            raise DomainError(f"grid needs at least 8 cells, got {self.n_cells}")

    @classmethod
    def polytope(cls, n: int) -> "Grid1D":
        """Grid over the moment interval [0, 1]."""
        return cls(0.0, 1.0, n)

    @classmethod
    def window(cls, half_width: float, m: int) -> "Grid1D":
        """Symmetric log-coordinate window [-L, L]."""
        return cls(-float(half_width), float(half_width), m)

    @property
    def h(self) -> float:
        return (self.hi - self.lo) / self.n_cells

    @property
    def n_nodes(self) -> int:
        return self.n_cells + 1

    @cached_property
    def nodes(self) -> np.ndarray:
        nodes = self.lo + np.arange(self.n_nodes, dtype=float) * self.h
        nodes.setflags(write=False)
        return nodes

    def index_of(self, x: float, tol: float = 1e-12) -> Optional[int]:
        """Index of the node at ``x`` or None when x is not a node."""
        k = int(round((x - self.lo) / self.h))
        if 0 <= k <= self.n_cells and abs(self.nodes[k] - x) <= tol * max(1.0, abs(x)):
            return k
        return None

    def key(self) -> Tuple[str, float, float, int]:
        return ("grid1d", self.lo, self.hi, self.n_cells)


@dataclass(frozen=True)
class ProductGrid:
    """Product of one axis grid with itself, optionally masked to the simplex."""

    axis: Grid1D
    simplex: bool = True

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.axis.n_nodes, self.axis.n_nodes)

    @property
    def h(self) -> float:
        return self.axis.h

    @cached_property
    def mask(self) -> np.ndarray:
        i, j = np.indices(self.shape)
        mask = (i + j <= self.axis.n_cells) if self.simplex else np.ones(self.shape, dtype=bool)
        mask.setflags(write=False)
        return mask

    @cached_property
    def points(self) -> Tuple[np.ndarray, np.ndarray]:
        p1, p2 = np.meshgrid(self.axis.nodes, self.axis.nodes, indexing="ij")
        return p1, p2

    def key(self) -> Tuple[str, Tuple, bool]:
        return ("product", self.axis.key(), self.simplex)


GridLike = Union[Grid1D, ProductGrid]


# ============================================================================
# Grid functions
# ============================================================================

@dataclass(frozen=True, eq=False)
class ExtGridFn:
    """Extended-real values (finite or +inf) over the nodes of a grid.

    The finite part is a contiguous index block in 1D. In 2D nodes outside
    the grid mask must be +inf.
    """

    grid: GridLike
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        expected = (self.grid.n_nodes,) if isinstance(self.grid, Grid1D) else self.grid.shape
        if vals.shape != expected:
            raise DomainError(f"values shape {vals.shape} does not match grid {expected}")
        if np.isnan(vals).any():
            raise DomainError("NaN in grid function")
        if np.isneginf(vals).any():
            raise DomainError("-inf is not a valid grid value")
        finite = np.isfinite(vals)
        if not finite.any():
            raise DomainError("empty effective domain")
        if isinstance(self.grid, Grid1D):
            idx = np.flatnonzero(finite)
            if idx[-1] - idx[0] + 1 != idx.size:
                raise DomainError("effective domain is not contiguous")
        elif (finite & ~self.grid.mask).any():
            raise DomainError("finite values outside the grid mask")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def is_1d(self) -> bool:
        return isinstance(self.grid, Grid1D)

    @cached_property
    def finite_mask(self) -> np.ndarray:
        return np.isfinite(self.values)

    @cached_property
    def domain_indices(self) -> Tuple[int, int]:
        """First and last finite index (1D)."""
        idx = np.flatnonzero(self.finite_mask)
        return int(idx[0]), int(idx[-1])

    @property
    def domain(self) -> Tuple[float, float]:
        i0, i1 = self.domain_indices
        nodes = self.grid.nodes
        return float(nodes[i0]), float(nodes[i1])

    @property
    def finite_everywhere(self) -> bool:
        if self.is_1d:
            return bool(self.finite_mask.all())
        return bool(self.finite_mask[self.grid.mask].all())

    @cached_property
    def scale(self) -> float:
        return max(1.0, float(np.max(np.abs(self.values[self.finite_mask]))))

    def with_values(self, values: np.ndarray) -> "ExtGridFn":
        return ExtGridFn(self.grid, values)

    def shift(self, c: float) -> "ExtGridFn":
        """Values plus a finite constant (+inf stays +inf)."""
        return ExtGridFn(self.grid, self.values + float(c))


@dataclass(frozen=True)
class SlopeData:
    """Asymptotic slopes of a primal function beyond its window."""

    slope_left: float
    slope_right: float

    def __post_init__(self):
        if self.slope_left > self.slope_right + 1e-12 * max(1.0, abs(self.slope_right)):
            raise DomainError(
                f"slope_left {self.slope_left} exceeds slope_right {self.slope_right}"
            )


@dataclass(frozen=True, eq=False)
class PrimalFunction:
    """Convex window samples with affine tails.

    ``tail_offsets`` are the intercepts of the tails, so that
    ``f(x) = slope_left * x + tail_offsets[0]`` left of the window. With
    ``exact_tails`` the edge slopes of the window equal the tail slopes; without
    it the tails are only required to keep the extension convex.
    ``reference`` optionally carries f0 so that relative values f - f0 can be
    read off on the same window.
    """

    window: Grid1D
    values: np.ndarray
    tails: SlopeData
    tail_offsets: Tuple[float, float]
    exact_tails: bool = True
    reference: Optional["PrimalFunction"] = None
    tol_convex: float = TOL_CONVEX
    tol_slope: float = TOL_SLOPE

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.window.n_nodes,):
            raise DomainError("primal values do not match the window")
        if not np.isfinite(vals).all():
            raise DomainError("primal values must be finite on the window")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

        scale = max(1.0, float(np.max(np.abs(vals))))
        defect = second_difference_defect(vals)
        if defect > self.tol_convex * scale:
            raise ConvexityError(f"primal data not convex (defect {defect:.3e})", defect)

        h = self.window.h
        s_first = (vals[1] - vals[0]) / h
        s_last = (vals[-1] - vals[-2]) / h
        sl, sr = self.tails.slope_left, self.tails.slope_right
        if self.exact_tails:
            if abs(s_first - sl) > self.tol_slope or abs(s_last - sr) > self.tol_slope:
                raise DomainError(
                    f"edge slopes ({s_first:.6g}, {s_last:.6g}) differ from tails ({sl:.6g}, {sr:.6g})"
                )
        elif sl > s_first + self.tol_slope or sr < s_last - self.tol_slope:
            raise ConvexityError("tails break convexity of the extension")

        left = vals[0] - sl * self.window.lo
        right = vals[-1] - sr * self.window.hi
        off_l, off_r = self.tail_offsets
        if abs(off_l - left) > 1e-9 * scale or abs(off_r - right) > 1e-9 * scale:
            raise DomainError("tail offsets do not make the tails continuous")

        if self.reference is not None and self.reference.window != self.window:
            raise DomainError("reference lives on a different window")

    @classmethod
    def build(
        cls,
        window: Grid1D,
        values: np.ndarray,
        tails: SlopeData,
        exact_tails: bool = True,
        reference: Optional["PrimalFunction"] = None,
        tol_convex: float = TOL_CONVEX,
        tol_slope: float = TOL_SLOPE,
    ) -> "PrimalFunction":
        """Construct with tail offsets derived from the edge values."""
        vals = np.asarray(values, dtype=float)
        offsets = (
            float(vals[0] - tails.slope_left * window.lo),
            float(vals[-1] - tails.slope_right * window.hi),
        )
        return cls(window, vals, tails, offsets, exact_tails, reference, tol_convex, tol_slope)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Piecewise-affine interpolant with affine tails."""
        x = np.asarray(x, dtype=float)
        out = np.interp(x, self.window.nodes, self.values)
        left = x < self.window.lo
        right = x > self.window.hi
        out = np.where(left, self.tails.slope_left * x + self.tail_offsets[0], out)
        out = np.where(right, self.tails.slope_right * x + self.tail_offsets[1], out)
        return out

    def relative_values(self) -> np.ndarray:
        """f - f0 on the window nodes."""
        if self.reference is None:
            raise DomainError("no reference attached")
        return self.values - self.reference.values


# ============================================================================
# Extended-real helpers
# ============================================================================

def ext_difference(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """a - b for extended reals; inf - inf is rejected."""
    both = np.isinf(a) & np.isinf(b)
    if both.any():
        raise DomainError("inf - inf in extended-real difference")
    with np.errstate(invalid="ignore"):
        return a - b


def second_difference_defect(values: np.ndarray) -> float:
    """Largest negative second difference of a finite 1D array (0 if convex)."""
    if values.size < 3:
        return 0.0
    d2 = values[2:] - 2.0 * values[1:-1] + values[:-2]
    return float(max(0.0, -np.min(d2)))


def convexity_defect(v: ExtGridFn) -> float:
    """Max over interior finite triples of max(0, -second difference).

    In 2D the second differences run along the axis and diagonal directions.
    """
    if v.is_1d:
        i0, i1 = v.domain_indices
        return second_difference_defect(v.values[i0:i1 + 1])
    vals = v.values
    worst = 0.0
    for a, b in ((1, 0), (0, 1), (1, 1), (1, -1)):
        lo_i, hi_i = a, vals.shape[0] - a
        lo_j, hi_j = max(b, -b), vals.shape[1] - max(b, -b)
        mid = vals[lo_i:hi_i, lo_j:hi_j]
        fwd = vals[lo_i + a:hi_i + a, lo_j + b:hi_j + b]
        bwd = vals[lo_i - a:hi_i - a, lo_j - b:hi_j - b]
        ok = np.isfinite(mid) & np.isfinite(fwd) & np.isfinite(bwd)
        if ok.any():
            d2 = fwd[ok] - 2.0 * mid[ok] + bwd[ok]
            worst = max(worst, float(-np.min(d2)))
    return max(0.0, worst)


# ============================================================================
# Legendre-Fenchel transforms
# ============================================================================

def conjugate_brute(xs: np.ndarray, fs: np.ndarray, ps: np.ndarray, chunk: int = 512) -> np.ndarray:
    """max_j (p * xs[j] - fs[j]) for every p, by direct enumeration."""
    out = np.empty(ps.shape, dtype=float)
    for start in range(0, ps.size, chunk):
        block = ps[start:start + chunk]
        out[start:start + chunk] = np.max(block[:, None] * xs[None, :] - fs[None, :], axis=1)
    return out


def _merge_counts(slopes: np.ndarray, ps: np.ndarray) -> np.ndarray:
    """Number of ``slopes`` strictly below each p, both arrays ascending.

    A stable sort of the two concatenated runs is a timsort merge, linear in
    their total length; ties keep p ahead of an equal slope.
    """
    order = np.argsort(np.concatenate([ps, slopes]), kind="stable")
    positions = np.empty(order.size, dtype=np.intp)
    positions[order] = np.arange(order.size)
    return positions[:ps.size] - np.arange(ps.size)


def conjugate_fast(xs: np.ndarray, fs: np.ndarray, ps: np.ndarray) -> np.ndarray:
    """Same as :func:`conjugate_brute` for convex (xs, fs) data.

    For convex data j -> p * xs[j] - fs[j] is concave and peaks at the number
    of chord slopes below p. Ascending targets (every grid) are merged
    against the slopes in O(N + P); other targets fall back to a sorted
    search, O(P log N). Neighbours are checked to absorb rounding in the
    slopes.
    """
    if xs.size == 1:
        return ps * xs[0] - fs[0]
    slopes = np.maximum.accumulate(np.diff(fs) / np.diff(xs))
    if ps.ndim == 1 and np.all(np.diff(ps) >= 0):
        k = _merge_counts(slopes, ps)
    else:
        k = np.searchsorted(slopes, ps, side="left")
    best = np.full(ps.shape, -np.inf)
    for offset in (-1, 0, 1):
        j = np.clip(k + offset, 0, xs.size - 1)
        best = np.maximum(best, ps * xs[j] - fs[j])
    return best


def _kernel(method: str):
    if method == "fast":
        return conjugate_fast
    if method == "brute":
        return conjugate_brute
    raise ValueError(f"unknown transform method: {method}")


def legendre(f: PrimalFunction, target: Grid1D, method: str = "fast") -> ExtGridFn:
    """g(p) = sup_x (p x - f(x)) on the nodes of ``target``.

    Exact for the piecewise-affine extension of f with its tails: inside the
    tail slope range the sup is attained at a window node, outside it is +inf.

    Args:
        f: Convex primal function
        target: Grid over slope space
        method: "fast" (slope merge) or "brute" (all pairs)

    Returns:
        Conjugate as an extended-real grid function
    """
    ps = target.nodes
    sl, sr = f.tails.slope_left, f.tails.slope_right
    eps_l = 1e-12 * max(1.0, abs(sl))
    eps_r = 1e-12 * max(1.0, abs(sr))
    inside = (ps >= sl - eps_l) & (ps <= sr + eps_r)
    if not inside.any():
        raise DomainError(f"no target node inside the slope range [{sl}, {sr}]")
    values = np.full(ps.shape, INF)
    values[inside] = _kernel(method)(f.window.nodes, f.values, ps[inside])
    return ExtGridFn(target, values)


def tail_kinks(g: ExtGridFn) -> Tuple[float, float]:
    """Slopes of g next to the ends of its domain.

    Left of the first value the conjugate of g is affine with slope equal to
    the left domain end; this happens exactly for x below the first kink.
    """
    i0, i1 = g.domain_indices
    h = g.grid.h
    vals = g.values
    if i1 == i0:
        return -INF, INF
    return (vals[i0 + 1] - vals[i0]) / h, (vals[i1] - vals[i1 - 1]) / h


def required_half_width(g: ExtGridFn, window: Grid1D) -> float:
    """Smallest symmetric half width whose first and last cells sit in the tail regime."""
    left, right = tail_kinks(g)
    need = 0.0
    if math.isfinite(left):
        need = max(need, -left + window.h)
    if math.isfinite(right):
        need = max(need, right + window.h)
    return need


def legendre_inv(
    g: ExtGridFn,
    window: Grid1D,
    method: str = "fast",
    tol_convex: float = TOL_CONVEX,
) -> PrimalFunction:
    """f(x) = sup_{p in dom g} (p x - g(p)) on the window nodes.

    Tails are the endpoints of dom(g). ``exact_tails`` on the result records
    whether the window reaches the affine regime on both sides.

    Raises:
        ConvexityError: g is not convex on its domain
    """
    if not g.is_1d:
        raise DomainError("legendre_inv is one-dimensional")
    i0, i1 = g.domain_indices
    ps = g.grid.nodes[i0:i1 + 1]
    gs = g.values[i0:i1 + 1]
    defect = second_difference_defect(gs)
    if defect > tol_convex * g.scale:
        raise ConvexityError(f"dual data not convex (defect {defect:.3e})", defect)
    values = _kernel(method)(ps, gs, window.nodes)
    left, right = tail_kinks(g)
    exact = (window.lo + window.h <= left) and (window.hi - window.h >= right)
    return PrimalFunction.build(
        window, values, SlopeData(float(ps[0]), float(ps[-1])), exact_tails=exact
    )


# ============================================================================
# Convex envelopes
# ============================================================================

def lower_hull_indices(xs: Sequence[float], ys: Sequence[float]) -> List[int]:
    """Vertices of the lower convex hull of points sorted by x (monotone chain)."""
    xl = list(xs)
    yl = list(ys)
    hull: List[int] = []
    for i in range(len(xl)):
        xi, yi = xl[i], yl[i]
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # b on or above the chord a -> i
            if (yl[b] - yl[a]) * (xi - xl[a]) >= (yi - yl[a]) * (xl[b] - xl[a]):
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


def hull_values(values: np.ndarray, positions: Optional[np.ndarray] = None) -> np.ndarray:
    """Largest convex minorant of 1D extended-real data at the same positions.

    Nodes between the first and last finite entry receive finite values; the
    rest stay +inf. On hull vertices the input value is kept bit for bit.
    """
    values = np.asarray(values, dtype=float)
    if positions is None:
        positions = np.arange(values.size, dtype=float)
    finite = np.flatnonzero(np.isfinite(values))
    if finite.size == 0:
        raise DomainError("empty effective domain")
    out = np.full(values.shape, INF)
    i0, i1 = finite[0], finite[-1]
    if finite.size <= 2:
        out[i0:i1 + 1] = np.interp(positions[i0:i1 + 1], positions[finite], values[finite])
    else:
        verts = finite[lower_hull_indices(positions[finite], values[finite])]
        out[i0:i1 + 1] = np.interp(positions[i0:i1 + 1], positions[verts], values[verts])
    return np.minimum(out, values)


def hull_values_qhull(values: np.ndarray, positions: Optional[np.ndarray] = None) -> np.ndarray:
    """Independent lower hull through qhull, for cross-checking :func:`hull_values`."""
    values = np.asarray(values, dtype=float)
    if positions is None:
        positions = np.arange(values.size, dtype=float)
    finite = np.flatnonzero(np.isfinite(values))
    if finite.size == 0:
        raise DomainError("empty effective domain")
    out = np.full(values.shape, INF)
    i0, i1 = finite[0], finite[-1]
    pts = np.column_stack([positions[finite], values[finite]])
    try:
        hull = ConvexHull(pts)
        lower = hull.simplices[hull.equations[:, 1] < 0.0]
        verts = np.unique(np.concatenate([lower.ravel(), [0, finite.size - 1]]))
    except QhullError:
        # fewer than three points or all collinear
        verts = np.array([0, finite.size - 1])
    out[i0:i1 + 1] = np.interp(positions[i0:i1 + 1], pts[verts, 0], pts[verts, 1])
    return out


@lru_cache(maxsize=64)
def _lattice_lines(n: int, simplex: bool, direction: Tuple[int, int]) -> Tuple[Tuple[np.ndarray, np.ndarray], ...]:
    """Index arrays of every lattice line with the given primitive direction."""
    a, b = direction
    i, j = np.indices((n + 1, n + 1))
    mask = (i + j <= n) if simplex else np.ones_like(i, dtype=bool)
    I, J = i[mask], j[mask]
    label = b * I - a * J
    along = I if a != 0 else J
    order = np.lexsort((along, label))
    I, J, label = I[order], J[order], label[order]
    cuts = np.flatnonzero(np.diff(label)) + 1
    lines = []
    for li, lj in zip(np.split(I, cuts), np.split(J, cuts)):
        if li.size >= 3:
            lines.append((li, lj))
    return tuple(lines)


def _envelope_2d(v: ExtGridFn, tol: float = 1e-10, max_sweeps: Optional[int] = None) -> ExtGridFn:
    grid: ProductGrid = v.grid
    n = grid.axis.n_cells
    cap = max_sweeps if max_sweeps is not None else 10 * n
    vals = np.array(v.values, dtype=float)
    residual = INF
    for sweep in range(1, cap + 1):
        before = vals.copy()
        for direction in LATTICE_DIRECTIONS:
            for li, lj in _lattice_lines(n, grid.simplex, direction):
                line = vals[li, lj]
                if np.isfinite(line).sum() >= 2:
                    vals[li, lj] = hull_values(line)
        finite = np.isfinite(before)
        residual = float(np.max(np.abs(before[finite] - vals[finite]))) if finite.any() else 0.0
        newly = np.isfinite(vals) & ~finite
        if residual <= tol and not newly.any():
            logger.debug("2D envelope converged after %d sweeps", sweep)
            return ExtGridFn(grid, vals)
    raise NotConvergedError("2D convex envelope hit its sweep cap", residual)


def convex_envelope(v: ExtGridFn) -> ExtGridFn:
    """Largest discretely convex minorant of v.

    1D: lower hull of the finite graph points. 2D: line-by-line lower hulls
    along lattice directions, swept to a fixed point.
    """
    if v.is_1d:
        return ExtGridFn(v.grid, hull_values(v.values, v.grid.nodes))
    return _envelope_2d(v)


def hull_of_min(a: ExtGridFn, b: ExtGridFn) -> ExtGridFn:
    """convex_envelope(min(a, b)); the finite union may be disconnected."""
    if a.grid != b.grid:
        raise DomainError("grid functions live on different grids")
    merged = np.minimum(a.values, b.values)
    if a.is_1d:
        return ExtGridFn(a.grid, hull_values(merged, a.grid.nodes))
    # line sweeps fill the gaps of a disconnected 2D union
    return _envelope_2d(ExtGridFn(a.grid, merged))


def sup_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Max |a - b| over entries; matching +inf entries count as equal."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    fa, fb = np.isfinite(a), np.isfinite(b)
    if (fa != fb).any():
        return INF
    if not fa.any():
        return 0.0
    return float(np.max(np.abs(a[fa] - b[fa])))


__all__ = [
    'INF', 'TOL_CONVEX', 'TOL_SLOPE',
    'ModelError', 'ConvexityError', 'DomainError', 'WindowTooSmallError',
    'UnboundedPotentialError', 'ScheduleError', 'OrderingError',
    'NotConvergedError', 'EnvelopeInconsistencyError', 'InconsistencyError',
    'Grid1D', 'ProductGrid', 'ExtGridFn', 'SlopeData', 'PrimalFunction',
    'ext_difference', 'second_difference_defect', 'convexity_defect',
    'conjugate_brute', 'conjugate_fast', 'legendre', 'legendre_inv',
    'tail_kinks', 'required_half_width',
    'lower_hull_indices', 'hull_values', 'hull_values_qhull', 'convex_envelope', 'hull_of_min',
    'sup_distance',
]
