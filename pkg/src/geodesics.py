"""
Weak Geodesic Segments

Segments between bounded toric potentials are affine in the dual symbol. The
module also carries an independent primal construction (the joint convex
envelope of the boundary data on a (t, x) grid), the difference-quotient
statistics m and M, normalization, the subgeodesic max(phi - t, psi), and the
Lipschitz / endpoint / restriction properties of segments.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config_manager import DEFAULT_NUMERIC
from .convex_core import (
    INF,
    DomainError,
    ExtGridFn,
    Grid1D,
    NotConvergedError,
    OrderingError,
    PrimalFunction,
    SlopeData,
    hull_values,
    legendre,
    sup_distance,
)
from .energy import am
from .logging_config import get_logger
from .toric_model import (
    ToricGeometry,
    ToricPotential,
    dual_inf_diff,
    dual_sup_diff,
    is_below,
    to_primal,
    toric_max,
)

logger = get_logger("geodesics")


# ============================================================================
# Path type
# ============================================================================

@dataclass(frozen=True, eq=False)
class GeodesicPath:
    """Dual symbols sampled at increasing times.

    Attributes:
        geom: Geometry shared by every sample
        t_samples: Strictly increasing sample times
        duals: One dual symbol per sample
        window: Window used for primal statistics
        label: Free-form description
    """

    geom: ToricGeometry
    t_samples: np.ndarray
    duals: Tuple[ExtGridFn, ...]
    window: Grid1D = field(default_factory=DEFAULT_NUMERIC.window_grid)
    label: str = ""

    def __post_init__(self):
        ts = np.array(self.t_samples, dtype=float)
        if ts.ndim != 1 or ts.size < 2:
            raise DomainError("a path needs at least two samples")
        if np.any(np.diff(ts) <= 0.0):
            raise DomainError("t_samples must be strictly increasing")
        if len(self.duals) != ts.size:
            raise DomainError(f"{len(self.duals)} duals for {ts.size} samples")
        for d in self.duals:
            if d.grid != self.geom.polytope_grid:
                raise DomainError("path dual on a different grid")
        ts.setflags(write=False)
        object.__setattr__(self, "t_samples", ts)
        object.__setattr__(self, "duals", tuple(self.duals))

    @property
    def alpha(self) -> float:
        return float(self.t_samples[0])

    @property
    def beta(self) -> float:
        return float(self.t_samples[-1])

    def index(self, t: float, tol: float = 1e-12) -> int:
        """Position of sample ``t``; times between samples are rejected."""
        hits = np.flatnonzero(np.abs(self.t_samples - t) <= tol * max(1.0, abs(t)))
        if hits.size == 0:
            raise DomainError(f"t={t} is not a sample of the path")
        return int(hits[0])

    def potential(self, i: int) -> ToricPotential:
        return ToricPotential(self.geom, self.duals[i], label=f"{self.label}@t={self.t_samples[i]:g}")

    def at(self, t: float) -> ToricPotential:
        return self.potential(self.index(t))

    @property
    def endpoints(self) -> Tuple[ToricPotential, ToricPotential]:
        return self.potential(0), self.potential(len(self.duals) - 1)

    def primal(self, i: int) -> PrimalFunction:
        return to_primal(self.potential(i), self.window, strict=False)

    @cached_property
    def quotient_bounds(self) -> Tuple[float, float]:
        """(m, M) from the outermost samples."""
        return diff_quotients(self, self.beta, self.alpha)

    @property
    def m(self) -> float:
        return self.quotient_bounds[0]

    @property
    def M(self) -> float:
        return self.quotient_bounds[1]

    def energies(self) -> np.ndarray:
        return np.array([am(self.potential(i)) for i in range(len(self.duals))])


# ============================================================================
# Constructions
# ============================================================================

def _check_pair(phi0: ToricPotential, phi1: ToricPotential) -> None:
    if phi0.geom is not phi1.geom and phi0.geom.key() != phi1.geom.key():
        raise DomainError("segment endpoints live on different geometries")
    phi0.require_bounded("segment")
    phi1.require_bounded("segment")


def segment(
    phi0: ToricPotential,
    phi1: ToricPotential,
    t_samples: Optional[Sequence[float]] = None,
    alpha: float = 0.0,
    beta: float = 1.0,
    window: Optional[Grid1D] = None,
) -> GeodesicPath:
    """Weak geodesic joining phi0 (at alpha) to phi1 (at beta).

    dual_t = (1 - s) dual(phi0) + s dual(phi1) with s = (t - alpha)/(beta - alpha).

    Example:
        >>> path = segment(zero, zero.shift(-1.0))
        >>> path.m, path.M
        (-1.0, -1.0)
    """
    _check_pair(phi0, phi1)
    if not beta > alpha:
        raise DomainError(f"need alpha < beta, got [{alpha}, {beta}]")
    ts = np.linspace(alpha, beta, 33) if t_samples is None else np.asarray(t_samples, dtype=float)
    if ts.size and (ts[0] < alpha - 1e-12 or ts[-1] > beta + 1e-12):
        raise DomainError("t_samples leave the segment interval")
    d0, d1 = phi0.dual.values, phi1.dual.values
    duals = []
    for t in ts:
        s = (t - alpha) / (beta - alpha)
        if s <= 0.0:
            values = d0
        elif s >= 1.0:
            values = d1
        else:
            values = (1.0 - s) * d0 + s * d1
        duals.append(ExtGridFn(phi0.geom.polytope_grid, values))
    return GeodesicPath(
        phi0.geom, ts, tuple(duals), window or DEFAULT_NUMERIC.window_grid(),
        label=f"segment({phi0.label},{phi1.label})",
    )


def _stencil_reach(f0: PrimalFunction, f1: PrimalFunction) -> float:
    """Largest |x1 - x0| between window points where f0 and f1 share an interior slope.

    Bounds the x-displacement the stencil directions must cover; the flat
    tail slopes are left out.
    """
    xs = f0.window.nodes
    width = float(xs[-1] - xs[0])
    mids = 0.5 * (xs[1:] + xs[:-1])
    s0 = np.diff(f0.values) / f0.window.h
    s1 = np.diff(f1.values) / f1.window.h
    lo, hi = max(s0[0], s1[0]), min(s0[-1], s1[-1])
    inside = (s0 > lo) & (s0 < hi)
    if not np.any(inside):
        return 0.0 if lo >= hi else width
    j1 = np.clip(np.searchsorted(s1, s0[inside]), 0, s1.size - 1)
    return min(float(np.max(np.abs(mids[j1] - mids[inside]))), width)


def _row_strides(t_rows: int) -> List[int]:
    """Doubling row strides, largest first: T/2, T/4, ..., 1 for T = t_rows - 1."""
    strides = []
    m = 1
    while 2 * m <= t_rows - 1:
        strides.append(m)
        m *= 2
    return strides[::-1] or [1]


def _relax(grid: np.ndarray, m: int, k: int) -> None:
    """u[i, j] <- min(u[i, j], (u[i-m, j-k] + u[i+m, j+k]) / 2) wherever both neighbours exist."""
    rows, cols = grid.shape
    a = abs(k)
    width = cols - 2 * a
    if width <= 0 or rows <= 2 * m:
        return
    before = grid[:rows - 2 * m, a - k:a - k + width]
    after = grid[2 * m:, a + k:a + k + width]
    target = grid[m:rows - m, a:a + width]
    np.minimum(target, 0.5 * (before + after), out=target)


def hcma_oracle(
    phi0: ToricPotential,
    phi1: ToricPotential,
    t_rows: int = DEFAULT_NUMERIC.hcma_t_rows,
    window: Optional[Grid1D] = None,
    tol: float = DEFAULT_NUMERIC.hcma_tol,
    max_sweeps: int = DEFAULT_NUMERIC.hcma_max_sweeps,
) -> GeodesicPath:
    """Largest function jointly convex in (t, x) with the given boundary rows.

    Works on the primal side only. Interior rows start from the chord
    (1 - t) f0 + t f1 and only ever decrease. One sweep relaxes along every
    lattice direction (m, k), m in the doubling row strides (largest first)
    and |k| covering the displacement reach of the data, then takes the
    lower hull of each interior row. Sweeps repeat until nothing moves by
    more than ``tol``. The x-grid extends past the window by the reach so
    that window nodes see all their stencil neighbours. Rows are converted
    back to duals on the polytope grid.

    ``t_rows - 1`` should be a power of two; other counts still converge,
    in more sweeps.

    Raises:
        NotConvergedError: sweep cap reached; carries the residual
    """
    if phi0.geom.dim != 1:
        raise DomainError("hcma_oracle is one-dimensional")
    _check_pair(phi0, phi1)
    if t_rows < 3:
        raise DomainError(f"hcma_oracle needs at least 3 rows, got {t_rows}")
    window = window or DEFAULT_NUMERIC.window_grid()
    f0 = to_primal(phi0, window)
    f1 = to_primal(phi1, window)
    hx = window.h
    ts = np.linspace(0.0, 1.0, t_rows)
    ht = 1.0 / (t_rows - 1)

    reach = _stencil_reach(f0, f1)
    margin = int(math.ceil(reach / hx)) + 2
    cols = window.n_nodes + 2 * margin
    xs = window.lo + (np.arange(cols) - margin) * hx
    inner = slice(margin, margin + window.n_nodes)

    first = f0.evaluate(xs)
    last = f1.evaluate(xs)
    first[inner] = f0.values
    last[inner] = f1.values
    grid = (1.0 - ts)[:, None] * first[None, :] + ts[:, None] * last[None, :]
    grid[0], grid[-1] = first, last

    stencil = []
    for m in _row_strides(t_rows):
        k_max = int(math.ceil(reach * m * ht / hx)) + 1
        stencil.extend((m, k) for k in range(-k_max, k_max + 1))
    logger.debug("hcma oracle: %d rows, %d columns, %d directions, reach %.3g",
                 t_rows, cols, len(stencil), reach)

    residual = INF
    for sweep in range(1, max_sweeps + 1):
        before = grid.copy()
        for m, k in stencil:
            _relax(grid, m, k)
        for i in range(1, t_rows - 1):
            grid[i] = hull_values(grid[i], xs)
        residual = float(np.max(before - grid))
        if residual <= tol:
            logger.debug("hcma oracle converged after %d sweeps (residual %.2e)", sweep, residual)
            break
    else:
        raise NotConvergedError("hcma oracle hit its sweep cap", residual)

    tails = SlopeData(
        min(f0.tails.slope_left, f1.tails.slope_left),
        max(f0.tails.slope_right, f1.tails.slope_right),
    )
    duals = []
    for i in range(t_rows):
        row = PrimalFunction.build(window, hull_values(grid[i, inner], window.nodes), tails, exact_tails=False)
        duals.append(legendre(row, phi0.geom.polytope_grid))
    return GeodesicPath(phi0.geom, ts, tuple(duals), window, label=f"hcma({phi0.label},{phi1.label})")


def subgeodesic_gamma(phi: ToricPotential, psi: ToricPotential, t: float) -> ToricPotential:
    """gamma_t = max(phi - t, psi).

    Raises:
        OrderingError: psi is not below phi
    """
    if not is_below(psi, phi, tol=1e-12):
        raise OrderingError(f"{psi.label or 'psi'} is not below {phi.label or 'phi'}")
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    return toric_max(phi.shift(-t), psi).relabel(f"gamma({t:g})")


# ============================================================================
# Difference quotients
# ============================================================================

def _tail_limits(da: ExtGridFn, db: ExtGridFn) -> Tuple[float, float]:
    """Limits of f_a - f_b as x -> -inf and x -> +inf.

    Left of every kink f(x) = p_lo x - g(p_lo); equal domain ends leave the
    constant g_b - g_a there, different ends send the difference to +-inf.
    """
    a0, a1 = da.domain_indices
    b0, b1 = db.domain_indices
    if a0 == b0:
        left = float(db.values[a0] - da.values[a0])
    else:
        left = INF if a0 < b0 else -INF
    if a1 == b1:
        right = float(db.values[a1] - da.values[a1])
    else:
        right = INF if a1 > b1 else -INF
    return left, right


def diff_quotients(path: GeodesicPath, a: float, b: float) -> Tuple[float, float]:
    """inf and sup over X of (u_a - u_b)/(a - b).

    Window nodes plus the two tail limits; ``a`` and ``b`` must be samples.

    Raises:
        DomainError: a == b or a time that is not sampled
    """
    if a == b:
        raise DomainError("difference quotient needs a != b")
    ia, ib = path.index(a), path.index(b)
    fa, fb = path.primal(ia), path.primal(ib)
    diff = fa.values - fb.values
    left, right = _tail_limits(path.duals[ia], path.duals[ib])
    lo = min(float(np.min(diff)), left, right)
    hi = max(float(np.max(diff)), left, right)
    dt = path.t_samples[ia] - path.t_samples[ib]
    if dt > 0:
        return lo / dt, hi / dt
    return hi / dt, lo / dt


def dual_quotients(path: GeodesicPath, a: float, b: float) -> Tuple[float, float]:
    """Same statistics from the dual identities sup_x(f_a - f_b) = sup_p(g_b - g_a)."""
    if a == b:
        raise DomainError("difference quotient needs a != b")
    ia, ib = path.index(a), path.index(b)
    lo = dual_inf_diff(path.duals[ia], path.duals[ib])
    hi = dual_sup_diff(path.duals[ia], path.duals[ib])
    dt = path.t_samples[ia] - path.t_samples[ib]
    if dt > 0:
        return lo / dt, hi / dt
    return hi / dt, lo / dt


def default_pairs(path: GeodesicPath) -> List[Tuple[float, float]]:
    """Consecutive samples plus a few spanning pairs."""
    ts = path.t_samples
    k = len(ts) - 1
    pairs = [(float(ts[i + 1]), float(ts[i])) for i in range(k)]
    mid = k // 2
    for i, j in ((k, 0), (mid, 0), (k, mid)):
        if i != j and (float(ts[i]), float(ts[j])) not in pairs:
            pairs.append((float(ts[i]), float(ts[j])))
    return pairs


def quotient_table(path: GeodesicPath, pairs: Optional[Sequence[Tuple[float, float]]] = None) -> List[Dict[str, float]]:
    """Rows (a, b, inf_q, sup_q) for the given sample pairs."""
    rows = []
    for a, b in (pairs if pairs is not None else default_pairs(path)):
        lo, hi = diff_quotients(path, a, b)
        rows.append({'a': a, 'b': b, 'inf_q': lo, 'sup_q': hi})
    return rows


def quotient_spread(rows: Sequence[Dict[str, float]]) -> Tuple[float, float]:
    """Spread of inf and sup quotients across pairs (0 for a true geodesic)."""
    infs = np.array([r['inf_q'] for r in rows])
    sups = np.array([r['sup_q'] for r in rows])
    return float(np.ptp(infs)), float(np.ptp(sups))


# ============================================================================
# Normalization
# ============================================================================

def normalize(path: GeodesicPath, tol: Optional[float] = None, exact_tol: float = 1e-9) -> GeodesicPath:
    """Translate and rescale time so that M = 0 and m = -1.

    Constant paths come back unchanged. A path with M = m (a linear path
    u_t = u_alpha + M (t - alpha)) is rescaled to slope -1.

    Raises:
        DomainError: M - m is positive but below the resolution ``tol``
    """
    tol = tol if tol is not None else DEFAULT_NUMERIC.constancy_factor * path.window.h
    m, M = path.m, path.M
    gap = M - m
    alpha = path.alpha
    ts = path.t_samples
    if gap <= exact_tol:
        if abs(M) <= tol:
            return path
        speed = abs(M)
        new_t = alpha + (ts - alpha) * speed
        lift = (M + speed) * (ts - alpha)
    elif gap <= tol:
        raise DomainError(f"M - m = {gap:.3e} is below the grid resolution {tol:.3e}")
    else:
        new_t = alpha + (ts - alpha) * gap
        lift = M * (ts - alpha)
    duals = tuple(
        ExtGridFn(d.grid, d.values + float(c)) if c != 0.0 else d
        for d, c in zip(path.duals, lift)
    )
    return GeodesicPath(path.geom, new_t, duals, path.window, label=f"normalized({path.label})")


# ============================================================================
# Segment properties
# ============================================================================

def am_affinity(path: GeodesicPath) -> float:
    """Max deviation of am(t) from the chord through the end samples."""
    energies = path.energies()
    ts = path.t_samples
    chord = energies[0] + (energies[-1] - energies[0]) * (ts - ts[0]) / (ts[-1] - ts[0])
    return float(np.max(np.abs(energies - chord)))


def lipschitz_excess(path: GeodesicPath, slack: Optional[float] = None) -> float:
    """max over consecutive samples of sup|u_t - u_s|/|t - s| - (max(|M|,|m|) + slack).

    Non-positive means the Lipschitz bound holds on the window.
    """
    slack = slack if slack is not None else DEFAULT_NUMERIC.constancy_factor * path.window.h
    bound = max(abs(path.M), abs(path.m)) + slack
    worst = -INF
    for i in range(len(path.t_samples) - 1):
        dist = sup_distance(path.primal(i + 1).values, path.primal(i).values)
        worst = max(worst, dist / (path.t_samples[i + 1] - path.t_samples[i]) - bound)
    return float(worst)


def boundary_convergence(path: GeodesicPath, count: int = 4) -> Dict[str, List[float]]:
    """Window sup-distance of u_t to each endpoint for the samples nearest it.

    Entries also carry the Lipschitz bound max(|M|,|m|) * |t - end| they must respect.
    """
    lip = max(abs(path.M), abs(path.m))
    first, last = path.primal(0).values, path.primal(len(path.t_samples) - 1).values
    out: Dict[str, List[float]] = {'t_start': [], 'dist_start': [], 'bound_start': [],
                                   't_end': [], 'dist_end': [], 'bound_end': []}
    k = min(count, len(path.t_samples) - 1)
    for i in range(1, k + 1):
        t = float(path.t_samples[i])
        out['t_start'].append(t)
        out['dist_start'].append(sup_distance(path.primal(i).values, first))
        out['bound_start'].append(lip * (t - path.alpha))
        j = len(path.t_samples) - 1 - i
        t = float(path.t_samples[j])
        out['t_end'].append(t)
        out['dist_end'].append(sup_distance(path.primal(j).values, last))
        out['bound_end'].append(lip * (path.beta - t))
    return out


@dataclass(frozen=True)
class EndpointDerivatives:
    """One-sided quotient limits at both ends of a segment."""

    start_estimate: float
    start_target: float
    end_estimate: float
    end_target: float

    @property
    def start_error(self) -> float:
        return abs(self.start_estimate - self.start_target)

    @property
    def end_error(self) -> float:
        return abs(self.end_estimate - self.end_target)


def endpoint_derivatives(
    phi0: ToricPotential,
    phi1: ToricPotential,
    eps: Tuple[float, float] = (0.02, 0.01),
    window: Optional[Grid1D] = None,
) -> EndpointDerivatives:
    """inf (u_eps - u_0)/eps -> inf(phi1 - phi0) and sup (u_1 - u_{1-eps})/eps -> sup(phi1 - phi0).

    The two eps values are combined by linear extrapolation to eps = 0.
    """
    e_big, e_small = eps
    ts = sorted({0.0, e_small, e_big, 1.0 - e_big, 1.0 - e_small, 1.0})
    path = segment(phi0, phi1, ts, window=window)
    q_big = diff_quotients(path, e_big, 0.0)[0]
    q_small = diff_quotients(path, e_small, 0.0)[0]
    r_big = diff_quotients(path, 1.0, 1.0 - e_big)[1]
    r_small = diff_quotients(path, 1.0, 1.0 - e_small)[1]
    w = e_big / (e_big - e_small)
    start = w * q_small + (1.0 - w) * q_big
    end = w * r_small + (1.0 - w) * r_big
    return EndpointDerivatives(
        start, dual_inf_diff(phi1.dual, phi0.dual),
        end, dual_sup_diff(phi1.dual, phi0.dual),
    )


def quotient_monotonicity(path: GeodesicPath) -> Tuple[float, float]:
    """Worst violations when shrinking [alpha, beta] from one side.

    Returns:
        (inf violation, sup violation): largest decrease of the inf quotient as
        the left end moves right, largest increase of the sup quotient as the
        right end moves left; both <= 0 up to rounding for a geodesic
    """
    ts = path.t_samples
    n = len(ts)
    infs = [diff_quotients(path, ts[-1], ts[i])[0] for i in range(n - 1)]
    sups = [diff_quotients(path, ts[j], ts[0])[1] for j in range(n - 1, 0, -1)]
    inf_violation = float(np.max(-np.diff(infs))) if len(infs) > 1 else 0.0
    sup_violation = float(np.max(np.diff(sups))) if len(sups) > 1 else 0.0
    return max(0.0, inf_violation), max(0.0, sup_violation)


def restriction_check(path: GeodesicPath, i: Optional[int] = None, j: Optional[int] = None) -> float:
    """Dual sup-distance between the path and the segment re-run on samples i..j."""
    n = len(path.t_samples)
    i = n // 4 if i is None else i
    j = (3 * n) // 4 if j is None else j
    if not 0 <= i < j < n:
        raise DomainError(f"bad restriction indices ({i}, {j})")
    sub = segment(
        path.potential(i), path.potential(j), path.t_samples[i:j + 1],
        alpha=float(path.t_samples[i]), beta=float(path.t_samples[j]), window=path.window,
    )
    return max(sup_distance(a.values, b.values) for a, b in zip(sub.duals, path.duals[i:j + 1]))


def path_distance(a: GeodesicPath, b: GeodesicPath) -> float:
    """Window sup-distance of two paths sampled at the same times."""
    if a.t_samples.shape != b.t_samples.shape or not np.allclose(a.t_samples, b.t_samples, atol=1e-12):
        raise DomainError("paths are sampled at different times")
    return max(sup_distance(a.primal(i).values, b.primal(i).values) for i in range(len(a.t_samples)))


__all__ = [
    'GeodesicPath', 'EndpointDerivatives',
    'segment', 'hcma_oracle', 'subgeodesic_gamma',
    'diff_quotients', 'dual_quotients', 'default_pairs', 'quotient_table', 'quotient_spread',
    'normalize', 'am_affinity', 'lipschitz_excess', 'boundary_convergence',
    'endpoint_derivatives', 'quotient_monotonicity', 'restriction_check', 'path_distance',
]
