"""
Verification Suites

Every module invariant as a named check, swept over the potential zoo.
Check names are ``module.invariant``; the same check builders serve the
per-scenario tasks in :mod:`src.scenario`.
"""

import re
from dataclasses import dataclass
from functools import cached_property, partial
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config_manager import NumericConfig
from .convex_core import (
    INF,
    Grid1D,
    InconsistencyError,
    hull_values,
    hull_values_qhull,
    legendre,
    legendre_inv,
    sup_distance,
)
from .energy import am, am_bounds_check, am_mixed, c_of, is_in_E, strict_domination_gap
from .envelopes import (
    Obstacle,
    closed_form_bracket,
    domination_check,
    e_check,
    maximality_defect,
    p_bracket,
    proj,
    proj_pair,
)
from .geodesics import (
    am_affinity,
    boundary_convergence,
    dual_quotients,
    endpoint_derivatives,
    lipschitz_excess,
    normalize,
    quotient_monotonicity,
    quotient_spread,
    quotient_table,
    restriction_check,
    segment,
)
from .logging_config import get_logger
from .rays import build_ray, hand_built_ray, membership_check, ray_energy_profile, segment_quotient_bounds
from .report import CheckResult, RunReport, Table, TaskOutcome
from .rwn import compare_rays, curve_properties, fixed_point_gap, refinement_study, rwn_ray
from .scheduler import ExecutionMode, VerificationScheduler, VerifyTask
from .toric_model import (
    ToricGeometry,
    ToricPotential,
    cutoff,
    dual_sup_diff,
    domain_measure,
    lelong,
    ma_measure,
    potential_sup,
    relative_tail_limits,
    to_primal,
    toric_max,
)
from .zoo import bump, const, einf, nu_singular, standard_zoo

logger = get_logger("suites")

QUOTIENT_HEADERS = ('a', 'b', 'inf_q', 'sup_q')
ENERGY_HEADERS = ('t', 'am', 'am_chord_dev')
C_STUDY_HEADERS = ('l', 'am_over_l', 'mass_deficit_c')

ORACLE_WINDOW_L = 12.0
ORACLE_RATIO = 1.7
RAY_AGREEMENT_RATIO = 1.5
# strict domination is asserted for pairs at least STRICT_GAP apart
STRICT_GAP = 0.1
STRICT_ENERGY = 1e-3

# check name -> the statement it instantiates
ANCHORS: Dict[str, str] = {
    'convex_core.fast_brute': "§5 envelopes",
    'convex_core.fast_brute_inverse': "§5 envelopes",
    'convex_core.hull_oracle': "§5 envelopes",
    'convex_core.hull_idempotent': "§5 envelopes",
    'convex_core.hull_minorant': "§5 envelopes",
    'toric_model.dual_sup_identity': "§1 model",
    'toric_model.max_above': "§4 max",
    'toric_model.ma_mass': "eq (4)",
    'toric_model.cutoff_monotone': "§2.3 cutoffs",
    'toric_model.lelong': "§5 Lelong",
    'energy.am_two_path': "§2.2 energy",
    'energy.shift_rule': "§2.2 energy",
    'energy.am_bounds': "Prop 2.2",
    'energy.am_monotone': "Prop 2.3",
    'energy.domination_gap': "Prop 2.3",
    'energy.strict_domination': "Prop 2.3",
    'energy.c_two_path': "Thm 2.5",
    'energy.c_lelong': "Thm 2.5",
    'energy.cutoff_energy_shape': "§2.3 cutoffs",
    'energy.cutoff_bracket': "§2.3 cutoffs",
    'energy.base_independence': "Rem 2.6",
    'energy.membership_consistent': "Thm 2.5",
    'energy.membership_regime': "eq (5)",
    'geodesics.am_affine': "Thm 2.1",
    'geodesics.oracle_refinement': "§2.1 envelope",
    'geodesics.oracle_agreement': "§2.1 envelope",
    'geodesics.endpoint_derivatives': "Lem 3.1",
    'geodesics.restriction': "Lem 3.2",
    'geodesics.quotient_monotonicity': "Lem 3.3",
    'geodesics.inf_quotient_invariance': "Thm 3.4",
    'geodesics.sup_quotient_invariance': "Thm 3.4",
    'geodesics.quotient_two_path': "Thm 3.4",
    'geodesics.lipschitz': "Thm 3.4",
    'geodesics.boundary_convergence': "Thm 3.4",
    'geodesics.normalize': "Thm 3.4",
    'rays.l_monotone': "Thm 4.1(i)",
    'rays.converged': "Thm 4.1(i)",
    'rays.segment_bounds': "Thm 4.1(i)",
    'rays.membership': "Thm 4.1(ii)",
    'rays.energy_law': "Thm 4.1(iii)",
    'rays.tri_equivalence': "Thm 4.1",
    'envelopes.proj_idempotent': "§5 envelopes",
    'envelopes.proj_monotone': "§5 envelopes",
    'envelopes.proj_two_path': "§5 envelopes",
    'envelopes.domination': "Prop 2.4",
    'envelopes.bracket_closed_form': "§2.4 envelope",
    'envelopes.c_monotone': "§2.4 envelope",
    'envelopes.shift_invariance': "§2.4 envelope",
    'envelopes.maximality': "Prop 2.9",
    'envelopes.e_saturation': "Thm 5.2",
    'envelopes.e_membership': "Thm 5.2",
    'rwn.fixed_point': "Prop 5.1",
    'rwn.curve_below_minus_one': "§6 test curve",
    'rwn.curve_at_zero': "§6 test curve",
    'rwn.curve_bottom': "§6 test curve",
    'rwn.ray_agreement': "Thm 6.1",
    'rwn.ray_agreement_refinement': "Thm 6.1",
}


def with_anchors(outcome: TaskOutcome) -> TaskOutcome:
    """Fill in the anchor of every check that has none."""
    for check in outcome.checks:
        check.anchor = check.anchor or ANCHORS.get(check.name, "")
    return outcome


@dataclass(frozen=True)
class SuiteContext:
    """Numeric settings plus the geometry and window they describe."""

    config: NumericConfig
    dim: int = 1

    @cached_property
    def geom(self) -> ToricGeometry:
        if self.dim == 2:
            return ToricGeometry.simplex(self.config.n)
        return ToricGeometry.standard(self.config.n)

    @cached_property
    def window(self) -> Grid1D:
        return self.config.window_grid()

    @property
    def grid_metadata(self) -> Dict[str, object]:
        cfg = self.config
        return {'n': cfg.n, 'window_L': cfg.window_L, 'window_m': cfg.window_m,
                'h': cfg.h, 'h_x': cfg.h_x}


def slug(label: str) -> str:
    """File-name friendly form of a potential label: NU(0.3) -> nu_0.3."""
    return re.sub(r"[^a-z0-9.\-]+", "_", label.lower()).strip("_")


def _named(name: str, suffix: str) -> str:
    return f"{name}_{suffix}" if suffix else name


# ============================================================================
# Check builders
# ============================================================================

def energy_table(name: str, ts: np.ndarray, energies: np.ndarray) -> Table:
    chord = energies[0] + (energies[-1] - energies[0]) * (ts - ts[0]) / (ts[-1] - ts[0])
    table = Table(name, ENERGY_HEADERS)
    for t, a, c in zip(ts, energies, chord):
        table.add(t=float(t), am=float(a), am_chord_dev=float(a - c))
    return table


def quotient_checks(ctx: SuiteContext, path, case: str, table_name: str) -> TaskOutcome:
    """Quotient invariance: inf/sup quotients agree across sample pairs."""
    cfg = ctx.config
    rows = quotient_table(path)
    spread_inf, spread_sup = quotient_spread(rows)
    table = Table(table_name, QUOTIENT_HEADERS, rows)
    dual_gap = 0.0
    for row in rows:
        lo, hi = dual_quotients(path, row['a'], row['b'])
        dual_gap = max(dual_gap, abs(lo - row['inf_q']), abs(hi - row['sup_q']))
    checks = [
        CheckResult.at_most("geodesics.inf_quotient_invariance",
                            "inf quotient independent of the sample pair",
                            spread_inf, cfg.dual_tol, case),
        CheckResult.at_most("geodesics.sup_quotient_invariance",
                            "sup quotient independent of the sample pair",
                            spread_sup, cfg.dual_tol, case),
        CheckResult.at_most("geodesics.quotient_two_path",
                            "window quotients agree with dual identities",
                            dual_gap, cfg.dual_tol, case),
        CheckResult.at_most("geodesics.lipschitz",
                            "|u_t - u_s| <= (max(|m|, |M|) + 5h_x)|t - s|",
                            max(0.0, lipschitz_excess(path, cfg.primal_tol)), 0.0, case),
    ]
    return TaskOutcome(checks, [table])


def segment_checks(ctx: SuiteContext, phi0: ToricPotential, phi1: ToricPotential,
                   suffix: str = "", tables: bool = True) -> TaskOutcome:
    """am affinity, quotient statistics and the segment-only properties."""
    cfg = ctx.config
    case = f"{phi0.label} -> {phi1.label}"
    path = segment(phi0, phi1, np.linspace(0.0, 1.0, cfg.t_count), window=ctx.window)
    energies = path.energies()
    out = TaskOutcome()
    out.checks.append(CheckResult.at_most(
        "geodesics.am_affine", "t -> am(u_t) is affine along a geodesic",
        am_affinity(path), cfg.am_chord, case))
    if tables:
        out.tables.append(energy_table(_named("energy_profile", suffix), path.t_samples, energies))
    if phi0.geom.dim != 1:
        return out

    quotients = quotient_checks(ctx, path, case, _named("quotients", suffix))
    out.checks.extend(quotients.checks)
    if tables:
        out.tables.extend(quotients.tables)

    inf_v, sup_v = quotient_monotonicity(path)
    out.checks.append(CheckResult.at_most(
        "geodesics.quotient_monotonicity",
        "inf quotients grow and sup quotients shrink as the interval shrinks",
        max(inf_v, sup_v), cfg.dual_tol, case))
    out.checks.append(CheckResult.at_most(
        "geodesics.restriction", "the segment between interior samples reproduces the path",
        restriction_check(path), 1e-9 * max(1.0, phi0.dual.scale, phi1.dual.scale), case))

    ends = endpoint_derivatives(phi0, phi1, window=ctx.window)
    out.checks.append(CheckResult.at_most(
        "geodesics.endpoint_derivatives",
        "one-sided quotients at the ends tend to inf and sup of phi1 - phi0",
        max(ends.start_error, ends.end_error), cfg.dual_tol, case))

    conv = boundary_convergence(path)
    excess = max(
        max(d - b for d, b in zip(conv['dist_start'], conv['bound_start'])),
        max(d - b for d, b in zip(conv['dist_end'], conv['bound_end'])),
    )
    out.checks.append(CheckResult.at_most(
        "geodesics.boundary_convergence", "u_t tends to the endpoints at the Lipschitz rate",
        max(0.0, excess), cfg.primal_tol, case))

    if path.M - path.m > cfg.primal_tol:
        normed = normalize(path)
        out.checks.append(CheckResult.at_most(
            "geodesics.normalize", "normalized path has M = 0 and m = -1",
            max(abs(normed.M), abs(normed.m + 1.0)), cfg.dual_tol, case))
    return out


def c_study_table(name: str, report) -> Table:
    table = Table(name, C_STUDY_HEADERS)
    for row in report.per_l_values:
        table.add(l=row['l'], am_over_l=row['am_over_l'], mass_deficit_c=row['c_l'])
    return table


def c_checks(ctx: SuiteContext, psi: ToricPotential, suffix: str = "") -> TaskOutcome:
    """Both c_psi estimates, their agreement and the cutoff-energy shape."""
    cfg = ctx.config
    case = psi.label
    slope = c_of(psi, "energy_slope", l_schedule=cfg.l_schedule)
    mass = c_of(psi, "mass_deficit", l_schedule=cfg.l_schedule, window=ctx.window)
    out = TaskOutcome(tables=[c_study_table(_named("c_study", suffix), mass)])
    out.checks.append(CheckResult.at_most(
        "energy.c_two_path", "energy-slope and mass-deficit estimates of c agree",
        abs(slope.c_energy_slope - mass.c_mass_deficit), cfg.c_agreement, case))
    out.checks.append(CheckResult.holds(
        "energy.cutoff_energy_shape", "am of the cutoffs is decreasing and convex in l",
        bool(slope.cutoff_energy_decreasing and slope.cutoff_energy_convex), case))
    nu = lelong(psi, "low")
    if psi.label.startswith("NU("):
        out.checks.append(CheckResult.at_most(
            "energy.c_lelong", "c = -nu/2 for a Lelong number nu",
            abs(slope.c_energy_slope + nu / 2.0), cfg.c_agreement, case))
    bracket_rows = [r for r in mass.per_l_values if 'bracket_low' in r]
    if bracket_rows:
        worst = max(
            max(r['bracket_low'] - r['am_over_l'], r['am_over_l'] - r['bracket_high'])
            for r in bracket_rows
        )
        out.checks.append(CheckResult.at_most(
            "energy.cutoff_bracket",
            "(1/l) int g MA(g) <= am(g_l)/l <= (1/2)(1/l) int g MA(g) along cutoffs",
            max(0.0, worst), cfg.am_chord, case))
    return out


def ray_checks(ctx: SuiteContext, phi: ToricPotential, psi: ToricPotential,
               suffix: str = "", tables: bool = True) -> TaskOutcome:
    """Ray construction, energy law, membership and the three E criteria."""
    cfg = ctx.config
    case = f"{phi.label}, {psi.label}"
    ts = cfg.t_samples()
    ray = build_ray(phi, psi, cfg.ray_l_schedule(), ts, ctx.window, cfg.primal_tol)
    out = TaskOutcome()
    out.checks.append(CheckResult.at_most(
        "rays.l_monotone", "the linearized family increases in l", ray.family_violation,
        cfg.monotone, case))
    out.checks.append(CheckResult.at_most(
        "rays.converged", "the l-limit is resolved on the window", ray.monotone_gap,
        cfg.primal_tol, case))
    if not ray.converged:
        return out

    profile = ray_energy_profile(ray, cfg.l_schedule)
    out.checks.append(CheckResult.at_most(
        "rays.energy_law", "am(v_t) = am(phi) + c_psi t", profile.law_residual, cfg.energy_law, case))
    if tables:
        table = Table(_named("energy_profile", suffix), ENERGY_HEADERS, profile.rows())
        out.tables.append(table)

    competitor = None
    if psi.label.startswith("NU("):
        competitor = hand_built_ray(phi, max(lelong(psi, "low"), phi.geom.h), ts, window=ctx.window)
    report = membership_check(ray, competitor, cfg.dual_tol, cfg.primal_tol)
    out.checks.append(CheckResult.holds(
        "rays.membership",
        "the ray starts at phi, stays above psi, is normalized or constant and sits below competitors",
        report.ok, case))

    constant = ray.is_constant(cfg.primal_tol)
    small_c = abs(profile.c_psi) <= cfg.tol_c
    try:
        membership = is_in_E(psi, cfg.l_schedule, cfg.tol_c)
    except InconsistencyError as e:
        out.checks.append(CheckResult.holds(
            "rays.tri_equivalence", "ray constant <=> psi in E <=> c_psi = 0", False, f"{case}: {e}"))
    else:
        out.checks.append(CheckResult.holds(
            "rays.tri_equivalence", "ray constant <=> psi in E <=> c_psi = 0",
            constant == membership.in_E == small_c,
            f"{case}: constant={constant} in_E={membership.in_E} c={profile.c_psi:.4g}"))

    quotients = quotient_checks(ctx, ray.path, case, _named("quotients", suffix))
    out.checks.extend(quotients.checks)
    if tables:
        out.tables.extend(quotients.tables)

    # m and M of the building segments sit in [-1, 0]
    worst = 0.0
    for l in cfg.l_schedule[:3]:
        b = segment_quotient_bounds(phi, psi, l, ctx.window)
        worst = max(worst, b['M_dual'], -1.0 - b['m_dual'])
    out.checks.append(CheckResult.at_most(
        "rays.segment_bounds", "each building segment has -1 <= m <= M <= 0",
        max(0.0, worst), 1e-12, case))
    return out


def envelope_checks(ctx: SuiteContext, psi: ToricPotential, phi: ToricPotential,
                    suffix: str = "", tables: bool = True) -> TaskOutcome:
    """P_[psi](phi): closed form against the C-iteration, maximality, shifts."""
    cfg = ctx.config
    case = f"{psi.label}, {phi.label}"
    result = p_bracket(psi, phi, cfg.c_schedule, cfg.c_max_exponent, cfg.stabilization,
                       ctx.window, cfg.primal_tol)
    out = TaskOutcome()
    out.checks.append(CheckResult.at_most(
        "envelopes.bracket_closed_form", "closed form agrees with the C-iteration",
        result.closed_form_gap, cfg.primal_tol, case))
    out.checks.append(CheckResult.at_most(
        "envelopes.c_monotone", "the C-iterates increase with C",
        result.c_monotone_violation, cfg.monotone * max(1.0, phi.dual.scale), case))

    shifted = closed_form_bracket(psi.shift(-2.0), phi)
    out.checks.append(CheckResult.at_most(
        "envelopes.shift_invariance", "P_[psi - c](phi) = P_[psi](phi)",
        sup_distance(shifted.dual.values, result.result.dual.values), 0.0, case))

    maximal = maximality_defect(psi, phi, ctx.window, cfg.constancy_factor)
    out.checks.append(CheckResult.at_most(
        "envelopes.maximality", "P = phi MA(P)-almost everywhere",
        maximal.defect, maximal.bound, case))
    if tables:
        f_env = to_primal(result.result, ctx.window, strict=False).relative_values()
        f_phi = to_primal(phi, ctx.window, strict=False).relative_values()
        table = Table(_named("envelope_profile", suffix), ("x", "phi_rel", "envelope_rel"))
        for x, a, b in zip(ctx.window.nodes, f_phi, f_env):
            table.add(x=float(x), phi_rel=float(a), envelope_rel=float(b))
        out.tables.append(table)
    return out


def e_check_checks(ctx: SuiteContext, psi: ToricPotential, phi: ToricPotential,
                   expect_in_E: Optional[bool] = None, suffix: str = "",
                   tables: bool = True) -> TaskOutcome:
    """psi in E iff P_[psi](phi) = phi."""
    cfg = ctx.config
    case = f"{psi.label}, {phi.label}"
    out = TaskOutcome()
    try:
        report = e_check(psi, phi, ctx.window, cfg.l_schedule, cfg.tol_c)
    except InconsistencyError as e:
        out.checks.append(CheckResult.holds(
            "envelopes.e_saturation", "psi in E iff the envelope equals phi", False, f"{case}: {e}"))
        return out
    if report.in_E:
        out.checks.append(CheckResult.at_most(
            "envelopes.e_saturation", "psi in E iff the envelope equals phi",
            report.gap, report.threshold, case))
    else:
        out.checks.append(CheckResult.at_least(
            "envelopes.e_saturation", "psi in E iff the envelope equals phi",
            report.gap, report.threshold, case))
    if expect_in_E is not None:
        out.checks.append(CheckResult.holds(
            "envelopes.e_membership", "E membership matches the potential's regime",
            report.in_E == expect_in_E, f"{case}: in_E={report.in_E}"))
    if tables:
        table = Table(_named("e_check", suffix), ('in_E', 'gap', 'threshold', 'lelong', 'closed_form_gap'))
        table.add(in_E=report.in_E, gap=report.gap, threshold=report.threshold,
                  lelong=report.lelong_number, closed_form_gap=report.closed_form_gap)
        out.tables.append(table)
    return out


def rwn_checks(ctx: SuiteContext, phi: ToricPotential, psi: ToricPotential,
               suffix: str = "", tables: bool = True) -> TaskOutcome:
    """The test-curve ray against the cutoff ray, and the curve identities."""
    cfg = ctx.config
    case = f"{phi.label}, {psi.label}"
    ts = cfg.t_samples()
    ray = build_ray(phi, psi, cfg.ray_l_schedule(), ts, ctx.window, cfg.primal_tol)
    other = rwn_ray(phi, psi, cfg.tau_samples(), ts, ctx.window)
    comparison = compare_rays(ray, other)
    out = TaskOutcome()
    out.checks.append(CheckResult.at_most(
        "rwn.ray_agreement", "the test-curve ray equals the cutoff ray",
        comparison.primal_gap, cfg.ray_agreement_factor * cfg.h_x, case))

    props = curve_properties(other.curve, phi, psi, ctx.window)
    out.checks.append(CheckResult.at_most(
        "rwn.curve_below_minus_one", "the test curve equals phi for tau <= -1",
        props.below_minus_one, 1e-12 * max(1.0, phi.dual.scale), case))
    out.checks.append(CheckResult.at_most(
        "rwn.curve_at_zero", "the test curve equals psi at tau = 0",
        props.at_zero, cfg.dual_tol, case))
    out.checks.append(CheckResult.holds(
        "rwn.curve_bottom", "the test curve is bottom for tau > 0", props.bottom_above_zero, case))

    taus = [float(tau) for tau in cfg.tau_samples() if -1.0 < tau < 0.0] or [-0.5]
    fixed = {tau: max(fixed_point_gap(other.path, tau, c) for c in (2.0, 8.0, 32.0)) for tau in taus}
    worst_tau = max(fixed, key=fixed.__getitem__)
    out.checks.append(CheckResult.at_most(
        "rwn.fixed_point", "P(phi*_tau + C, phi_0) = phi*_tau for tau in (-1, 0)",
        fixed[worst_tau], cfg.dual_tol, f"{case}: worst tau={worst_tau:g} of {len(taus)}"))

    if tables:
        table = Table(_named("ray_comparison", suffix), ('t', 'am_cutoff_ray', 'am_rwn_ray', 'gap'))
        am_a, am_b = ray.path.energies(), other.path.energies()
        for i, t in enumerate(ts):
            gap = sup_distance(ray.path.primal(i).values, other.path.primal(i).values)
            table.add(t=float(t), am_cutoff_ray=float(am_a[i]), am_rwn_ray=float(am_b[i]), gap=gap)
        out.tables.append(table)
    return out


# ============================================================================
# Suites
# ============================================================================

def _convex_core_transforms(ctx: SuiteContext) -> TaskOutcome:
    cfg = ctx.config
    out = TaskOutcome()
    grid = ctx.geom.polytope_grid
    for seed in (1, 2, 3):
        pot = bump(ctx.geom, seed)
        f = to_primal(pot, ctx.window, strict=False)
        fast = legendre(f, grid, "fast").values
        brute = legendre(f, grid, "brute").values
        scale = max(1.0, float(np.max(np.abs(brute[np.isfinite(brute)]))))
        out.checks.append(CheckResult.at_most(
            "convex_core.fast_brute", "merged conjugate equals brute force",
            sup_distance(fast, brute) / scale, cfg.fast_brute_rel, pot.label))
    for pot in standard_zoo(ctx.geom):
        fast = legendre_inv(pot.dual, ctx.window, "fast").values
        brute = legendre_inv(pot.dual, ctx.window, "brute").values
        scale = max(1.0, float(np.max(np.abs(brute))))
        out.checks.append(CheckResult.at_most(
            "convex_core.fast_brute_inverse", "merged inverse transform equals brute force",
            sup_distance(fast, brute) / scale, cfg.fast_brute_rel, pot.label))
    return out


def _convex_core_hulls(ctx: SuiteContext) -> TaskOutcome:
    out = TaskOutcome()
    rng = np.random.default_rng(0)
    positions = ctx.geom.nodes
    for case in range(3):
        values = np.cumsum(rng.normal(size=positions.size))
        if case == 2:
            values[:5] = INF
            values[-3:] = INF
        finite = np.isfinite(values)
        scale = max(1.0, float(np.max(np.abs(values[finite]))))
        hull = hull_values(values, positions)
        label = f"random walk {case}"
        out.checks.append(CheckResult.at_most(
            "convex_core.hull_oracle", "monotone-chain hull equals the qhull lower hull",
            sup_distance(hull, hull_values_qhull(values, positions)) / scale, 1e-9, label))
        out.checks.append(CheckResult.at_most(
            "convex_core.hull_idempotent", "the hull of a hull is itself",
            sup_distance(hull_values(hull, positions), hull) / scale, 1e-12, label))
        out.checks.append(CheckResult.at_most(
            "convex_core.hull_minorant", "the hull stays below the data",
            max(0.0, float(np.max(hull[finite] - values[finite]))), 0.0, label))
    return out


def _toric_model_identities(ctx: SuiteContext) -> TaskOutcome:
    cfg = ctx.config
    geom = ctx.geom
    out = TaskOutcome()
    pairs = [(bump(geom, 1), bump(geom, 2)), (geom.reference(), bump(geom, 3)),
             (const(geom, -1.0), geom.reference())]
    for a, b in pairs:
        fa = to_primal(a, ctx.window, strict=False).values
        fb = to_primal(b, ctx.window, strict=False).values
        la, ra = relative_tail_limits(a)
        lb, rb = relative_tail_limits(b)
        window_sup = max(float(np.max(fa - fb)), la - lb, ra - rb)
        out.checks.append(CheckResult.at_most(
            "toric_model.dual_sup_identity", "sup_X(f_a - f_b) = sup_P(g_b - g_a)",
            abs(window_sup - dual_sup_diff(a.dual, b.dual)), cfg.primal_tol, f"{a.label}, {b.label}"))
        mx = toric_max(a, b)
        excess = max(dual_sup_diff(a.dual, mx.dual), dual_sup_diff(b.dual, mx.dual))
        out.checks.append(CheckResult.at_most(
            "toric_model.max_above", "max(a, b) lies above a and b",
            max(0.0, excess), 1e-12 * max(1.0, a.dual.scale), f"{a.label}, {b.label}"))
    return out


def _toric_model_measures(ctx: SuiteContext) -> TaskOutcome:
    cfg = ctx.config
    geom = ctx.geom
    out = TaskOutcome()
    for pot in standard_zoo(geom):
        report = ma_measure(pot, ctx.window)
        out.checks.append(CheckResult.at_most(
            "toric_model.ma_mass", "window MA mass equals the domain measure",
            abs(report.mass - domain_measure(pot)), 1e-9, pot.label))
        cuts = [cutoff(pot, l) for l in cfg.l_schedule]
        excess = max(dual_sup_diff(lower.dual, upper.dual) for upper, lower in zip(cuts, cuts[1:]))
        out.checks.append(CheckResult.at_most(
            "toric_model.cutoff_monotone", "max(-l, psi) decreases in l",
            max(0.0, excess), 1e-12, pot.label))
    for nu in (0.1, 0.3, 0.6):
        pot = nu_singular(geom, nu)
        out.checks.append(CheckResult.at_most(
            "toric_model.lelong", "the Lelong number of NU(nu) is nu up to one cell",
            abs(lelong(pot) - nu), geom.h, pot.label))
    pot = einf(geom)
    out.checks.append(CheckResult.at_most(
        "toric_model.lelong", "EINF has zero Lelong number",
        lelong(pot), 0.0, pot.label))
    return out


def _energy_two_path(ctx: SuiteContext) -> TaskOutcome:
    cfg = ctx.config
    geom = ctx.geom
    out = TaskOutcome()
    for pot in [geom.reference(), const(geom, -1.0)] + [bump(geom, s) for s in (1, 2, 3)]:
        mixed = am_mixed(pot, ctx.window, cfg.am_chord)
        out.checks.append(CheckResult.at_most(
            "energy.am_two_path", "dual and mixed-measure energies agree",
            abs(am(pot) - mixed.value), cfg.am_chord, pot.label))
        shift_error = max(abs(am(pot.shift(c)) - am(pot) - c) for c in (-3.0, 1.0, 7.0))
        out.checks.append(CheckResult.at_most(
            "energy.shift_rule", "am(phi + c) = am(phi) + c",
            shift_error, 1e-9, pot.label))
    base = bump(geom, 4)
    upper = base.shift(0.5)
    gap, dual_gap = strict_domination_gap(upper, base)
    out.checks.append(CheckResult.at_most(
        "energy.domination_gap", "am(u) - am(v) = sup(u - v) for a constant shift",
        abs(gap - dual_gap), 1e-9, f"{upper.label}, {base.label}"))
    return out


def domination_pairs(geom: ToricGeometry) -> List[Tuple[ToricPotential, ToricPotential]]:
    """Bounded ordered pairs (u, v) with v <= u."""
    pairs = []
    for s, t in ((1, 2), (3, 4), (5, 6)):
        a, b = bump(geom, s), bump(geom, t)
        pairs.append((toric_max(a, b), a))
    zero = geom.reference()
    pairs.append((zero, const(geom, -1.0)))
    for level in (2.0, 8.0):
        pairs.append((cutoff(nu_singular(geom, 0.3), level), cutoff(nu_singular(geom, 0.6), level)))
        pairs.append((zero, cutoff(einf(geom), level)))
        pairs.append((zero, cutoff(nu_singular(geom, 0.1), level)))
    return pairs


def _energy_domination(ctx: SuiteContext) -> TaskOutcome:
    out = TaskOutcome()
    for u, v in domination_pairs(ctx.geom):
        gap, sup_gap = strict_domination_gap(u, v)
        case = f"{u.label} >= {v.label}: am gap {gap:.3e}, sup gap {sup_gap:.3e}"
        out.checks.append(CheckResult.at_most(
            "energy.am_monotone", "u >= v implies am(u) >= am(v)",
            max(0.0, -gap), 1e-12, case))
        if sup_gap >= STRICT_GAP:
            out.checks.append(CheckResult.at_least(
                "energy.strict_domination", "u >= v with u != v forces am(u) > am(v)",
                gap, STRICT_ENERGY, case))
    return out


def _energy_bounds(ctx: SuiteContext) -> TaskOutcome:
    out = TaskOutcome()
    for seed in range(100, 120):
        pot = bump(ctx.geom, seed)
        pot = pot.shift(-potential_sup(pot) - 1e-9)
        check = am_bounds_check(pot, ctx.window, quadrature_slack=ctx.config.am_chord)
        residual = max(0.0, check.lhs - check.mid, check.mid - check.rhs)
        out.checks.append(CheckResult(
            "energy.am_bounds", "int u MA(u) <= am(u) <= (1/2) int u MA(u) for u <= 0",
            residual, 1e-6 + ctx.config.am_chord, check.ok, detail=pot.label))
    return out


def _energy_c(ctx: SuiteContext, psi: ToricPotential) -> TaskOutcome:
    return c_checks(ctx, psi, slug(psi.label))


def _energy_base_independence(ctx: SuiteContext) -> TaskOutcome:
    cfg = ctx.config
    psi = nu_singular(ctx.geom, 0.3)
    c_zero = c_of(psi, "energy_slope", l_schedule=cfg.l_schedule).c_energy_slope
    c_bump = c_of(psi, "energy_slope", base=bump(ctx.geom, 1), l_schedule=cfg.l_schedule).c_energy_slope
    return TaskOutcome([CheckResult.at_most(
        "energy.base_independence", "c_psi does not depend on the bounded base",
        abs(c_zero - c_bump), cfg.base_independence, psi.label)])


def _energy_membership(ctx: SuiteContext) -> TaskOutcome:
    cfg = ctx.config
    out = TaskOutcome()
    expected = {'CONST(-1)': True, 'EINF': True}
    for psi in standard_zoo(ctx.geom):
        membership = is_in_E(psi, cfg.l_schedule, cfg.tol_c, lenient=True)
        out.checks.append(CheckResult.holds(
            "energy.membership_consistent", "full mass <=> c_psi = 0",
            membership.consistent, f"{psi.label}: deficit={membership.deficit:.3e} c={membership.c_energy_slope:.3e}"))
        out.checks.append(CheckResult.holds(
            "energy.membership_regime", "E membership matches the potential's regime",
            membership.in_E == expected.get(psi.label, False), psi.label))
    return out


def _geodesics_segments(ctx: SuiteContext) -> TaskOutcome:
    out = TaskOutcome()
    for k in range(20):
        a, b = bump(ctx.geom, 2 * k + 1), bump(ctx.geom, 2 * k + 2)
        result = segment_checks(ctx, a, b, "bump", tables=(k == 0))
        out.checks.extend(result.checks)
        out.tables.extend(result.tables)
    zero = ctx.geom.reference()
    trivial = segment_checks(ctx, zero, zero, tables=False)
    out.checks.extend(trivial.checks)
    return out


def _geodesics_oracle(ctx: SuiteContext) -> TaskOutcome:
    cfg = ctx.config
    levels = (max(32, cfg.n // 4), max(64, cfg.n // 2), max(128, cfg.n))
    study = refinement_study("hcma", levels, window_L=ORACLE_WINDOW_L, window_m=levels[-1],
                             t_rows=cfg.hcma_t_rows)
    table = Table("hcma_refinement", ('level', 'h', 'error'), study.rows())
    checks = [
        CheckResult.at_least(
            "geodesics.oracle_refinement", "oracle error shrinks by 1.7 per grid halving",
            study.worst_ratio(), ORACLE_RATIO, f"levels {list(levels)}"),
        CheckResult.at_most(
            "geodesics.oracle_agreement", "the wide-stencil oracle matches the segment",
            study.errors[-1], cfg.constancy_factor * study.spacings[-1], f"n={levels[-1]}"),
    ]
    return TaskOutcome(checks, [table])


def _rays_case(ctx: SuiteContext, psi: ToricPotential) -> TaskOutcome:
    phi = ctx.geom.reference()
    out = ray_checks(ctx, phi, psi, slug(psi.label), tables=True)
    for table in out.tables:
        table.name = f"ray_{table.name}"
    return out


def _envelope_algebra(ctx: SuiteContext) -> TaskOutcome:
    geom, window = ctx.geom, ctx.window
    out = TaskOutcome()
    a, b = bump(geom, 1), bump(geom, 2)
    ob_a, ob_b = Obstacle.from_potential(a, window), Obstacle.from_potential(b, window)
    pa = proj(ob_a)
    again = proj(Obstacle.from_potential(pa, window))
    out.checks.append(CheckResult.at_most(
        "envelopes.proj_idempotent", "P(P(b)) = P(b)",
        sup_distance(again.dual.values, pa.dual.values), 1e-12 * max(1.0, pa.dual.scale), a.label))
    low = proj_pair(ob_a, ob_b)
    below = max(dual_sup_diff(low.dual, pa.dual), dual_sup_diff(low.dual, proj(ob_b).dual))
    out.checks.append(CheckResult.at_most(
        "envelopes.proj_monotone", "b0 <= b1 implies P(b0) <= P(b1)",
        max(0.0, below), 1e-12 * max(1.0, pa.dual.scale), f"{a.label}, {b.label}"))
    primal = proj(ob_a.minimum(ob_b), use_sources=False)
    out.checks.append(CheckResult.at_most(
        "envelopes.proj_two_path", "window projection agrees with the dual hull of sources",
        sup_distance(primal.dual.values, low.dual.values), ctx.config.dual_tol, f"{a.label}, {b.label}"))

    # domination: u >= phi on the support of MA(u) forces u >= phi
    for u, phi in ((a.shift(1.0), b), (einf(geom), geom.reference()), (toric_max(a, b), a)):
        report = domination_check(u, phi, window)
        out.checks.append(CheckResult.holds(
            "envelopes.domination", "u >= phi MA(u)-a.e. implies u >= phi",
            report.ok, f"{u.label}, {phi.label}"))
    return out


def _envelope_case(ctx: SuiteContext, psi: ToricPotential, phi: ToricPotential) -> TaskOutcome:
    return envelope_checks(ctx, psi, phi, f"{slug(psi.label)}_{slug(phi.label)}", tables=False)


def _e_check_case(ctx: SuiteContext, psi: ToricPotential, phi: ToricPotential, expect: bool) -> TaskOutcome:
    return e_check_checks(ctx, psi, phi, expect, f"{slug(psi.label)}_{slug(phi.label)}")


def _rwn_case(ctx: SuiteContext, psi: ToricPotential) -> TaskOutcome:
    return rwn_checks(ctx, ctx.geom.reference(), psi, slug(psi.label))


def _rwn_refinement(ctx: SuiteContext) -> TaskOutcome:
    cfg = ctx.config
    levels = (max(16, cfg.n // 4), max(32, cfg.n // 2), cfg.n)
    out = TaskOutcome()
    for nu in (0.3, 0.6):
        study = refinement_study("ray_agreement", levels, window_L=cfg.window_L, window_m=cfg.window_m,
                                 nu=nu, t_samples=np.linspace(0.0, 4.0, 9),
                                 tau_samples=cfg.tau_samples())
        out.tables.append(Table(f"ray_agreement_refinement_{slug(f'nu({nu:g})')}",
                                ('level', 'h', 'error'), study.rows()))
        out.checks.append(CheckResult.at_least(
            "rwn.ray_agreement_refinement", "ray agreement gap shrinks by 1.5 per polytope halving",
            study.worst_ratio(), RAY_AGREEMENT_RATIO, f"NU({nu:g}), levels {list(levels)}"))
    return out


SuiteBuilder = Callable[[SuiteContext], List[VerifyTask]]


def _anchored(fn: Callable[..., TaskOutcome], *args) -> TaskOutcome:
    return with_anchors(fn(*args))


def _task(ctx: SuiteContext, suite: str, case: str, fn: Callable[..., TaskOutcome], *args,
          description: str = "") -> VerifyTask:
    return VerifyTask(f"{suite}.{case}", suite, partial(_anchored, fn, ctx, *args), description or case)


def _convex_core_suite(ctx: SuiteContext) -> List[VerifyTask]:
    return [
        _task(ctx, "convex_core", "transforms", _convex_core_transforms),
        _task(ctx, "convex_core", "hulls", _convex_core_hulls),
    ]


def _toric_model_suite(ctx: SuiteContext) -> List[VerifyTask]:
    return [
        _task(ctx, "toric_model", "identities", _toric_model_identities),
        _task(ctx, "toric_model", "measures", _toric_model_measures),
    ]


def _energy_suite(ctx: SuiteContext) -> List[VerifyTask]:
    tasks = [
        _task(ctx, "energy", "two_path", _energy_two_path),
        _task(ctx, "energy", "bounds", _energy_bounds),
        _task(ctx, "energy", "base_independence", _energy_base_independence),
        _task(ctx, "energy", "domination", _energy_domination),
        _task(ctx, "energy", "membership", _energy_membership),
    ]
    for psi in standard_zoo(ctx.geom):
        tasks.append(_task(ctx, "energy", f"c.{slug(psi.label)}", _energy_c, psi))
    return tasks


def _geodesics_suite(ctx: SuiteContext) -> List[VerifyTask]:
    return [
        _task(ctx, "geodesics", "segments", _geodesics_segments),
        _task(ctx, "geodesics", "oracle", _geodesics_oracle),
    ]


def _rays_suite(ctx: SuiteContext) -> List[VerifyTask]:
    return [
        _task(ctx, "rays", slug(psi.label), _rays_case, psi)
        for psi in standard_zoo(ctx.geom)
    ]


def _envelopes_suite(ctx: SuiteContext) -> List[VerifyTask]:
    geom = ctx.geom
    zero = geom.reference()
    tasks = [_task(ctx, "envelopes", "algebra", _envelope_algebra)]
    for psi in standard_zoo(geom):
        tasks.append(_task(ctx, "envelopes", f"bracket.{slug(psi.label)}", _envelope_case, psi, zero))
    cases = [
        (einf(geom), zero, True),
        (einf(geom), bump(geom, 1), True),
        (const(geom, -1.0), zero, True),
        (const(geom, -1.0), bump(geom, 2), True),
        (nu_singular(geom, 0.3), zero, False),
    ]
    for psi, phi, expect in cases:
        tasks.append(_task(ctx, "envelopes", f"e_check.{slug(psi.label)}.{slug(phi.label)}",
                           _e_check_case, psi, phi, expect))
    return tasks


def _rwn_suite(ctx: SuiteContext) -> List[VerifyTask]:
    tasks = [
        _task(ctx, "rwn", slug(psi.label), _rwn_case, psi)
        for psi in standard_zoo(ctx.geom)
    ]
    tasks.append(_task(ctx, "rwn", "refinement", _rwn_refinement))
    return tasks


SUITES: Dict[str, SuiteBuilder] = {
    'convex_core': _convex_core_suite,
    'toric_model': _toric_model_suite,
    'energy': _energy_suite,
    'geodesics': _geodesics_suite,
    'rays': _rays_suite,
    'envelopes': _envelopes_suite,
    'rwn': _rwn_suite,
}


def build_tasks(selector: str, config: NumericConfig) -> List[VerifyTask]:
    """
    Tasks for one suite or for ``all``

    Raises:
        ValueError: unknown suite name
    """
    ctx = SuiteContext(config)
    if selector == 'all':
        names: Sequence[str] = list(SUITES)
    elif selector in SUITES:
        names = [selector]
    else:
        raise ValueError(f"unknown suite {selector!r}; expected 'all' or one of {', '.join(SUITES)}")
    tasks: List[VerifyTask] = []
    for name in names:
        tasks.extend(SUITES[name](ctx))
    return tasks


def verify_suite(
    selector: str = 'all',
    config: Optional[NumericConfig] = None,
    mode: ExecutionMode = ExecutionMode.AUTO,
    scheduler: Optional[VerificationScheduler] = None,
) -> RunReport:
    """
    Run every check of the selected suites

    Args:
        selector: ``all`` or a module name
        config: Numeric settings (defaults when omitted)
        mode: Execution mode for the scheduler
        scheduler: Scheduler to reuse (one is created otherwise)

    Returns:
        Report with checks and tables sorted by task id
    """
    config = config or NumericConfig()
    scheduler = scheduler or VerificationScheduler(config.max_concurrent)
    tasks = build_tasks(selector, config)
    logger.info("verify %s: %d tasks at n=%d, L=%g, m=%d", selector, len(tasks),
                config.n, config.window_L, config.window_m)
    result = scheduler.run_sync(tasks, mode)
    return result.to_report(f"verify {selector}", SuiteContext(config).grid_metadata)


__all__ = [
    'SuiteContext', 'SUITES', 'slug',
    'segment_checks', 'c_checks', 'ray_checks', 'envelope_checks', 'e_check_checks', 'rwn_checks',
    'domination_pairs', 'with_anchors', 'ANCHORS',
    'build_tasks', 'verify_suite',
]
