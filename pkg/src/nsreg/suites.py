"""Self-contained property suites behind `nsreg check`.

Each suite returns a list of CheckResult rows; a row failing carries the
inputs needed to reproduce it.  The suites cover the norm inequalities
(interpolation, embedding, dual-norm structure, dense-oracle agreement),
the pressure decomposition bounds, the local energy machinery, and the
oscillation probe.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .criteria import TestFunction, cubic_bound_check, energy_bound_check, energy_inequality_residual
from .fields import Ball, Grid3, ParabolicCylinder, ScalarField3, ball_mask_bool
from .norms import (
    DualNormProblem,
    dual_norm,
    dual_norm_dense,
    hsigma_norm,
    lq_ball_norm,
    mean_zero_interpolation_check,
    oscillation_probe,
)
from .pressure import (
    harmonic_dual_bound_check,
    pressure_bound_check,
    pressure_bound_exponents,
    split_pressure,
)
from .randfields import random_divfree_field, random_scalar_field
from .solver import SolverConfig, run, taylor_green_init
from .spectral import get_workspace, pressure_from_velocity

BOX_LEN = 2.0
VISCOSITY = 0.1


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


def _result(name: str, passed, detail: str) -> CheckResult:
    return CheckResult(name, bool(passed), detail)


_SERIES_CACHE: dict = {}


def taylor_green_series(n: int, t_end: float = 0.4, output_every: int = 2):
    """Cached smooth solver run used by several suites."""
    key = (n, t_end, output_every)
    if key not in _SERIES_CACHE:
        cfg = SolverConfig(n, BOX_LEN, viscosity=VISCOSITY, dt=0.01,
                           t_end=t_end, output_every=output_every)
        _SERIES_CACHE[key] = run(cfg)
    return _SERIES_CACHE[key]


# ---------------------------------------------------------------------------
# norms suite


def run_norms_suite(seed: int = 0, n: int = 16) -> list:
    rng = np.random.default_rng(seed)
    n_small = min(n, 16)
    grid = Grid3(n_small, BOX_LEN)
    ws = get_workspace(grid)
    ball = Ball((BOX_LEN / 2,) * 3, BOX_LEN / 4)
    results = []

    # dense-oracle agreement
    worst = 0.0
    for sigma in (0.25, 0.5, 1.0):
        for _ in range(6):
            f = random_scalar_field(grid, rng)
            cg = dual_norm(DualNormProblem(f, ball, sigma), ws).value
            dense = dual_norm_dense(f, ball, sigma, ws)
            worst = max(worst, abs(cg - dense) / dense)
    results.append(_result(
        "dual-norm dense-oracle agreement",
        worst <= 1e-8,
        f"max relative deviation {worst:.2e} (n={n_small}, seed={seed})",
    ))

    # sigma = 0 degeneracy
    worst = 0.0
    for _ in range(10):
        f = random_scalar_field(grid, rng)
        val = dual_norm(DualNormProblem(f, ball, 0.0), ws).value
        worst = max(worst, abs(val - lq_ball_norm(f, ball, 2.0)))
    results.append(_result(
        "sigma=0 dual norm equals L2 ball norm",
        worst == 0.0,
        f"max absolute deviation {worst:.2e}",
    ))

    # spectral interpolation inequality
    worst_slack = 0.0
    for _ in range(20):
        f = random_scalar_field(grid, rng)
        s0, s1 = sorted(rng.uniform(-1.5, 1.5, size=2))
        theta = rng.uniform(0.05, 0.95)
        s = (1 - theta) * s0 + theta * s1
        lhs = hsigma_norm(f, s, ws)
        rhs = hsigma_norm(f, s0, ws) ** (1 - theta) * hsigma_norm(f, s1, ws) ** theta
        worst_slack = min(worst_slack, (rhs - lhs) / max(rhs, 1e-300))
    results.append(_result(
        "spectral norm interpolation inequality",
        worst_slack >= -1e-10,
        f"worst relative slack {worst_slack:.2e} over 20 fields",
    ))

    # embedding into the dual norm, with resolution stability of the constant
    ratios = {}
    for nn in (n_small, 2 * n_small):
        g2 = Grid3(nn, BOX_LEN)
        ws2 = get_workspace(g2)
        b2 = Ball((BOX_LEN / 2,) * 3, BOX_LEN / 4)
        cmax = 0.0
        rng2 = np.random.default_rng(seed + 1)
        for sigma in (0.5, 1.0):
            q = 6.0 / (3.0 + 2.0 * sigma)
            for _ in range(5):
                f = random_scalar_field(g2, rng2)
                dn = dual_norm(DualNormProblem(f, b2, sigma), ws2).value
                lq = lq_ball_norm(f, b2, q)
                cmax = max(cmax, dn / lq)
        ratios[nn] = cmax
    lo, hi = min(ratios.values()), max(ratios.values())
    results.append(_result(
        "dual-norm embedding constant stable under refinement",
        hi <= 2.0 * lo,
        f"empirical C by resolution {ratios} (ratio {hi / lo:.3f})",
    ))

    # ball interpolation with mean removed
    check2 = mean_zero_interpolation_check(random_scalar_field(grid, rng), ball, 2.0, ws)
    worst6 = 0.0
    for _ in range(10):
        f = random_scalar_field(grid, rng)
        worst6 = max(worst6, mean_zero_interpolation_check(f, ball, 6.0, ws).ratio)
    results.append(_result(
        "ball interpolation inequality (q=2 identity, q=6 finite)",
        abs(check2.ratio - 1.0) <= 1e-10 and np.isfinite(worst6),
        f"q=2 ratio {check2.ratio:.12f}, q=6 max ratio {worst6:.3f}",
    ))

    # dual norm is a norm: homogeneity and triangle inequality
    f = random_scalar_field(grid, rng)
    g2f = random_scalar_field(grid, rng)
    v1 = dual_norm(DualNormProblem(f, ball, 0.5), ws).value
    v_scaled = dual_norm(
        DualNormProblem(ScalarField3(grid, 3.5 * f.values), ball, 0.5), ws).value
    v2 = dual_norm(DualNormProblem(g2f, ball, 0.5), ws).value
    v_sum = dual_norm(
        DualNormProblem(ScalarField3(grid, f.values + g2f.values), ball, 0.5), ws).value
    hom_err = abs(v_scaled - 3.5 * v1) / (3.5 * v1)
    tri_slack = v1 + v2 - v_sum
    results.append(_result(
        "dual norm homogeneity and triangle inequality",
        hom_err <= 1e-9 and tri_slack >= -1e-9,
        f"homogeneity error {hom_err:.2e}, triangle slack {tri_slack:.2e}",
    ))
    return results


# ---------------------------------------------------------------------------
# pressure suite


def run_pressure_suite(seed: int = 0, n: int = 32) -> list:
    rng = np.random.default_rng(seed)
    results = []
    n_lo = max(8, n // 2)

    grid = Grid3(n, BOX_LEN)
    ws = get_workspace(grid)
    ball = Ball((BOX_LEN / 2,) * 3, BOX_LEN / 4)

    # split identity and Calderon-Zygmund bound on random data
    worst_split = 0.0
    worst_cz = 0.0
    mask = ball_mask_bool(grid, ball)
    for _ in range(5):
        u = random_divfree_field(grid, rng, ws=ws)
        p = pressure_from_velocity(u, ws)
        split = split_pressure(u, p, ball, ws)
        recon = split.p_tilde.values + split.h.values
        scale = float(np.max(np.abs(p.values))) + 1e-300
        worst_split = max(worst_split, float(np.max(np.abs(recon - p.values)[mask])) / scale)
        centered = [c.values - float(c.values[mask].mean()) for c in u.components]
        masked_sq = (centered[0] ** 2 + centered[1] ** 2 + centered[2] ** 2) * mask
        l4_sq = float((masked_sq**2).sum() * grid.cell_volume) ** 0.5
        pt_l2 = float(np.sqrt((split.p_tilde.values**2).sum() * grid.cell_volume))
        worst_cz = max(worst_cz, pt_l2 / l4_sq)
    results.append(_result(
        "pressure split identity inside the ball",
        worst_split <= 1e-10,
        f"max relative defect {worst_split:.2e} over 5 fields",
    ))
    results.append(_result(
        "Calderon-Zygmund bound for the localized part",
        worst_cz <= 1.0 + 1e-10,
        f"max ratio ||p_tilde||_2 / ||(u-mean)chi||_4^2 = {worst_cz:.6f}",
    ))

    # locality: the localized part ignores u outside the ball
    u = random_divfree_field(grid, rng, ws=ws)
    p = pressure_from_velocity(u, ws)
    base = split_pressure(u, p, ball, ws)
    outside = ~mask
    comps = []
    for c in u.components:
        vals = c.values.copy()
        vals[outside] += rng.standard_normal(np.count_nonzero(outside))
        comps.append(vals)
    from .fields import VectorField3

    u_mod = VectorField3.from_arrays(grid, *comps)
    mod = split_pressure(u_mod, p, ball, ws)
    loc_err = float(np.max(np.abs(mod.p_tilde.values - base.p_tilde.values)))
    loc_err /= float(np.max(np.abs(base.p_tilde.values))) + 1e-300
    results.append(_result(
        "localized part depends only on u inside the ball",
        loc_err <= 1e-12,
        f"relative change {loc_err:.2e} after editing u outside",
    ))

    # harmonic residual refinement trends on smooth solver data.  The
    # pointwise measure diverges by construction (spectral Laplacian of the
    # sharp mask edge), so the stated decrease cannot hold; the weak-form
    # defect is the convergent rendering.  Both are reported.
    residuals = {}
    weak = {}
    for nn in (n_lo, n):
        g2 = Grid3(nn, BOX_LEN)
        ws2 = get_workspace(g2)
        u0 = taylor_green_init(g2)
        p0 = pressure_from_velocity(u0, ws2)
        split = split_pressure(u0, p0, Ball((BOX_LEN / 2,) * 3, BOX_LEN / 4), ws2)
        residuals[nn] = split.harmonic_residual
        weak[nn] = split.weak_harmonic_defect
    results.append(_result(
        "pointwise harmonic residual decreases under refinement",
        residuals[n] < residuals[n_lo],
        f"normalized max |lap h|: {residuals} "
        "(known divergent measure: the mask-edge jump grows under the "
        "spectral Laplacian; see the weak-form row)",
    ))
    results.append(_result(
        "weak-form harmonicity defect decreases under refinement",
        weak[n] < weak[n_lo],
        f"weak-form defect: {weak}",
    ))

    # harmonic-function dual bound: constants
    const = ScalarField3(grid, np.full((n, n, n), 2.5))
    c_check = harmonic_dual_bound_check(const, Ball((BOX_LEN / 2,) * 3, BOX_LEN / 8), 0.0, ws)
    expected = 2.0 ** (-1.5)
    lin_ratios = {}
    for nn in (n_lo, n):
        g2 = Grid3(nn, BOX_LEN)
        ws2 = get_workspace(g2)
        x = g2.axis_coords()
        lin = ScalarField3(
            g2, (x[:, None, None] - BOX_LEN / 2) * np.ones((1, nn, nn)))
        lin_ratios[nn] = harmonic_dual_bound_check(
            lin, Ball((BOX_LEN / 2,) * 3, BOX_LEN / 8), 0.5, ws2).ratio
    lo, hi = min(lin_ratios.values()), max(lin_ratios.values())
    results.append(_result(
        "harmonic dual bound constants",
        abs(c_check.ratio - expected) <= 0.05 * expected and hi <= 2.0 * lo,
        f"constant-field ratio {c_check.ratio:.4f} (expect {expected:.4f}); "
        f"linear-field ratios {lin_ratios}",
    ))

    # localized pressure bounds on solver data
    series = taylor_green_series(n)
    t0 = float(series.times[-1])
    rho = BOX_LEN / 8
    cyl = ParabolicCylinder((BOX_LEN / 2,) * 3, t0, rho / 2)
    ok = True
    details = []
    for variant in ("eq-p", "eq-pbar", "eq-DDtiti"):
        rep = pressure_bound_check(series, cyl, rho, variant, 0.5, ws)
        ok = ok and not rep.violation and np.isfinite(rep.empirical_c)
        details.append(f"{variant}: C={rep.empirical_c:.3f}")
    a0, b0 = pressure_bound_exponents("eq-DDtiti", 0.0)
    ok = ok and (a0, b0) == pressure_bound_exponents("eq-p")
    results.append(_result(
        "localized pressure bounds (3 variants)",
        ok,
        "; ".join(details) + f"; sigma=0 exponents match eq-p: {(a0, b0)}",
    ))
    return results


# ---------------------------------------------------------------------------
# energy suite


def run_energy_suite(seed: int = 0, n: int = 32) -> list:
    rng = np.random.default_rng(seed)
    results = []
    n_lo = max(16, n // 2)
    center = (BOX_LEN / 2,) * 3

    series = {nn: taylor_green_series(nn) for nn in (n_lo, n)}
    t0 = float(series[n].times[-1])

    # generalized energy inequality on smooth data
    ws = get_workspace(series[n].grid)
    tf_poly = TestFunction.poly_bump(center, radius=0.9, t_on=0.02, t_full=0.2)
    tf_heat = TestFunction.backward_heat(center, t_top=t0, kernel_radius=0.3,
                                         cutoff_inner=0.5, cutoff_outer=0.9,
                                         t_on=0.02, t_full=0.2)
    rels = {}
    for name, tf in (("poly", tf_poly), ("heat", tf_heat)):
        res = energy_inequality_residual(series[n], tf, t0, ws, viscosity=VISCOSITY)
        rels[name] = abs(res.residual) / (abs(res.lhs) + abs(res.rhs) + 1e-300)
    results.append(_result(
        "generalized energy inequality residual (both families)",
        max(rels.values()) < 1e-2,
        f"relative residuals {rels} at n={n}",
    ))

    # local energy bound: no violations, stable constant
    consts = {}
    ok = True
    for nn in (n_lo, n):
        wss = get_workspace(series[nn].grid)
        thin = series[nn].thin(4)
        for sigma in (0.0, 0.5, 1.0):
            rep = energy_bound_check(thin, ParabolicCylinder(center, t0, BOX_LEN / 4),
                                     sigma, wss)
            ok = ok and not rep.violation
            consts[(nn, sigma)] = rep.empirical_c
    for sigma in (0.0, 0.5, 1.0):
        pair = [consts[(n_lo, sigma)], consts[(n, sigma)]]
        ok = ok and max(pair) <= 2.0 * min(pair)
    results.append(_result(
        "local energy bound: no violations, constants stable",
        ok,
        f"empirical constants {consts}",
    ))

    # cubic velocity bound on random data
    grid = series[n].grid
    ws = get_workspace(grid)
    worst = 0.0
    from .fields import Snapshot, SnapshotSeries

    for _ in range(5):
        u = random_divfree_field(grid, rng, ws=ws)
        p = pressure_from_velocity(u, ws)
        snaps = tuple(Snapshot(t, u, p) for t in (0.0, 0.05, 0.1))
        rand_series = SnapshotSeries(grid, snaps)
        rep = cubic_bound_check(rand_series,
                                ParabolicCylinder(center, 0.1, BOX_LEN / 8),
                                BOX_LEN / 4, ws)
        worst = max(worst, rep.empirical_c)
    results.append(_result(
        "cubic velocity bound empirical constant",
        worst <= 10.0,
        f"max empirical C {worst:.3f} over 5 random fields",
    ))
    return results


# ---------------------------------------------------------------------------
# oscillation suite


def run_oscillation_suite(seed: int = 0, n: int = 128) -> list:
    _ = seed  # probe is deterministic
    resolutions = [max(8, n // 4), max(16, n // 2), n]
    rows = oscillation_probe(2.4, 0.2, 1.0, resolutions)
    lines = [f"n={r.n}: dual(f)={r.dual_f:.4f} dual(|f|)={r.dual_abs_f:.4f}" for r in rows]
    increasing = all(b.dual_abs_f > a.dual_abs_f for a, b in zip(rows, rows[1:]))
    bounded = rows[-1].dual_f < 2.0 * rows[0].dual_f
    return [
        _result("oscillation probe: dual(|f|) strictly increasing", increasing,
                "; ".join(lines)),
        _result("oscillation probe: dual(f) grows slower than 2x", bounded,
                f"growth factor {rows[-1].dual_f / rows[0].dual_f:.3f}"),
    ]


SUITES = {
    "norms": run_norms_suite,
    "pressure": run_pressure_suite,
    "energy": run_energy_suite,
    "oscillation": run_oscillation_suite,
}


def run_suite(name: str, seed: int = 0, n: int | None = None) -> list:
    if name == "all":
        out = []
        for key in ("norms", "pressure", "energy", "oscillation"):
            out.extend(run_suite(key, seed, n))
        return out
    fn = SUITES[name]
    if n is None:
        return fn(seed)
    return fn(seed, n)
