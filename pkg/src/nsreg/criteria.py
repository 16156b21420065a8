"""Epsilon-regularity criterion evaluators and the local energy checkers.

Every criterion is stated on the unit cylinder Q_1; on a general Q_r(z0)
the statistic is assembled from scale-invariant combinations, so no field
resampling is required -- evaluating on Q_r with the right powers of r IS
the rescaling to Q_1.  Thresholds are configuration: the underlying
theorems prove that sufficiently small constants exist but give no values,
so reports always carry the raw statistic and the threshold used.

The generalized-energy-inequality checker evaluates both sides of

    int |u(t)|^2 phi + 2 nu int int |grad u|^2 phi
        <= int int |u|^2 (phi_t + nu lap phi) + int int (|u|^2 + 2p) u . grad phi

for nonnegative test functions vanishing near the series start (the
viscosity generalizes the unit-viscosity normalization of the continuum
statement; smooth solutions turn the inequality into an identity, which
pins the discretization tolerance).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ValidationError, WindowError
from .fields import (
    ParabolicCylinder,
    ScalarField3,
    SnapshotSeries,
    ball_mask_bool,
)
from .norms import DualNormProblem, dual_norm, lq_ball_norm
from .quantities import (
    beta_of_alpha,
    quantity_A,
    quantity_B,
    quantity_C_alphabeta,
    quantity_C_sigma,
    quantity_D_alphabeta,
    quantity_D_sigma,
    window_indices,
    window_integral,
)
from .reports import BoundReport, CriterionReport
from .spectral import SpectralWorkspace, gradient_squared_sum

CRITERION_TAGS = (
    "CKN_L3",
    "CKN_ORIG",
    "VASSEUR_P",
    "WZ",
    "PHUC",
    "L1_PRESSURE",
    "ALPHA_BETA",
    "SIGMA",
    "COR_L1_SIGMA",
    "SUP_A_SCAN",
)

DEFAULT_THRESHOLD = 0.05  # arbitrary reporting default; the theorems fix none


@dataclass(frozen=True)
class CriterionKind:
    """A criterion tag plus whatever parameter it needs."""

    tag: str
    sigma: float | None = None
    alpha: float | None = None
    p_exponent: float | None = None

    def __post_init__(self):
        if self.tag not in CRITERION_TAGS:
            raise ValidationError(f"unknown criterion tag {self.tag!r}")
        if self.tag in ("SIGMA", "COR_L1_SIGMA"):
            if self.sigma is None or not 0.0 <= self.sigma <= 1.0:
                raise ValidationError(
                    f"{self.tag} needs sigma in [0, 1], got {self.sigma!r}"
                )
        if self.tag == "ALPHA_BETA":
            if self.alpha is None:
                raise ValidationError("ALPHA_BETA needs alpha in [6/5, 2]")
            beta_of_alpha(self.alpha)  # validates the range
        if self.tag == "VASSEUR_P":
            if self.p_exponent is None or not self.p_exponent > 1.0:
                raise ValidationError(
                    f"VASSEUR_P needs a pressure exponent > 1, got {self.p_exponent!r}"
                )

    @property
    def params(self) -> dict:
        out = {}
        if self.sigma is not None:
            out["sigma"] = self.sigma
        if self.alpha is not None:
            out["alpha"] = self.alpha
            out["beta"] = beta_of_alpha(self.alpha)
        if self.p_exponent is not None:
            out["p_exponent"] = self.p_exponent
        return out


def _ball_integral(values: np.ndarray, mask: np.ndarray, h3: float) -> float:
    return float(values[mask].sum()) * h3


def _window_quadrature(series, cyl, per_snapshot, r_exponent: float) -> float:
    idx, a, b = window_indices(series, cyl.center_time, cyl.radius)
    times = series.times[idx]
    samples = [per_snapshot(series.snapshots[i]) for i in idx]
    return cyl.radius ** (-r_exponent) * window_integral(times, samples, a, b)


def evaluate_criterion(series: SnapshotSeries, kind: CriterionKind,
                       cyl: ParabolicCylinder, threshold: float,
                       ws: SpectralWorkspace,
                       tolerance: float = 1e-10) -> CriterionReport:
    """Assemble one criterion statistic on one cylinder.

    Components are itemized so the statistic can be re-derived; `satisfied`
    is exactly `statistic <= threshold`.
    """
    ws.check_grid(series)
    mask = ball_mask_bool(series.grid, cyl.ball)
    h3 = series.grid.cell_volume
    r = cyl.radius
    components: dict = {}
    tag = kind.tag

    def u_cubed_term():
        return _window_quadrature(
            series, cyl,
            lambda s: _ball_integral(s.velocity.magnitude_squared() ** 1.5, mask, h3),
            2.0,
        )

    if tag == "CKN_L3":
        components["u_cubed"] = u_cubed_term()
        components["p_three_halves"] = _window_quadrature(
            series, cyl,
            lambda s: _ball_integral(np.abs(s.pressure.values) ** 1.5, mask, h3),
            2.0,
        )
    elif tag == "CKN_ORIG":
        components["u_cubed"] = u_cubed_term()
        components["p_u_mixed"] = _window_quadrature(
            series, cyl,
            lambda s: _ball_integral(
                np.abs(s.pressure.values) * np.sqrt(s.velocity.magnitude_squared()),
                mask, h3),
            2.0,
        )
        components["p_l1_five_fourths"] = _window_quadrature(
            series, cyl,
            lambda s: lq_ball_norm(s.pressure, cyl.ball, 1.0) ** 1.25,
            3.25,
        )
    elif tag == "VASSEUR_P":
        p_exp = kind.p_exponent
        components["A"] = quantity_A(series, cyl).value
        components["B"] = quantity_B(series, cyl, ws).value
        components["p_l1_pow"] = _window_quadrature(
            series, cyl,
            lambda s: lq_ball_norm(s.pressure, cyl.ball, 1.0) ** p_exp,
            2.0 + p_exp,
        )
    elif tag == "WZ":
        components["A"] = quantity_A(series, cyl).value
        components["u_l4_sq"] = quantity_C_alphabeta(series, cyl, 2.0, 1.0).value
        components["p_l2"] = quantity_D_alphabeta(series, cyl, 2.0, 1.0).value
    elif tag == "PHUC":
        components["u_l125_fourth"] = quantity_C_alphabeta(series, cyl, 1.2, 2.0).value
        components["p_l65_sq"] = quantity_D_alphabeta(series, cyl, 1.2, 2.0).value
    elif tag == "L1_PRESSURE":
        components["A"] = quantity_A(series, cyl).value
        components["B"] = quantity_B(series, cyl, ws).value
        components["p_l1"] = _window_quadrature(
            series, cyl, lambda s: lq_ball_norm(s.pressure, cyl.ball, 1.0), 3.0)
    elif tag == "ALPHA_BETA":
        alpha = kind.alpha
        beta = beta_of_alpha(alpha)
        components["u_mixed"] = quantity_C_alphabeta(series, cyl, alpha, beta).value
        components["p_mixed"] = quantity_D_alphabeta(series, cyl, alpha, beta).value
    elif tag == "SIGMA":
        sigma = kind.sigma
        components["u_sq_dual"] = quantity_C_sigma(series, cyl, sigma, ws, tolerance).value
        components["p_dual"] = quantity_D_sigma(series, cyl, sigma, ws, tolerance).value
    elif tag == "COR_L1_SIGMA":
        sigma = kind.sigma
        components["A"] = quantity_A(series, cyl).value
        components["B"] = quantity_B(series, cyl, ws).value
        components["p_dual_l1"] = _window_quadrature(
            series, cyl,
            lambda s: dual_norm(
                DualNormProblem(s.pressure, cyl.ball, sigma, tolerance), ws).value,
            1.5 + sigma,
        )
    elif tag == "SUP_A_SCAN":
        # dyadic radius ladder below the cylinder scale; empty sub-windows
        # are skipped (they can only occur when t0 itself is not sampled)
        found = False
        for i in range(4):
            radius = r * 0.5**i
            try:
                val = quantity_A(series, ParabolicCylinder(cyl.center_space,
                                                           cyl.center_time, radius)).value
            except WindowError:
                continue
            components[f"A_r{i}"] = val
            found = True
        if not found:
            raise WindowError(
                f"no snapshot in any dyadic window below t0={cyl.center_time}, r={r}"
            )
    statistic = max(components.values()) if tag == "SUP_A_SCAN" else sum(components.values())
    return CriterionReport(tag, kind.params, cyl, statistic, threshold,
                           statistic <= threshold, components)


# ---------------------------------------------------------------------------
# test functions for the generalized energy inequality


def _smoothstep(s: np.ndarray) -> np.ndarray:
    s = np.clip(s, 0.0, 1.0)
    return s * s * (3.0 - 2.0 * s)


def _smoothstep_deriv(s: np.ndarray) -> np.ndarray:
    inside = (s > 0.0) & (s < 1.0)
    return np.where(inside, 6.0 * s * (1.0 - s), 0.0)


class TestFunction:
    """Nonnegative space-time test function with analytic derivatives.

    Two families: POLY_BUMP, a compactly supported polynomial bump in
    space, and BACKWARD_HEAT, the backward heat kernel concentrated at the
    cylinder top multiplied by a smooth radial cutoff.  Both carry a smooth
    time ramp that vanishes at early times, which is the discrete rendering
    of "vanishing near the parabolic boundary".
    """

    __test__ = False  # not a pytest collection target

    def __init__(self, kind: str, center_space, params: dict):
        self.kind = kind
        self.center = tuple(float(c) for c in center_space)
        self.params = dict(params)

    # -- constructors

    @classmethod
    def poly_bump(cls, center_space, radius: float, t_on: float, t_full: float):
        """phi = (1 - |x-x0|^2/R^2)_+^4 * ramp(t)."""
        if radius <= 0:
            raise ValidationError("bump radius must be positive")
        if not t_full > t_on:
            raise ValidationError("ramp needs t_full > t_on")
        return cls("POLY_BUMP", center_space,
                   {"radius": radius, "t_on": t_on, "t_full": t_full})

    @classmethod
    def backward_heat(cls, center_space, t_top: float, kernel_radius: float,
                      cutoff_inner: float, cutoff_outer: float,
                      t_on: float, t_full: float):
        """phi = chi(|x-x0|) * ramp(t) * (r_m^2 - (t - t_top))^(-3/2)
        * exp(-|x-x0|^2 / (4 (r_m^2 - (t - t_top)))).

        Caloric ((d_t + Lap) psi = 0) wherever the cutoff and ramp are flat;
        `caloric_defect` reports the deviation elsewhere.
        """
        if not 0 < cutoff_inner < cutoff_outer:
            raise ValidationError("need 0 < cutoff_inner < cutoff_outer")
        if kernel_radius <= 0:
            raise ValidationError("kernel radius must be positive")
        if not t_full > t_on:
            raise ValidationError("ramp needs t_full > t_on")
        return cls("BACKWARD_HEAT", center_space,
                   {"t_top": t_top, "kernel_radius": kernel_radius,
                    "cutoff_inner": cutoff_inner, "cutoff_outer": cutoff_outer,
                    "t_on": t_on, "t_full": t_full})

    def __add__(self, other):
        return _SumTestFunction([self, other])

    # -- time ramp

    def _ramp(self, t: float):
        p = self.params
        s = (t - p["t_on"]) / (p["t_full"] - p["t_on"])
        T = float(_smoothstep(np.array(s)))
        Tp = float(_smoothstep_deriv(np.array(s))) / (p["t_full"] - p["t_on"])
        return T, Tp

    # -- geometry helpers

    def _displacement(self, grid):
        L = grid.box_len
        x = grid.axis_coords()
        disp = []
        for c in self.center:
            d = (x - (c % L) + L / 2.0) % L - L / 2.0  # minimum-image signed offset
            disp.append(d)
        dx = disp[0][:, None, None]
        dy = disp[1][None, :, None]
        dz = disp[2][None, None, :]
        rho2 = dx**2 + dy**2 + dz**2
        return (dx, dy, dz), rho2

    # -- spatial profiles

    def _poly_parts(self, grid, t):
        p = self.params
        R2 = p["radius"] ** 2
        disp, rho2 = self._displacement(grid)
        q = rho2 / R2
        supp = q < 1.0
        one_minus = np.where(supp, 1.0 - q, 0.0)
        S = one_minus**4
        Sp = np.where(supp, -4.0 * one_minus**3, 0.0)  # dS/dq
        Spp = np.where(supp, 12.0 * one_minus**2, 0.0)
        T, Tp = self._ramp(t)
        value = S * T
        dt = S * Tp
        grad = tuple(T * Sp * 2.0 * d / R2 for d in disp)
        lap = T * (Spp * 4.0 * rho2 / R2**2 + Sp * 6.0 / R2)
        return value, dt, grad, lap

    def _heat_parts(self, grid, t):
        p = self.params
        a = p["kernel_radius"] ** 2 - (t - p["t_top"])
        if a <= 0:
            raise ValidationError(
                f"backward heat kernel undefined at t={t} (needs t < t_top + r_m^2)"
            )
        disp, rho2 = self._displacement(grid)
        psi = a ** (-1.5) * np.exp(-rho2 / (4.0 * a))
        psi_t = psi * (1.5 / a - rho2 / (4.0 * a**2))
        psi_grad = tuple(-psi * d / (2.0 * a) for d in disp)
        psi_lap = psi * (rho2 / (4.0 * a**2) - 1.5 / a)

        # radial cutoff: 1 inside, mollifier profile exp(1 - 1/(1-s^2)) between
        rin, rout = p["cutoff_inner"], p["cutoff_outer"]
        w = rout - rin
        rho = np.sqrt(rho2)
        s = np.clip((rho - rin) / w, 0.0, 1.0 - 1e-12)
        in_transition = (rho > rin) & (rho < rout)
        with np.errstate(over="ignore", under="ignore"):
            bump = np.where(rho < rout, np.exp(1.0 - 1.0 / (1.0 - s**2)), 0.0)
        chi = np.where(rho <= rin, 1.0, bump)
        db_ds = np.where(in_transition, bump * (-2.0 * s / (1.0 - s**2) ** 2), 0.0)
        d2b_ds2 = np.where(
            in_transition,
            bump * ((2.0 * s / (1.0 - s**2) ** 2) ** 2
                    - 2.0 / (1.0 - s**2) ** 2
                    - 8.0 * s**2 / (1.0 - s**2) ** 3),
            0.0,
        )
        safe_rho = np.where(rho > 0, rho, 1.0)
        chi_grad = tuple(db_ds / w * d / safe_rho for d in disp)
        chi_lap = d2b_ds2 / w**2 + db_ds / w * 2.0 / safe_rho
        chi_lap = np.where(in_transition, chi_lap, 0.0)

        T, Tp = self._ramp(t)
        value = T * chi * psi
        dt = chi * (Tp * psi + T * psi_t)
        grad = tuple(T * (cg * psi + chi * pg) for cg, pg in zip(chi_grad, psi_grad))
        cross = sum(cg * pg for cg, pg in zip(chi_grad, psi_grad))
        lap = T * (chi_lap * psi + 2.0 * cross + chi * psi_lap)
        return value, dt, grad, lap

    def _parts(self, grid, t):
        if self.kind == "POLY_BUMP":
            return self._poly_parts(grid, t)
        return self._heat_parts(grid, t)

    # -- public evaluators

    def value(self, grid, t: float) -> np.ndarray:
        return self._parts(grid, t)[0]

    def dt(self, grid, t: float) -> np.ndarray:
        return self._parts(grid, t)[1]

    def grad(self, grid, t: float) -> tuple:
        return self._parts(grid, t)[2]

    def laplacian(self, grid, t: float) -> np.ndarray:
        return self._parts(grid, t)[3]

    def caloric_defect(self, grid, t: float) -> float:
        """max |(d_t + Lap) phi|; zero for an exact backward heat kernel."""
        _, dt_, _, lap = self._parts(grid, t)
        return float(np.max(np.abs(dt_ + lap)))


class _SumTestFunction:
    """Pointwise sum of test functions (the inequality is linear in phi)."""

    def __init__(self, parts):
        self.parts = list(parts)

    def __add__(self, other):
        return _SumTestFunction(self.parts + [other])

    def _sum(self, which, grid, t):
        arrs = [getattr(p, which)(grid, t) for p in self.parts]
        return sum(arrs)

    def value(self, grid, t):
        return self._sum("value", grid, t)

    def dt(self, grid, t):
        return self._sum("dt", grid, t)

    def grad(self, grid, t):
        grads = [p.grad(grid, t) for p in self.parts]
        return tuple(sum(g[i] for g in grads) for i in range(3))

    def laplacian(self, grid, t):
        return self._sum("laplacian", grid, t)

    def caloric_defect(self, grid, t):
        _ = grid
        return float(np.max(np.abs(self.dt(grid, t) + self.laplacian(grid, t))))


class EnergyResidual(NamedTuple):
    lhs: float
    rhs: float
    residual: float


def energy_inequality_residual(series: SnapshotSeries, tf, t_end: float,
                               ws: SpectralWorkspace,
                               viscosity: float = 1.0) -> EnergyResidual:
    """Both sides of the generalized energy inequality up to t_end.

    Positive residual = slack (the inequality holds); smooth consistent
    data makes both sides agree up to discretization error.  The viscosity
    must match the data; 1 is the continuum normalization.
    """
    ws.check_grid(series)
    times = series.times
    j = int(np.argmin(np.abs(times - t_end)))
    if abs(times[j] - t_end) > 1e-9 * max(1.0, abs(t_end)):
        raise ValidationError(
            f"t_end={t_end} is not a snapshot time; available: {times.tolist()}"
        )
    grid = series.grid
    h3 = grid.cell_volume
    nu = viscosity

    grad_terms = np.empty(j + 1)
    rhs1_terms = np.empty(j + 1)
    rhs2_terms = np.empty(j + 1)
    for i in range(j + 1):
        snap = series.snapshots[i]
        t = snap.time
        phi = tf.value(grid, t)
        phi_t = tf.dt(grid, t)
        phi_lap = tf.laplacian(grid, t)
        phi_grad = tf.grad(grid, t)
        u2 = snap.velocity.magnitude_squared()
        grad_terms[i] = float(np.sum(gradient_squared_sum(snap.velocity, ws) * phi)) * h3
        rhs1_terms[i] = float(np.sum(u2 * (phi_t + nu * phi_lap))) * h3
        u_dot_gphi = sum(c.values * g for c, g in
                         zip(snap.velocity.components, phi_grad))
        rhs2_terms[i] = float(np.sum((u2 + 2.0 * snap.pressure.values) * u_dot_gphi)) * h3

    top = series.snapshots[j]
    lhs_energy = float(np.sum(top.velocity.magnitude_squared()
                              * tf.value(grid, top.time))) * h3
    tt = times[: j + 1]
    if j == 0:
        lhs = lhs_energy
        rhs = 0.0
    else:
        lhs = lhs_energy + 2.0 * nu * float(np.trapezoid(grad_terms, tt))
        rhs = float(np.trapezoid(rhs1_terms, tt)) + float(np.trapezoid(rhs2_terms, tt))
    return EnergyResidual(lhs, rhs, rhs - lhs)


def energy_bound_check(series: SnapshotSeries, cyl: ParabolicCylinder, sigma: float,
                       ws: SpectralWorkspace, tolerance: float = 1e-10) -> BoundReport:
    """Local energy bound: A + B at scale r/2 against the dual-norm data at
    scale r.

    Right side: the |u|^2 dual quantity to the power (2-sigma)/2 plus the
    head-pressure (|u|^2 + 2p) analogue to the power (2-sigma).
    """
    ws.check_grid(series)
    if not 0.0 <= sigma <= 1.0:
        raise ValidationError(f"sigma must lie in [0, 1], got {sigma}")
    half = ParabolicCylinder(cyl.center_space, cyl.center_time, cyl.radius / 2.0)
    lhs = quantity_A(series, half).value + quantity_B(series, half, ws).value

    c_sig = quantity_C_sigma(series, cyl, sigma, ws, tolerance).value
    x_term = c_sig ** ((2.0 - sigma) / 2.0)

    ball = cyl.ball
    power = 2.0 / (2.0 - sigma)

    def head_pressure_dual(s):
        f = ScalarField3(series.grid,
                         s.velocity.magnitude_squared() + 2.0 * s.pressure.values)
        return dual_norm(DualNormProblem(f, ball, sigma, tolerance), ws).value

    idx, a, b = window_indices(series, cyl.center_time, cyl.radius)
    times = series.times[idx]
    samples = [head_pressure_dual(series.snapshots[i]) ** power for i in idx]
    y_inner = cyl.radius ** (-3.0 / (2.0 - sigma)) * window_integral(times, samples, a, b)
    y_term = y_inner ** (2.0 - sigma)

    return BoundReport.from_terms(
        "energy-bound", lhs,
        {"u_sq_dual_term": x_term, "head_pressure_term": y_term},
        {"r": cyl.radius, "sigma": sigma},
    )


def cubic_bound_check(series: SnapshotSeries, cyl: ParabolicCylinder, rho: float,
                      ws: SpectralWorkspace) -> BoundReport:
    """Cubic velocity bound: r^-2 int_{Q_r} |u|^3 against
    (rho/r)^3 A^(3/4) B^(3/4) + (r/rho)^3 A^(3/2) at the outer scale."""
    ws.check_grid(series)
    r = cyl.radius
    if r > rho + 1e-12 * rho:
        raise ValidationError(f"inner radius r={r} must not exceed rho={rho}")
    mask = ball_mask_bool(series.grid, cyl.ball)
    h3 = series.grid.cell_volume
    lhs = _window_quadrature(
        series, cyl,
        lambda s: _ball_integral(s.velocity.magnitude_squared() ** 1.5, mask, h3),
        2.0,
    )
    outer = ParabolicCylinder(cyl.center_space, cyl.center_time, rho)
    A = quantity_A(series, outer).value
    B = quantity_B(series, outer, ws).value
    return BoundReport.from_terms(
        "cubic-bound", lhs,
        {
            "ab_term": (rho / r) ** 3 * A**0.75 * B**0.75,
            "a_term": (r / rho) ** 3 * A**1.5,
        },
        {"r": r, "rho": rho},
    )


class SupAScan(NamedTuple):
    max_A: float
    rows: list  # (radius, value-or-None, error-or-None)


def sup_A_scan(series: SnapshotSeries, center_space, center_time: float,
               radii) -> SupAScan:
    """A(z0, r) across a radius list; per-radius window errors are recorded
    and the scan continues."""
    rows = []
    best = None
    for r in radii:
        try:
            val = quantity_A(series, ParabolicCylinder(center_space, center_time, r)).value
        except (WindowError, ValidationError) as exc:
            rows.append((float(r), None, str(exc)))
            continue
        rows.append((float(r), val, None))
        best = val if best is None else max(best, val)
    if best is None:
        raise WindowError("every radius in the scan had an empty window")
    return SupAScan(best, rows)


def criterion_scaling_degree(tag: str, params: dict | None = None) -> dict:
    """Exact homogeneity degree of each component under (u, p) -> (c u, c^2 p)."""
    params = params or {}
    table = {
        "CKN_L3": {"u_cubed": 3.0, "p_three_halves": 3.0},
        "CKN_ORIG": {"u_cubed": 3.0, "p_u_mixed": 3.0, "p_l1_five_fourths": 2.5},
        "WZ": {"A": 2.0, "u_l4_sq": 2.0, "p_l2": 2.0},
        "PHUC": {"u_l125_fourth": 4.0, "p_l65_sq": 4.0},
        "L1_PRESSURE": {"A": 2.0, "B": 2.0, "p_l1": 2.0},
    }
    if tag in table:
        return table[tag]
    if tag == "VASSEUR_P":
        return {"A": 2.0, "B": 2.0, "p_l1_pow": 2.0 * params["p_exponent"]}
    if tag == "ALPHA_BETA":
        beta = beta_of_alpha(params["alpha"])
        return {"u_mixed": 2.0 * beta, "p_mixed": 2.0 * beta}
    if tag == "SIGMA":
        d = 4.0 / (2.0 - params["sigma"])
        return {"u_sq_dual": d, "p_dual": d}
    if tag == "COR_L1_SIGMA":
        return {"A": 2.0, "B": 2.0, "p_dual_l1": 2.0}
    if tag == "SUP_A_SCAN":
        return {f"A_r{i}": 2.0 for i in range(4)}
    raise ValidationError(f"unknown criterion tag {tag!r}")
