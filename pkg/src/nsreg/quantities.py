"""Scale-invariant quantities on parabolic cylinders.

Six functionals of a snapshot series over Q_r(z0) = B_r(x0) x (t0-r^2, t0]:
the sup-in-time localized energy, the localized dissipation, and the four
mixed time-space norms of |u|^2 and p (negative-order dual norms and plain
L^q ball norms).  Normalizing powers of r make each one invariant under the
Navier-Stokes rescaling u -> lambda u(lambda x, lambda^2 t),
p -> lambda^2 p(lambda x, lambda^2 t); the dual-norm pair is invariant for
every sigma, the (alpha, beta) pair exactly on the curve
beta = 4 alpha / (7 alpha - 6).

Time integrals are trapezoid sums over the snapshots that fall inside the
window, with the end samples extended at constant value over the partial
end intervals.  A window holding a single snapshot degenerates to the
rectangle rule: that snapshot's value times the window length.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ValidationError, WindowError
from .fields import ParabolicCylinder, ScalarField3, SnapshotSeries, ball_mask_bool
from .norms import DualNormProblem, dual_norm, lq_ball_norm
from .spectral import SpectralWorkspace, gradient_squared_sum

_TINY = 1e-300  # norms below this are treated as exact zeros before powers


@dataclass(frozen=True)
class QuantityValue:
    """One evaluated quantity, with the cylinder and parameters it used."""

    kind: str
    value: float
    cylinder: ParabolicCylinder
    params: tuple
    snapshots_used: int


def window_indices(series: SnapshotSeries, t0: float, radius: float):
    """Indices of snapshots inside [t0 - r^2, t0], with the window bounds.

    Raises WindowError (listing the available times) when no snapshot falls
    inside the window.
    """
    a = t0 - radius**2
    b = t0
    times = series.times
    tol = 1e-12 * max(1.0, abs(a), abs(b))
    idx = np.nonzero((times >= a - tol) & (times <= b + tol))[0]
    if idx.size == 0:
        raise WindowError(
            f"no snapshot in window [{a}, {b}]; available times: {times.tolist()}"
        )
    return idx, a, b


def window_integral(sample_times, samples, a: float, b: float) -> float:
    """Trapezoid over the in-window samples, constant-extended to the window
    edges (so one sample gives the rectangle rule over the full window)."""
    t = np.asarray(sample_times, dtype=float)
    g = np.asarray(samples, dtype=float)
    total = (t[0] - a) * g[0] + (b - t[-1]) * g[-1]
    if len(t) > 1:
        total += float(np.trapezoid(g, t))
    return float(total)


def quantity_A(series: SnapshotSeries, cyl: ParabolicCylinder) -> QuantityValue:
    """sup over in-window snapshots of r^-1 * integral_B |u|^2 dx."""
    idx, _, _ = window_indices(series, cyl.center_time, cyl.radius)
    mask = ball_mask_bool(series.grid, cyl.ball)
    h3 = series.grid.cell_volume
    best = 0.0
    for i in idx:
        snap = series.snapshots[i]
        best = max(best, float(snap.velocity.magnitude_squared()[mask].sum()) * h3)
    return QuantityValue("A", best / cyl.radius, cyl, (), len(idx))


def quantity_B(series: SnapshotSeries, cyl: ParabolicCylinder,
               ws: SpectralWorkspace) -> QuantityValue:
    """r^-1 * time integral over the window of integral_B |grad u|^2 dx."""
    ws.check_grid(series)
    idx, a, b = window_indices(series, cyl.center_time, cyl.radius)
    mask = ball_mask_bool(series.grid, cyl.ball)
    h3 = series.grid.cell_volume
    times = series.times[idx]
    samples = [
        float(gradient_squared_sum(series.snapshots[i].velocity, ws)[mask].sum()) * h3
        for i in idx
    ]
    value = window_integral(times, samples, a, b) / cyl.radius
    return QuantityValue("B", value, cyl, (), len(idx))


def _powered_integral(series, cyl, per_snapshot, power: float, r_exponent: float):
    """r^-r_exponent * window integral of per_snapshot(snapshot)^power."""
    idx, a, b = window_indices(series, cyl.center_time, cyl.radius)
    times = series.times[idx]
    samples = []
    for i in idx:
        g = per_snapshot(series.snapshots[i])
        samples.append(g**power if g > _TINY else 0.0)
    integral = window_integral(times, samples, a, b)
    return cyl.radius ** (-r_exponent) * integral, len(idx)


def quantity_C_sigma(series: SnapshotSeries, cyl: ParabolicCylinder, sigma: float,
                     ws: SpectralWorkspace, tolerance: float = 1e-10,
                     max_iter: int = 2000) -> QuantityValue:
    """Dual-norm quantity of |u|^2: the r^(-3/(2-sigma))-normalized window
    integral of ||  |u|^2 ||_dual^(2/(2-sigma))."""
    ws.check_grid(series)
    if not 0.0 <= sigma <= 1.0:
        raise ValidationError(f"sigma must lie in [0, 1] for C_sigma, got {sigma}")
    ball = cyl.ball

    def per_snapshot(snap):
        f = ScalarField3(series.grid, snap.velocity.magnitude_squared())
        try:
            return dual_norm(DualNormProblem(f, ball, sigma, tolerance, max_iter), ws).value
        except ConvergenceError as exc:
            raise ConvergenceError(
                f"dual norm of |u|^2 at snapshot t={snap.time}",
                exc.value, exc.residual, exc.iterations,
            ) from exc

    value, used = _powered_integral(series, cyl, per_snapshot,
                                    2.0 / (2.0 - sigma), 3.0 / (2.0 - sigma))
    return QuantityValue("C_sigma", value, cyl, (sigma,), used)


def quantity_D_sigma(series: SnapshotSeries, cyl: ParabolicCylinder, sigma: float,
                     ws: SpectralWorkspace, tolerance: float = 1e-10,
                     max_iter: int = 2000) -> QuantityValue:
    """Same as quantity_C_sigma with the pressure in place of |u|^2."""
    ws.check_grid(series)
    if not 0.0 <= sigma <= 1.0:
        raise ValidationError(f"sigma must lie in [0, 1] for D_sigma, got {sigma}")
    ball = cyl.ball

    def per_snapshot(snap):
        try:
            return dual_norm(
                DualNormProblem(snap.pressure, ball, sigma, tolerance, max_iter), ws
            ).value
        except ConvergenceError as exc:
            raise ConvergenceError(
                f"dual norm of p at snapshot t={snap.time}",
                exc.value, exc.residual, exc.iterations,
            ) from exc

    value, used = _powered_integral(series, cyl, per_snapshot,
                                    2.0 / (2.0 - sigma), 3.0 / (2.0 - sigma))
    return QuantityValue("D_sigma", value, cyl, (sigma,), used)


def quantity_C_alphabeta(series: SnapshotSeries, cyl: ParabolicCylinder,
                         alpha: float, beta: float) -> QuantityValue:
    """r^(-3 beta/2) * window integral of ||u||_{L^{2 alpha}(B)}^{2 beta}."""
    if not alpha >= 1.0 or not beta >= 1.0:
        raise ValidationError(f"need alpha >= 1 and beta >= 1, got ({alpha}, {beta})")
    ball = cyl.ball

    def per_snapshot(snap):
        speed = ScalarField3(series.grid, np.sqrt(snap.velocity.magnitude_squared()))
        return lq_ball_norm(speed, ball, 2.0 * alpha)

    value, used = _powered_integral(series, cyl, per_snapshot, 2.0 * beta, 1.5 * beta)
    return QuantityValue("C_alphabeta", value, cyl, (alpha, beta), used)


def quantity_D_alphabeta(series: SnapshotSeries, cyl: ParabolicCylinder,
                         alpha: float, beta: float) -> QuantityValue:
    """r^(-3 beta/2) * window integral of ||p||_{L^alpha(B)}^beta."""
    if not alpha >= 1.0 or not beta >= 1.0:
        raise ValidationError(f"need alpha >= 1 and beta >= 1, got ({alpha}, {beta})")
    ball = cyl.ball

    def per_snapshot(snap):
        return lq_ball_norm(snap.pressure, ball, alpha)

    value, used = _powered_integral(series, cyl, per_snapshot, beta, 1.5 * beta)
    return QuantityValue("D_alphabeta", value, cyl, (alpha, beta), used)


def beta_of_alpha(alpha: float) -> float:
    """The exponent pairing beta = 4 alpha / (7 alpha - 6) on [6/5, 2].

    This is the unique beta making the (alpha, beta) mixed norms scale
    invariant; the endpoints give (6/5, 2) and (2, 1).
    """
    if not np.isfinite(alpha) or not 1.2 - 1e-12 <= alpha <= 2.0 + 1e-12:
        raise ValidationError(f"alpha must lie in [6/5, 2], got {alpha!r}")
    return 4.0 * alpha / (7.0 * alpha - 6.0)
