"""Norms on balls: L^q(B_r), the global spectral H^sigma norm, and the
negative-order dual norm on a ball.

The dual norm is the discrete rendering of

    sup { integral(f * phi) : phi supported in the closed ball,
                              ||phi||_{Hsigma} <= 1 }

on grid functions: with M the sharp ball mask and A the |k|^(2 sigma)
multiplier, the maximizer solves (M A M) phi = M f inside the masked
subspace and the value is sqrt(h^3 * <M f, phi>).  The masked operator is
applied matrix-free through FFTs and inverted by conjugate gradient; a
dense factorization of the restricted multiplier matrix serves as an
independent oracle on small grids.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import fft as sfft
from scipy import linalg as sla

from .errors import ConvergenceError, ValidationError
from .fields import Ball, Grid3, ScalarField3, ball_mask_bool, periodic_distance_squared
from .spectral import SpectralWorkspace, _power_multiplier, _WORKERS

SIGMA_MAX = 1.5  # dual norms are defined for sigma in [0, 3/2)


def lq_ball_norm(f: ScalarField3, ball: Ball, q: float) -> float:
    """L^q norm over the discrete ball with spacing^3 quadrature weights.

    q = inf gives the essential sup over the ball.  Empty discrete balls
    give 0.
    """
    if not q >= 1:
        raise ValidationError(f"q must be >= 1 (or inf), got {q!r}")
    mask = ball_mask_bool(f.grid, ball)
    if not mask.any():
        return 0.0
    vals = np.abs(f.values[mask])
    if np.isinf(q):
        return float(vals.max())
    return float((vals**q).sum() * f.grid.cell_volume) ** (1.0 / q)


def hsigma_norm(f: ScalarField3, sigma: float, ws: SpectralWorkspace) -> float:
    """Homogeneous Sobolev norm from the |k|^(2 sigma)-weighted spectrum.

    The zero mode is excluded, so sigma = 0 reproduces the L^2 norm of
    f - mean(f).
    """
    ws.check_grid(f)
    if not np.isfinite(sigma):
        raise ValidationError(f"sigma must be finite, got {sigma!r}")
    if not -3.0 <= sigma <= 3.0:
        raise ValidationError(f"sigma must lie in [-3, 3], got {sigma}")
    fhat = sfft.fftn(f.values, workers=_WORKERS)
    k2 = ws.k2_full
    with np.errstate(divide="ignore"):
        weight = np.where(k2 > 0, k2**sigma, 0.0)
    g = f.grid
    parseval = g.box_len**3 / g.n**6
    return float(np.sqrt(parseval * np.sum(weight * np.abs(fhat) ** 2)))


class DualNormResult(NamedTuple):
    value: float
    iterations: int
    residual: float


@dataclass(frozen=True)
class DualNormProblem:
    """One dual-norm evaluation: density f against the ball/sigma pair."""

    f: ScalarField3
    ball: Ball
    sigma: float
    tolerance: float = 1e-10
    max_iter: int = 2000

    def __post_init__(self):
        if not np.isfinite(self.sigma) or not 0.0 <= self.sigma < SIGMA_MAX:
            raise ValidationError(f"sigma must lie in [0, 3/2), got {self.sigma!r}")
        if not 0.0 < self.tolerance < 1.0:
            raise ValidationError(f"tolerance must lie in (0, 1), got {self.tolerance!r}")
        if self.max_iter < 1:
            raise ValidationError(f"max_iter must be >= 1, got {self.max_iter!r}")


def dual_norm(prob: DualNormProblem, ws: SpectralWorkspace) -> DualNormResult:
    """Negative-order dual norm by masked-operator conjugate gradient.

    For sigma = 0 the dual norm coincides with the L^2 ball norm and is
    returned directly without a solve.
    """
    ws.check_grid(prob.f)
    if prob.sigma == 0.0:
        return DualNormResult(lq_ball_norm(prob.f, prob.ball, 2.0), 0, 0.0)

    grid = prob.f.grid
    mask = ball_mask_bool(grid, prob.ball)
    b = np.where(mask, prob.f.values, 0.0)
    b_norm = float(np.sqrt(np.vdot(b, b).real))
    if b_norm == 0.0:
        return DualNormResult(0.0, 0, 0.0)

    mult = _power_multiplier(ws, 2.0 * prob.sigma)

    def apply(x):
        return np.where(mask, ws.inv(mult * ws.fwd(x)), 0.0)

    # Jacobi preconditioner from the multiplier's diagonal.  The diagonal
    # of a Fourier multiplier is the same at every grid point, so this is
    # a constant rescale (it leaves the CG iterates unchanged but keeps
    # the residual scaling tidy).
    k2f = ws.k2_full
    with np.errstate(divide="ignore"):
        diag = float(np.where(k2f > 0, k2f**prob.sigma, 0.0).sum()) / grid.n**3

    h3 = grid.cell_volume
    x = np.zeros_like(b)
    r = b.copy()
    z = r / diag
    p = z.copy()
    rz = float(np.vdot(r, z).real)
    iterations = 0
    rel = 1.0
    for iterations in range(1, prob.max_iter + 1):
        q = apply(p)
        pq = float(np.vdot(p, q).real)
        if pq <= 0.0:
            # masked multiplier operator is positive definite; a breakdown
            # here means roundoff exhausted the recurrence
            break
        alpha = rz / pq
        x += alpha * p
        r -= alpha * q
        rel = float(np.sqrt(np.vdot(r, r).real)) / b_norm
        if rel <= prob.tolerance:
            value = float(np.sqrt(max(h3 * np.vdot(b, x).real, 0.0)))
            return DualNormResult(value, iterations, rel)
        z = r / diag
        rz_new = float(np.vdot(r, z).real)
        p = z + (rz_new / rz) * p
        rz = rz_new
    value = float(np.sqrt(max(h3 * np.vdot(b, x).real, 0.0)))
    raise ConvergenceError("dual-norm CG failed to reach tolerance", value, rel, iterations)


_DENSE_GRID_LIMIT = 16


def dual_norm_dense(f: ScalarField3, ball: Ball, sigma: float,
                    ws: SpectralWorkspace) -> float:
    """Dense-factorization oracle for dual_norm (grids up to n = 16).

    Assembles the |k|^(2 sigma) multiplier matrix restricted to ball
    rows/columns via its convolution kernel and solves by Cholesky.
    """
    ws.check_grid(f)
    if not 0.0 <= sigma < SIGMA_MAX:
        raise ValidationError(f"sigma must lie in [0, 3/2), got {sigma!r}")
    grid = f.grid
    if grid.n > _DENSE_GRID_LIMIT:
        raise ValidationError(
            f"dense oracle is limited to n <= {_DENSE_GRID_LIMIT}, got n = {grid.n}"
        )
    if sigma == 0.0:
        return lq_ball_norm(f, ball, 2.0)
    mask = ball_mask_bool(grid, ball)
    if not mask.any():
        return 0.0
    k2 = ws.k2_full
    with np.errstate(divide="ignore"):
        weight = np.where(k2 > 0, k2**sigma, 0.0)
    kernel = sfft.ifftn(weight, workers=_WORKERS).real
    idx = np.argwhere(mask)
    npts = idx.shape[0]
    K = np.empty((npts, npts))
    step = 512
    for start in range(0, npts, step):
        block = idx[start:start + step]
        d = (block[:, None, :] - idx[None, :, :]) % grid.n
        K[start:start + step] = kernel[d[..., 0], d[..., 1], d[..., 2]]
    K = 0.5 * (K + K.T)
    rhs = f.values[mask]
    if not rhs.any():
        return 0.0
    sol = sla.cho_solve(sla.cho_factor(K), rhs)
    return float(np.sqrt(max(grid.cell_volume * float(rhs @ sol), 0.0)))


def singular_oscillation_field(grid: Grid3, center, s: float, eps: float) -> ScalarField3:
    """Sample |x|^(-eps-s) * sin(|x|^(-eps)) around `center`.

    The grid point nearest the singularity is replaced by the average of
    its six axis neighbors, which removes the one unbounded sample without
    touching the growth behavior of the norms.
    """
    if eps <= 0 or s <= 0:
        raise ValidationError("oscillation exponents must be positive")
    d2 = periodic_distance_squared(grid, center)
    nearest = tuple(int(round((c % grid.box_len) / grid.spacing)) % grid.n for c in center)
    d2 = d2.copy()
    d2[nearest] = 1.0  # placeholder, overwritten below
    d = np.sqrt(d2)
    vals = d ** (-(eps + s)) * np.sin(d ** (-eps))
    i, j, k = nearest
    n = grid.n
    neighbor_sum = (
        vals[(i - 1) % n, j, k] + vals[(i + 1) % n, j, k]
        + vals[i, (j - 1) % n, k] + vals[i, (j + 1) % n, k]
        + vals[i, j, (k - 1) % n] + vals[i, j, (k + 1) % n]
    )
    vals[nearest] = neighbor_sum / 6.0
    return ScalarField3(grid, vals)


class OscillationRow(NamedTuple):
    n: int
    dual_f: float
    dual_abs_f: float


def oscillation_probe(s: float, eps: float, sigma: float, resolutions,
                      box_len: float = 2.0, radius_frac: float = 0.25,
                      tolerance: float = 1e-8, max_iter: int = 6000) -> list:
    """Dual norms of the sign-oscillating singular field and of its absolute
    value across grid resolutions.

    For the oscillatory profile the signed column stays bounded while the
    absolute-value column keeps growing with resolution; that growth is the
    observable footprint of |f| falling outside the dual space.
    """
    res = list(resolutions)
    if any(b <= a for a, b in zip(res, res[1:])):
        raise ValidationError(f"resolutions must be increasing, got {res}")
    rows = []
    for n in res:
        grid = Grid3(n, box_len)
        ws = SpectralWorkspace(grid)
        center = (box_len / 2.0,) * 3
        ball = Ball(center, radius_frac * box_len)
        f = singular_oscillation_field(grid, center, s, eps)
        f_abs = ScalarField3(grid, np.abs(f.values))
        val_f = dual_norm(DualNormProblem(f, ball, sigma, tolerance, max_iter), ws).value
        val_abs = dual_norm(DualNormProblem(f_abs, ball, sigma, tolerance, max_iter), ws).value
        rows.append(OscillationRow(n, val_f, val_abs))
    return rows


class InterpolationCheck(NamedTuple):
    lhs: float
    rhs: float
    ratio: float


def mean_zero_interpolation_check(f: ScalarField3, ball: Ball, q: float,
                                  ws: SpectralWorkspace) -> InterpolationCheck:
    """Both sides (with unit constant) of the ball interpolation bound

        int_B |u|^q <= C(q) (int_B |grad u|^2)^(3q/4-3/2) (int_B |u|^2)^(3/2-q/4)

    after adjusting f to ball mean zero.  Returned for empirical-constant
    tracking; nothing is asserted here.
    """
    ws.check_grid(f)
    if not 2.0 <= q <= 6.0:
        raise ValidationError(f"q must lie in [2, 6], got {q!r}")
    mask = ball_mask_bool(f.grid, ball)
    if not mask.any():
        raise ValidationError("discrete ball is empty")
    h3 = f.grid.cell_volume
    v = f.values[mask]
    v = v - v.mean()
    lhs = float((np.abs(v) ** q).sum() * h3)
    fhat = ws.fwd(f.values)
    grad_sq = np.zeros_like(f.values)
    for i in range(3):
        grad_sq += ws.inv(1j * ws.k_deriv[i] * fhat) ** 2
    grad_int = float(grad_sq[mask].sum() * h3)
    l2_int = float((v**2).sum() * h3)
    rhs = grad_int ** (0.75 * q - 1.5) * l2_int ** (1.5 - 0.25 * q)
    ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0.0 else float("inf"))
    return InterpolationCheck(lhs, rhs, ratio)
