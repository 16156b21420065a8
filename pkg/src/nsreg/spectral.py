"""Fourier-multiplier operators on the periodic box.

Conventions, fixed here once:

* forward transform is the plain unnormalized DFT sum, the inverse divides
  by n^3 (numpy/scipy default), so Parseval reads
  ``sum |f|^2 * h^3 = (L^3 / n^6) * sum_k |fhat_k|^2``;
* every multiplier with |k| in a denominator maps the k=0 coefficient to 0
  (homogeneous operators on the torus are defined modulo constants, outputs
  are mean-zero representatives);
* odd-order multipliers (single derivatives, Riesz transforms) are zeroed
  on the Nyquist planes so they stay exactly skew-adjoint on real data;
  even multipliers (|k|^s, projections) keep the full symmetric range.
"""

from __future__ import annotations

import os

import numpy as np
from scipy import fft as sfft

from .errors import ValidationError
from .fields import Grid3, ScalarField3, VectorField3

_WORKERS = min(os.cpu_count() or 1, 8)


class SpectralWorkspace:
    """Precomputed wavevectors and transform helpers for one grid.

    Holds no mutable state after construction; sharing across threads is
    safe because all operations allocate fresh output arrays.
    """

    def __init__(self, grid: Grid3):
        self.grid = grid
        n = grid.n
        two_pi_over_L = 2.0 * np.pi / grid.box_len
        k1 = two_pi_over_L * np.fft.fftfreq(n, d=1.0 / n)
        k1r = two_pi_over_L * np.fft.rfftfreq(n, d=1.0 / n)
        # derivative wavenumbers: Nyquist plane zeroed (n even) so odd
        # multipliers keep real fields real and skew-adjoint
        k1d = k1.copy()
        k1r_d = k1r.copy()
        if n % 2 == 0:
            k1d[n // 2] = 0.0
            k1r_d[-1] = 0.0
        self.k = (
            k1.reshape(n, 1, 1),
            k1.reshape(1, n, 1),
            k1r.reshape(1, 1, n // 2 + 1),
        )
        self.k_deriv = (
            k1d.reshape(n, 1, 1),
            k1d.reshape(1, n, 1),
            k1r_d.reshape(1, 1, n // 2 + 1),
        )
        self.k2 = self.k[0] ** 2 + self.k[1] ** 2 + self.k[2] ** 2
        self.kmag = np.sqrt(self.k2)
        self._k2_full = None
        self._shape = (n, n, n)

    @property
    def k2_full(self) -> np.ndarray:
        """|k|^2 on the full complex spectrum (for fftn-based norms)."""
        if self._k2_full is None:
            n = self.grid.n
            k1 = 2.0 * np.pi / self.grid.box_len * np.fft.fftfreq(n, d=1.0 / n)
            self._k2_full = (
                k1.reshape(n, 1, 1) ** 2
                + k1.reshape(1, n, 1) ** 2
                + k1.reshape(1, 1, n) ** 2
            )
        return self._k2_full

    def fwd(self, values: np.ndarray) -> np.ndarray:
        return sfft.rfftn(values, workers=_WORKERS)

    def inv(self, spectrum: np.ndarray) -> np.ndarray:
        return sfft.irfftn(spectrum, s=self._shape, workers=_WORKERS)

    def apply_multiplier(self, values: np.ndarray, mult: np.ndarray) -> np.ndarray:
        return self.inv(mult * self.fwd(values))

    def check_grid(self, obj):
        if obj.grid != self.grid:
            raise ValidationError(
                f"grid mismatch: workspace has {self.grid}, field has {obj.grid}"
            )


_WS_CACHE: dict = {}


def get_workspace(grid: Grid3) -> SpectralWorkspace:
    ws = _WS_CACHE.get(grid)
    if ws is None:
        if len(_WS_CACHE) > 8:
            _WS_CACHE.clear()
        ws = _WS_CACHE[grid] = SpectralWorkspace(grid)
    return ws


def _power_multiplier(ws: SpectralWorkspace, s: float) -> np.ndarray:
    """|k|^s with the zero mode mapped to 0."""
    with np.errstate(divide="ignore"):
        mult = np.where(ws.k2 > 0, ws.kmag**s, 0.0)
    return mult


def derivative(f: ScalarField3, axis: int, ws: SpectralWorkspace) -> ScalarField3:
    """Spectral d/dx_axis; exact on band-limited fields. axis is 1-based."""
    ws.check_grid(f)
    if axis not in (1, 2, 3):
        raise ValidationError(f"axis must be 1, 2 or 3, got {axis}")
    mult = 1j * ws.k_deriv[axis - 1]
    return ScalarField3(f.grid, ws.apply_multiplier(f.values, mult))


def gradient(f: ScalarField3, ws: SpectralWorkspace) -> VectorField3:
    ws.check_grid(f)
    fhat = ws.fwd(f.values)
    parts = [ws.inv(1j * ws.k_deriv[i] * fhat) for i in range(3)]
    return VectorField3.from_arrays(f.grid, *parts)


def divergence(v: VectorField3, ws: SpectralWorkspace) -> ScalarField3:
    ws.check_grid(v)
    out = np.zeros((ws.grid.n,) * 3)
    for i, comp in enumerate(v.components):
        out += ws.inv(1j * ws.k_deriv[i] * ws.fwd(comp.values))
    return ScalarField3(v.grid, out)


def laplacian(f: ScalarField3, ws: SpectralWorkspace) -> ScalarField3:
    ws.check_grid(f)
    return ScalarField3(f.grid, ws.apply_multiplier(f.values, -ws.k2))


def gradient_squared_sum(v: VectorField3, ws: SpectralWorkspace) -> np.ndarray:
    """|grad u|^2 = sum_ij (d_i u_j)^2 as a raw array."""
    ws.check_grid(v)
    out = np.zeros((ws.grid.n,) * 3)
    for comp in v.components:
        chat = ws.fwd(comp.values)
        for i in range(3):
            out += ws.inv(1j * ws.k_deriv[i] * chat) ** 2
    return out


def riesz(f: ScalarField3, axis: int, ws: SpectralWorkspace) -> ScalarField3:
    """Riesz transform along one axis: multiplier i*k_axis/|k|, zero mode -> 0."""
    ws.check_grid(f)
    if axis not in (1, 2, 3):
        raise ValidationError(f"axis must be 1, 2 or 3, got {axis}")
    with np.errstate(invalid="ignore", divide="ignore"):
        mult = np.where(ws.kmag > 0, ws.k_deriv[axis - 1] / ws.kmag, 0.0)
    return ScalarField3(f.grid, ws.apply_multiplier(f.values, 1j * mult))


def riesz_double_sum(f: ScalarField3, ws: SpectralWorkspace) -> ScalarField3:
    """sum_i R_i(R_i f); equals -(f - mean f) on band-limited fields."""
    ws.check_grid(f)
    out = np.zeros((ws.grid.n,) * 3)
    for axis in (1, 2, 3):
        out += riesz(riesz(f, axis, ws), axis, ws).values
    return ScalarField3(f.grid, out)


def frac_laplacian(f: ScalarField3, s: float, ws: SpectralWorkspace) -> ScalarField3:
    """(-Laplace)^(s/2) as the multiplier |k|^s; zero mode -> 0."""
    ws.check_grid(f)
    if not np.isfinite(s):
        raise ValidationError(f"fractional order must be finite, got {s!r}")
    if not -3.0 <= s <= 3.0:
        raise ValidationError(f"fractional order must lie in [-3, 3], got {s}")
    return ScalarField3(f.grid, ws.apply_multiplier(f.values, _power_multiplier(ws, s)))


def leray_project(v: VectorField3, ws: SpectralWorkspace) -> VectorField3:
    """Project onto divergence-free fields: vhat -> vhat - k (k.vhat)/|k|^2.

    The derivative wavenumbers (Nyquist zeroed) keep the per-mode tensor an
    exact orthogonal projection under the real transform convention, so the
    operator is idempotent to rounding and annihilates spectral gradients.
    """
    ws.check_grid(v)
    vhat = [ws.fwd(c.values) for c in v.components]
    kd = ws.k_deriv
    k2d = kd[0] ** 2 + kd[1] ** 2 + kd[2] ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        inv_k2 = np.where(k2d > 0, 1.0 / k2d, 0.0)
    kdotv = kd[0] * vhat[0] + kd[1] * vhat[1] + kd[2] * vhat[2]
    parts = [ws.inv(vhat[i] - kd[i] * kdotv * inv_k2) for i in range(3)]
    return VectorField3.from_arrays(v.grid, *parts)


def pressure_from_velocity(u: VectorField3, ws: SpectralWorkspace) -> ScalarField3:
    """Mean-zero p solving -Laplace p = div div (u (x) u) spectrally.

    The tensor u_i u_j is formed pointwise in physical space (no dealiasing
    here; the solver owns its own aliasing treatment).
    """
    ws.check_grid(u)
    c = [comp.values for comp in u.components]
    kd = ws.k_deriv
    with np.errstate(invalid="ignore", divide="ignore"):
        inv_k2 = np.where(ws.k2 > 0, 1.0 / ws.k2, 0.0)
    acc = np.zeros(ws.k2.shape, dtype=np.complex128)
    for i in range(3):
        for j in range(3):
            acc += kd[i] * kd[j] * ws.fwd(c[i] * c[j])
    phat = -acc * inv_k2
    return ScalarField3(u.grid, ws.inv(phat))


def double_divergence(tensor, ws: SpectralWorkspace) -> np.ndarray:
    """div div T for a 3x3 nest of raw arrays (derivative wavenumbers)."""
    kd = ws.k_deriv
    acc = np.zeros(ws.k2.shape, dtype=np.complex128)
    for i in range(3):
        for j in range(3):
            acc -= kd[i] * kd[j] * ws.fwd(tensor[i][j])
    return ws.inv(acc)


def pressure_residual(u: VectorField3, p: ScalarField3, ws: SpectralWorkspace) -> float:
    """max |Laplace p + div div (u (x) u)|, the consistency defect of p."""
    ws.check_grid(u)
    ws.check_grid(p)
    c = [comp.values for comp in u.components]
    tensor = [[c[i] * c[j] for j in range(3)] for i in range(3)]
    lap_p = ws.apply_multiplier(p.values, -ws.k2)
    return float(np.max(np.abs(lap_p + double_divergence(tensor, ws))))


def riesz_riesz_tensor_sum(tensor, ws: SpectralWorkspace) -> np.ndarray:
    """sum_ij R_i R_j T_ij for a 3x3 nest of raw arrays.

    Multiplier -k_i k_j / |k|^2 per entry, zero mode -> 0.  This is the
    Calderon-Zygmund part of the pressure when T is the velocity tensor.
    """
    kd = ws.k_deriv
    with np.errstate(invalid="ignore", divide="ignore"):
        inv_k2 = np.where(ws.k2 > 0, 1.0 / ws.k2, 0.0)
    acc = np.zeros(ws.k2.shape, dtype=np.complex128)
    for i in range(3):
        for j in range(3):
            acc -= kd[i] * kd[j] * ws.fwd(tensor[i][j])
    return ws.inv(acc * inv_k2)
