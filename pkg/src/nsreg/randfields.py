"""Deterministic random smooth fields for property suites and tests.

Spectral synthesis: filtered white noise with a power-law envelope and a
hard cutoff below the Nyquist third, so every generated field is band
limited (no Nyquist content, no aliasing surprises in the operator
identities) and reproducible from the seed.
"""

from __future__ import annotations

import numpy as np
from scipy import fft as sfft

from .fields import Grid3, ScalarField3, VectorField3
from .spectral import SpectralWorkspace, leray_project, _WORKERS


def random_scalar_field(grid: Grid3, rng: np.random.Generator,
                        kmax_frac: float = 1.0 / 3.0,
                        slope: float = 2.0) -> ScalarField3:
    """Band-limited random field, zero mean, unit root-mean-square."""
    n = grid.n
    white = rng.standard_normal((n, n, n))
    what = sfft.fftn(white, workers=_WORKERS)
    k1 = np.fft.fftfreq(n, d=1.0 / n)
    kx = np.abs(k1)[:, None, None]
    ky = np.abs(k1)[None, :, None]
    kz = np.abs(k1)[None, None, :]
    kcut = max(1.0, kmax_frac * (n // 2))
    keep = (kx <= kcut) & (ky <= kcut) & (kz <= kcut)
    kk = np.sqrt(kx**2 + ky**2 + kz**2)
    envelope = np.where(kk > 0, (1.0 + kk) ** (-slope), 0.0)
    vals = sfft.ifftn(what * envelope * keep, workers=_WORKERS).real
    rms = np.sqrt(np.mean(vals**2))
    if rms > 0:
        vals /= rms
    return ScalarField3(grid, vals)


def random_vector_field(grid: Grid3, rng: np.random.Generator,
                        **kwargs) -> VectorField3:
    comps = [random_scalar_field(grid, rng, **kwargs) for _ in range(3)]
    return VectorField3(grid, tuple(comps))


def random_divfree_field(grid: Grid3, rng: np.random.Generator,
                         ws: SpectralWorkspace | None = None,
                         **kwargs) -> VectorField3:
    if ws is None:
        ws = SpectralWorkspace(grid)
    return leray_project(random_vector_field(grid, rng, **kwargs), ws)
