"""Desk-scale pseudo-spectral Navier-Stokes solver on the periodic box.

Classic incompressible setup: rotational-form nonlinearity evaluated in
physical space, 2/3-rule dealiasing, Leray projection of the nonlinear
term, and an exact integrating factor for the viscous part wrapped around
RK4.  Unforced, so kinetic energy decays monotonically at resolved scales;
runs stay smooth at the default viscosity and the stored snapshots are
valid test data for every analysis module.  The stored pressure is the
spectral solve of the velocity actually stored, so downstream consumers
never disagree with the solver about aliasing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SolverError, ValidationError
from .fields import Grid3, Snapshot, SnapshotSeries, VectorField3
from .spectral import SpectralWorkspace, pressure_from_velocity

CFL_SAFETY = 0.5


@dataclass(frozen=True)
class SolverConfig:
    n: int
    box_len: float
    viscosity: float
    dt: float
    t_end: float
    output_every: int = 1
    dealias: bool = True
    nonlinear: bool = True  # test hook: False gives the exact Stokes limit

    def __post_init__(self):
        Grid3(self.n, self.box_len)  # reuse grid validation
        if not np.isfinite(self.viscosity) or self.viscosity <= 0:
            raise ValidationError(f"viscosity must be positive, got {self.viscosity!r}")
        if not np.isfinite(self.dt) or self.dt <= 0:
            raise ValidationError(f"dt must be positive, got {self.dt!r}")
        if not np.isfinite(self.t_end) or self.t_end < 0:
            raise ValidationError(f"t_end must be nonnegative, got {self.t_end!r}")
        if self.output_every < 1:
            raise ValidationError(f"output_every must be >= 1, got {self.output_every}")

    @property
    def grid(self) -> Grid3:
        return Grid3(self.n, self.box_len)


def taylor_green_init(grid: Grid3) -> VectorField3:
    """Single-mode divergence-free vortex; mean kinetic energy is exactly 1/8."""
    k = 2.0 * np.pi / grid.box_len
    x = grid.axis_coords()
    X = (k * x)[:, None, None]
    Y = (k * x)[None, :, None]
    Z = (k * x)[None, None, :]
    ux = np.cos(X) * np.sin(Y) * np.sin(Z)
    uy = -np.sin(X) * np.cos(Y) * np.sin(Z)
    uz = np.zeros_like(ux)
    return VectorField3.from_arrays(grid, ux, uy, uz)


class _State:
    """Spectral velocity plus the precomputed step operators."""

    def __init__(self, cfg: SolverConfig, ws: SpectralWorkspace):
        self.cfg = cfg
        self.ws = ws
        n = cfg.n
        k2 = ws.k2
        self.decay_full = np.exp(-cfg.viscosity * k2 * cfg.dt)
        self.decay_half = np.exp(-cfg.viscosity * k2 * cfg.dt / 2.0)
        if cfg.dealias:
            limit = (2.0 / 3.0) * (n // 2)
            scale = cfg.box_len / (2.0 * np.pi)
            keep = (
                (np.abs(ws.k[0]) * scale <= limit)
                & (np.abs(ws.k[1]) * scale <= limit)
                & (np.abs(ws.k[2]) * scale <= limit)
            )
            self.dealias_mask = keep
        else:
            self.dealias_mask = None
        kd = ws.k_deriv
        k2d = kd[0] ** 2 + kd[1] ** 2 + kd[2] ** 2
        with np.errstate(invalid="ignore", divide="ignore"):
            self.inv_k2 = np.where(k2d > 0, 1.0 / k2d, 0.0)

    def project(self, vhat):
        kd = self.ws.k_deriv
        kdotv = kd[0] * vhat[0] + kd[1] * vhat[1] + kd[2] * vhat[2]
        kdotv *= self.inv_k2
        return [vhat[i] - kd[i] * kdotv for i in range(3)]

    def nonlinear_hat(self, uhat):
        """Projected, dealiased transform of u x omega (rotational form)."""
        cfg, ws = self.cfg, self.ws
        if not cfg.nonlinear:
            return [np.zeros_like(uhat[0]) for _ in range(3)]
        k = ws.k_deriv
        u = [ws.inv(uhat[i]) for i in range(3)]
        w = [
            ws.inv(1j * (k[1] * uhat[2] - k[2] * uhat[1])),
            ws.inv(1j * (k[2] * uhat[0] - k[0] * uhat[2])),
            ws.inv(1j * (k[0] * uhat[1] - k[1] * uhat[0])),
        ]
        umax = max(float(np.max(np.abs(c))) for c in u)
        if not np.isfinite(umax):
            raise SolverError("velocity became non-finite during stepping")
        spacing = cfg.box_len / cfg.n
        if umax > 0 and cfg.dt > CFL_SAFETY * spacing / umax:
            raise SolverError(
                f"CFL violation: dt={cfg.dt} exceeds {CFL_SAFETY} * spacing/max|u| "
                f"= {CFL_SAFETY * spacing / umax:.3e} (max|u|={umax:.3e})"
            )
        cross = [
            u[1] * w[2] - u[2] * w[1],
            u[2] * w[0] - u[0] * w[2],
            u[0] * w[1] - u[1] * w[0],
        ]
        nhat = [ws.fwd(c) for c in cross]
        if self.dealias_mask is not None:
            nhat = [np.where(self.dealias_mask, c, 0.0) for c in nhat]
        return self.project(nhat)

    def step_hat(self, uhat):
        """One integrating-factor RK4 step in spectral space."""
        dt = self.cfg.dt
        E, E2 = self.decay_full, self.decay_half
        n1 = self.nonlinear_hat(uhat)
        s2 = [E2 * (uhat[i] + 0.5 * dt * n1[i]) for i in range(3)]
        n2 = self.nonlinear_hat(s2)
        s3 = [E2 * uhat[i] + 0.5 * dt * n2[i] for i in range(3)]
        n3 = self.nonlinear_hat(s3)
        s4 = [E * uhat[i] + dt * E2 * n3[i] for i in range(3)]
        n4 = self.nonlinear_hat(s4)
        return [
            E * uhat[i]
            + dt / 6.0 * (E * n1[i] + 2.0 * E2 * (n2[i] + n3[i]) + n4[i])
            for i in range(3)
        ]


def step(state: VectorField3, cfg: SolverConfig, ws: SpectralWorkspace) -> VectorField3:
    """Advance a physical-space velocity field by one time step."""
    ws.check_grid(state)
    if state.grid != cfg.grid:
        raise ValidationError("state grid does not match the solver config")
    stepper = _State(cfg, ws)
    uhat = [ws.fwd(c.values) for c in state.components]
    uhat = stepper.step_hat(uhat)
    return VectorField3.from_arrays(state.grid, *(ws.inv(c) for c in uhat))


def run(cfg: SolverConfig, ws: SpectralWorkspace | None = None) -> SnapshotSeries:
    """Integrate a Taylor-Green start to t_end, storing every
    output_every-th step with its spectrally consistent pressure."""
    grid = cfg.grid
    if ws is None:
        ws = SpectralWorkspace(grid)
    nsteps = int(round(cfg.t_end / cfg.dt))
    if abs(nsteps * cfg.dt - cfg.t_end) > 1e-9 * max(1.0, cfg.t_end):
        raise ValidationError(
            f"t_end={cfg.t_end} is not an integer number of steps of dt={cfg.dt}"
        )
    stepper = _State(cfg, ws)
    u0 = taylor_green_init(grid)
    uhat = [ws.fwd(c.values) for c in u0.components]
    uhat = stepper.project(uhat)

    snapshots = []

    def store(step_index, spectral):
        vel = VectorField3.from_arrays(grid, *(ws.inv(c) for c in spectral))
        p = pressure_from_velocity(vel, ws)
        snapshots.append(Snapshot(step_index * cfg.dt, vel, p))

    store(0, uhat)
    for istep in range(1, nsteps + 1):
        uhat = stepper.step_hat(uhat)
        if istep % cfg.output_every == 0:
            store(istep, uhat)
    return SnapshotSeries(grid, tuple(snapshots))
