"""Grids, sampled fields, snapshot series, balls and the NSF1 binary format.

Everything downstream consumes these types.  The domain is always the
periodic box [0, L)^3 sampled on a uniform n^3 grid, which stands in for
whole space: box length is chosen at least 4x the largest ball radius so
that periodic images do not interact.  Fields are immutable after
construction (their arrays are marked read-only) and safe to share across
workers.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, ValidationError

NSF1_MAGIC = b"NSF1"
_NSF1_NCOMP = 4  # u1, u2, u3, p
# magic(4) + n(4) + box_len(8) + ncomp(4) + nsnap(4) + 8 reserved zero bytes
_NSF1_HEADER_BYTES = 32


@dataclass(frozen=True)
class Grid3:
    """Periodic cubic grid: n samples per axis on a box of side box_len."""

    n: int
    box_len: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 4:
            raise ValidationError(f"grid size must be an integer >= 4, got {self.n!r}")
        if not np.isfinite(self.box_len) or self.box_len <= 0:
            raise ValidationError(f"box length must be positive and finite, got {self.box_len!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "box_len", float(self.box_len))

    @property
    def spacing(self) -> float:
        return self.box_len / self.n

    def axis_coords(self) -> np.ndarray:
        """Sample coordinates along one axis (identical for all three)."""
        return np.arange(self.n) * self.spacing

    @property
    def cell_volume(self) -> float:
        return self.spacing**3


def _as_field_values(grid: Grid3, values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    shape = (grid.n,) * 3
    if arr.shape != shape:
        raise ValidationError(f"field values must have shape {shape}, got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValidationError("field values contain NaN or Inf")
    arr = arr.copy(order="C")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ScalarField3:
    """Real scalar samples on a Grid3, row-major in (x, y, z)."""

    grid: Grid3
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _as_field_values(self.grid, self.values))

    def mean(self) -> float:
        return float(self.values.mean())

    def integral(self) -> float:
        """Midpoint-rule integral over the full box."""
        return float(self.values.sum()) * self.grid.cell_volume


@dataclass(frozen=True)
class VectorField3:
    """Three scalar components sharing one grid."""

    grid: Grid3
    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) != 3:
            raise ValidationError("vector field needs exactly 3 components")
        for c in comps:
            if not isinstance(c, ScalarField3):
                raise ValidationError("vector components must be ScalarField3")
            if c.grid != self.grid:
                raise ValidationError("vector components must share the grid")
        object.__setattr__(self, "components", comps)

    @classmethod
    def from_arrays(cls, grid: Grid3, ux, uy, uz) -> "VectorField3":
        return cls(grid, tuple(ScalarField3(grid, a) for a in (ux, uy, uz)))

    def magnitude_squared(self) -> np.ndarray:
        c = self.components
        return c[0].values**2 + c[1].values**2 + c[2].values**2


@dataclass(frozen=True)
class Snapshot:
    """One (velocity, pressure) pair at a fixed time."""

    time: float
    velocity: VectorField3
    pressure: ScalarField3

    def __post_init__(self):
        if not np.isfinite(self.time):
            raise ValidationError(f"snapshot time must be finite, got {self.time!r}")
        if self.velocity.grid != self.pressure.grid:
            raise ValidationError("velocity and pressure must share the grid")
        object.__setattr__(self, "time", float(self.time))

    @property
    def grid(self) -> Grid3:
        return self.velocity.grid


@dataclass(frozen=True)
class SnapshotSeries:
    """Time-ordered snapshots on a single grid; times strictly increasing."""

    grid: Grid3
    snapshots: tuple

    def __post_init__(self):
        snaps = tuple(self.snapshots)
        if not snaps:
            raise ValidationError("snapshot series must be nonempty")
        for s in snaps:
            if s.grid != self.grid:
                raise ValidationError("all snapshots must live on the series grid")
        times = [s.time for s in snaps]
        if any(t1 <= t0 for t0, t1 in zip(times, times[1:])):
            raise ValidationError(f"snapshot times must be strictly increasing, got {times}")
        object.__setattr__(self, "snapshots", snaps)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.snapshots])

    def __len__(self) -> int:
        return len(self.snapshots)

    def thin(self, every: int) -> "SnapshotSeries":
        """Sub-series keeping every k-th snapshot (always keeps the first)."""
        if every < 1:
            raise ValidationError("thinning stride must be >= 1")
        return SnapshotSeries(self.grid, self.snapshots[::every])


@dataclass(frozen=True)
class Ball:
    """Euclidean ball with periodic (minimum-image) distance."""

    center: tuple
    radius: float

    def __post_init__(self):
        c = tuple(float(x) for x in self.center)
        if len(c) != 3 or not all(np.isfinite(x) for x in c):
            raise ValidationError(f"ball center must be 3 finite reals, got {self.center!r}")
        if not np.isfinite(self.radius) or self.radius <= 0:
            raise ValidationError(f"ball radius must be positive, got {self.radius!r}")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    def scaled(self, factor: float) -> "Ball":
        return Ball(self.center, self.radius * factor)


@dataclass(frozen=True)
class ParabolicCylinder:
    """Space-time cylinder B_r(x0) x (t0 - r^2, t0]."""

    center_space: tuple
    center_time: float
    radius: float

    def __post_init__(self):
        ball = Ball(self.center_space, self.radius)  # reuse validation
        object.__setattr__(self, "center_space", ball.center)
        if not np.isfinite(self.center_time):
            raise ValidationError(f"cylinder time must be finite, got {self.center_time!r}")
        object.__setattr__(self, "center_time", float(self.center_time))
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def ball(self) -> Ball:
        return Ball(self.center_space, self.radius)

    @property
    def t_start(self) -> float:
        return self.center_time - self.radius**2


def periodic_distance_squared(grid: Grid3, center) -> np.ndarray:
    """Squared minimum-image distance from every grid point to `center`."""
    d2 = []
    L = grid.box_len
    x = grid.axis_coords()
    for c in center:
        d = np.abs(x - (c % L))
        d = np.minimum(d, L - d)
        d2.append(d * d)
    return d2[0][:, None, None] + d2[1][None, :, None] + d2[2][None, None, :]


_MASK_CACHE: dict = {}


def ball_mask_bool(grid: Grid3, ball: Ball) -> np.ndarray:
    """Boolean indicator of the discrete ball (periodic distance < radius)."""
    if ball.radius > grid.box_len / 2:
        raise ValidationError(
            f"ball radius {ball.radius} exceeds box_len/2 = {grid.box_len / 2}"
        )
    key = (grid, ball)
    hit = _MASK_CACHE.get(key)
    if hit is None:
        hit = periodic_distance_squared(grid, ball.center) < ball.radius**2
        hit.setflags(write=False)
        if len(_MASK_CACHE) > 256:
            _MASK_CACHE.clear()
        _MASK_CACHE[key] = hit
    return hit


def ball_mask(grid: Grid3, ball: Ball) -> ScalarField3:
    """Sharp 0/1 indicator of the ball as a scalar field."""
    return ScalarField3(grid, ball_mask_bool(grid, ball).astype(np.float64))


def save_series(series: SnapshotSeries, path) -> None:
    """Write a series in the NSF1 format (little-endian, bit-exact round trip).

    Layout: magic "NSF1", u32 n, f64 box_len, u32 ncomp (always 4),
    u32 nsnap, 8 reserved zero bytes, f64 times[nsnap], then per snapshot
    the four components (u1, u2, u3, p) as n^3 f64 values in row-major
    (x, y, z) order.
    """
    g = series.grid
    with open(path, "wb") as fh:
        fh.write(NSF1_MAGIC)
        fh.write(struct.pack("<I", g.n))
        fh.write(struct.pack("<d", g.box_len))
        fh.write(struct.pack("<II", _NSF1_NCOMP, len(series)))
        fh.write(b"\x00" * 8)
        fh.write(series.times.astype("<f8").tobytes())
        for snap in series.snapshots:
            for comp in snap.velocity.components:
                fh.write(comp.values.astype("<f8").tobytes(order="C"))
            fh.write(snap.pressure.values.astype("<f8").tobytes(order="C"))


def load_series(path) -> SnapshotSeries:
    """Read an NSF1 file written by save_series."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _NSF1_HEADER_BYTES:
        raise FormatError("header", f"file too short ({len(raw)} bytes)")
    if raw[:4] != NSF1_MAGIC:
        raise FormatError("magic", f"expected {NSF1_MAGIC!r}, got {raw[:4]!r}")
    n = struct.unpack_from("<I", raw, 4)[0]
    box_len = struct.unpack_from("<d", raw, 8)[0]
    ncomp, nsnap = struct.unpack_from("<II", raw, 16)
    if n < 4:
        raise FormatError("n", f"grid size {n} below minimum 4")
    if not np.isfinite(box_len) or box_len <= 0:
        raise FormatError("box_len", f"must be positive and finite, got {box_len}")
    if ncomp != _NSF1_NCOMP:
        raise FormatError("ncomp", f"expected {_NSF1_NCOMP}, got {ncomp}")
    if nsnap == 0:
        raise ValidationError("NSF1 file declares nsnap=0; series must be nonempty")
    grid = Grid3(n, box_len)
    offset = _NSF1_HEADER_BYTES
    expected = offset + 8 * nsnap + nsnap * _NSF1_NCOMP * n**3 * 8
    if len(raw) != expected:
        raise FormatError("payload", f"expected {expected} bytes, file has {len(raw)}")
    times = np.frombuffer(raw, dtype="<f8", count=nsnap, offset=offset)
    offset += 8 * nsnap
    if any(t1 <= t0 for t0, t1 in zip(times, times[1:])):
        raise ValidationError(f"times must be strictly increasing, got {times.tolist()}")
    shape = (n, n, n)
    count = n**3
    snapshots = []
    for i in range(nsnap):
        comps = []
        for _ in range(_NSF1_NCOMP):
            vals = np.frombuffer(raw, dtype="<f8", count=count, offset=offset)
            comps.append(vals.reshape(shape))
            offset += count * 8
        velocity = VectorField3.from_arrays(grid, *comps[:3])
        pressure = ScalarField3(grid, comps[3])
        snapshots.append(Snapshot(float(times[i]), velocity, pressure))
    return SnapshotSeries(grid, tuple(snapshots))
