"""Grid, field, ball-mask and NSF1 format tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsreg.errors import FormatError, ValidationError
from nsreg.fields import (
    Ball,
    Grid3,
    ParabolicCylinder,
    ScalarField3,
    Snapshot,
    SnapshotSeries,
    VectorField3,
    ball_mask,
    ball_mask_bool,
    load_series,
    save_series,
)

from _oracles import ball_volume, constant_series, zero_series


def test_grid_validation():
    with pytest.raises(ValidationError):
        Grid3(3, 1.0)
    with pytest.raises(ValidationError):
        Grid3(8, -1.0)
    with pytest.raises(ValidationError):
        Grid3(8, float("nan"))
    g = Grid3(8, 2.0)
    assert g.spacing == 0.25
    assert g.cell_volume == 0.25**3


def test_field_rejects_nonfinite():
    g = Grid3(4, 1.0)
    bad = np.zeros((4, 4, 4))
    bad[1, 2, 3] = np.nan
    with pytest.raises(ValidationError):
        ScalarField3(g, bad)
    bad[1, 2, 3] = np.inf
    with pytest.raises(ValidationError):
        ScalarField3(g, bad)
    with pytest.raises(ValidationError):
        ScalarField3(g, np.zeros((4, 4)))


def test_field_values_are_read_only():
    g = Grid3(4, 1.0)
    f = ScalarField3(g, np.zeros((4, 4, 4)))
    with pytest.raises(ValueError):
        f.values[0, 0, 0] = 1.0


def test_vector_field_grid_consistency():
    g = Grid3(4, 1.0)
    other = Grid3(8, 1.0)
    a = ScalarField3(g, np.zeros((4, 4, 4)))
    b = ScalarField3(other, np.zeros((8, 8, 8)))
    with pytest.raises(ValidationError):
        VectorField3(g, (a, a, b))


def test_series_invariants():
    g = Grid3(4, 1.0)
    zero = np.zeros((4, 4, 4))
    vel = VectorField3.from_arrays(g, zero, zero, zero)
    p = ScalarField3(g, zero)
    s0 = Snapshot(0.0, vel, p)
    s1 = Snapshot(0.0, vel, p)
    with pytest.raises(ValidationError):
        SnapshotSeries(g, (s0, s1))  # equal times
    with pytest.raises(ValidationError):
        SnapshotSeries(g, ())
    series = SnapshotSeries(g, (s0, Snapshot(0.5, vel, p), Snapshot(1.0, vel, p)))
    assert len(series.thin(2)) == 2


def test_ball_and_cylinder_validation():
    with pytest.raises(ValidationError):
        Ball((0.0, 0.0, 0.0), -0.1)
    with pytest.raises(ValidationError):
        Ball((0.0, np.nan, 0.0), 0.1)
    cyl = ParabolicCylinder((0.5, 0.5, 0.5), 1.0, 0.25)
    assert cyl.t_start == 1.0 - 0.25**2
    assert cyl.ball.radius == 0.25


def test_ball_mask_radius_cap():
    g = Grid3(8, 2.0)
    with pytest.raises(ValidationError):
        ball_mask(g, Ball((1.0, 1.0, 1.0), 1.01))


def test_ball_mask_max_radius_volume_fraction():
    # at the maximal radius L/2 the ball fills pi/6 of the box
    g = Grid3(64, 2.0)
    m = ball_mask(g, Ball((1.0, 1.0, 1.0), 1.0))
    assert abs(m.mean() - np.pi / 6.0) < 0.05 * np.pi / 6.0


def test_ball_mask_volume_refinement():
    r = 0.5  # L/4
    vol = ball_volume(r)
    errors = {}
    for n in (16, 32, 64):
        g = Grid3(n, 2.0)
        m = ball_mask(g, Ball((1.0, 1.0, 1.0), r))
        errors[n] = abs(m.mean() * 2.0**3 - vol) / vol
    assert errors[64] < 0.05
    assert errors[64] < errors[16]


def test_ball_mask_empty_for_tiny_offcenter_radius():
    g = Grid3(16, 2.0)
    h = g.spacing
    center = (3.5 * h, 5.5 * h, 7.5 * h)
    m = ball_mask_bool(g, Ball(center, 0.4 * h))
    assert not m.any()


def test_ball_mask_translation_by_one_spacing():
    g = Grid3(16, 2.0)  # spacing 1/8 is exact in binary
    h = g.spacing
    center = (0.513, 0.737, 0.233)
    m0 = ball_mask_bool(g, Ball(center, 0.43))
    m1 = ball_mask_bool(g, Ball((center[0] + h, center[1], center[2]), 0.43))
    assert np.array_equal(np.roll(m0, 1, axis=0), m1)


def _small_series(n=8, nsnap=2, seed=0):
    rng = np.random.default_rng(seed)
    g = Grid3(n, 2.0)
    snaps = []
    for i in range(nsnap):
        vel = VectorField3.from_arrays(g, *(rng.standard_normal((n, n, n)) for _ in range(3)))
        p = ScalarField3(g, rng.standard_normal((n, n, n)))
        snaps.append(Snapshot(0.1 * i, vel, p))
    return SnapshotSeries(g, tuple(snaps))


def test_nsf1_round_trip_bit_exact(tmp_path):
    series = _small_series()
    path = tmp_path / "series.nsf"
    save_series(series, path)
    back = load_series(path)
    assert back.grid == series.grid
    assert np.array_equal(back.times, series.times)
    for s0, s1 in zip(series.snapshots, back.snapshots):
        for c0, c1 in zip(s0.velocity.components, s1.velocity.components):
            assert np.array_equal(c0.values, c1.values)
        assert np.array_equal(s0.pressure.values, s1.pressure.values)


def test_nsf1_file_size_formula(tmp_path):
    n, nsnap = 16, 2
    g = Grid3(n, 1.0)
    series = zero_series(g, [0.0, 0.1])
    path = tmp_path / "two.nsf"
    save_series(series, path)
    assert path.stat().st_size == 32 + nsnap * 8 + nsnap * 4 * n**3 * 8


def test_nsf1_zero_snapshots_rejected(tmp_path):
    series = _small_series(nsnap=1)
    path = tmp_path / "one.nsf"
    save_series(series, path)
    raw = bytearray(path.read_bytes())
    raw[20:24] = (0).to_bytes(4, "little")  # nsnap field
    bad = tmp_path / "zero.nsf"
    bad.write_bytes(raw[:32])
    with pytest.raises(ValidationError):
        load_series(bad)


def test_nsf1_bad_magic_names_field(tmp_path):
    path = tmp_path / "bad.nsf"
    path.write_bytes(b"XXXX" + b"\x00" * 60)
    with pytest.raises(FormatError) as err:
        load_series(path)
    assert err.value.field == "magic"


def test_nsf1_bad_ncomp_names_field(tmp_path):
    series = _small_series(nsnap=1)
    path = tmp_path / "one.nsf"
    save_series(series, path)
    raw = bytearray(path.read_bytes())
    raw[16:20] = (3).to_bytes(4, "little")
    path.write_bytes(raw)
    with pytest.raises(FormatError) as err:
        load_series(path)
    assert err.value.field == "ncomp"


def test_nsf1_truncated_payload(tmp_path):
    series = _small_series(nsnap=2)
    path = tmp_path / "trunc.nsf"
    save_series(series, path)
    raw = path.read_bytes()
    path.write_bytes(raw[:-17])
    with pytest.raises(FormatError) as err:
        load_series(path)
    assert err.value.field == "payload"


def test_nsf1_nonincreasing_times_rejected(tmp_path):
    series = _small_series(nsnap=2)
    path = tmp_path / "times.nsf"
    save_series(series, path)
    raw = bytearray(path.read_bytes())
    t0 = np.frombuffer(raw[32:40], dtype="<f8")[0]
    raw[40:48] = np.array([t0], dtype="<f8").tobytes()  # duplicate time
    path.write_bytes(raw)
    with pytest.raises(ValidationError):
        load_series(path)


def test_save_series_unwritable_path(tmp_path):
    series = _small_series(nsnap=1)
    with pytest.raises(OSError):
        save_series(series, tmp_path / "nodir" / "x.nsf")


@settings(max_examples=10, deadline=None)
@given(
    nsnap=st.integers(min_value=1, max_value=3),
    seed=st.integers(min_value=0, max_value=2**31),
    scale=st.floats(min_value=1e-8, max_value=1e8),
)
def test_nsf1_round_trip_property(tmp_path_factory, nsnap, seed, scale):
    rng = np.random.default_rng(seed)
    g = Grid3(4, 1.5)
    snaps = []
    t = float(rng.uniform(-10, 10))
    for _ in range(nsnap):
        vel = VectorField3.from_arrays(
            g, *(scale * rng.standard_normal((4, 4, 4)) for _ in range(3)))
        p = ScalarField3(g, scale * rng.standard_normal((4, 4, 4)))
        snaps.append(Snapshot(t, vel, p))
        t += float(rng.uniform(1e-6, 5.0))
    series = SnapshotSeries(g, tuple(snaps))
    path = tmp_path_factory.mktemp("rt") / "prop.nsf"
    save_series(series, path)
    back = load_series(path)
    assert np.array_equal(back.times, series.times)
    for s0, s1 in zip(series.snapshots, back.snapshots):
        for c0, c1 in zip(s0.velocity.components, s1.velocity.components):
            assert np.array_equal(c0.values, c1.values)
        assert np.array_equal(s0.pressure.values, s1.pressure.values)


def test_constant_series_helper_roundtrips(tmp_path):
    g = Grid3(8, 2.0)
    series = constant_series(g, (1.0, -2.0, 0.5), 3.0, [0.0, 0.2])
    path = tmp_path / "c.nsf"
    save_series(series, path)
    back = load_series(path)
    assert back.snapshots[1].velocity.components[1].values[0, 0, 0] == -2.0
