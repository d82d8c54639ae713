import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slowlight.errors import InvalidParameter
from slowlight.profile import (DEFAULT_CARRIER, AbsorptionProfile, FrequencyGrid, HoleSpec,
                               build_background, build_profile, burn_hole, read_profile_csv,
                               sample, write_profile_csv)

FLAT = dict(shape="flat", peak_alpha=2000.0, grid_span=2e9)


def test_carrier_default():
    assert DEFAULT_CARRIER == pytest.approx(494.7e12, rel=1e-4)


def test_grid_contains_center_and_is_uniform():
    g = FrequencyGrid.centered(2e9, 1 << 10)
    assert 0.0 in g.points
    assert g.count == 1024 and g.span == pytest.approx(2e9)
    assert np.allclose(np.diff(g.points), g.step)


@pytest.mark.parametrize("kwargs, field", [
    (dict(span=-1.0, count=8), "grid.span"),
    (dict(span=1e9, count=7), "grid.count"),
    (dict(span=1e13, count=8), "grid.span"),
])
def test_grid_rejects(kwargs, field):
    with pytest.raises(InvalidParameter) as exc:
        FrequencyGrid.centered(**kwargs)
    assert exc.value.field == field


def test_grid_rejects_nonuniform():
    with pytest.raises(InvalidParameter):
        FrequencyGrid(DEFAULT_CARRIER, np.array([0.0, 1.0, 3.0, 4.0]))


def test_flat_and_zero_backgrounds():
    p = build_background(**FLAT)
    assert np.all(p(np.linspace(-5e9, 5e9, 11)) == 2000.0)
    z = build_background("flat", 0.0)
    assert np.all(z(np.linspace(-1e9, 1e9, 7)) == 0.0)


def test_gaussian_half_width_and_interpolation_error():
    p = build_background("gaussian", 2000.0, fwhm=9e9, grid_span=100e9)
    assert float(p(0.0)) == pytest.approx(2000.0)
    assert p(np.array([-4.5e9, 4.5e9])) == pytest.approx([1000.0, 1000.0], rel=1e-12)
    x = np.linspace(-50e9, 50e9, 400001)
    sigma = 9e9 / (2 * math.sqrt(2 * math.log(2)))
    exact = 2000.0 * np.exp(-0.5 * (x / sigma) ** 2)
    assert np.max(np.abs(p(x) - exact)) < 1e-3 * 2000.0


def test_gaussian_needs_fwhm():
    with pytest.raises(InvalidParameter) as exc:
        build_background("gaussian", 2000.0, fwhm=-1.0)
    assert exc.value.field == "background.fwhm"


@pytest.mark.parametrize("kwargs, msg", [
    (dict(center=0, width=-1e6), "hole.width must be positive"),
    (dict(center=0, width=1e6, residual=-1), "hole.residual must be non-negative"),
    (dict(center=0, width=1e6, edge_ramp=6e5), "hole.edge_ramp"),
])
def test_holespec_invariants(kwargs, msg):
    with pytest.raises(InvalidParameter, match=msg):
        HoleSpec(**kwargs)


def test_square_hole_18mhz():
    p = burn_hole(build_background(**FLAT), HoleSpec(0.0, 18e6))
    assert float(p(0.0)) == 0.0
    assert p(np.array([-10e6, 10e6])).tolist() == [2000.0, 2000.0]
    # a square edge is a jump: the two one-sided limits differ
    assert float(p.left_limit(9e6)) == 0.0 and float(p.right_limit(9e6)) == 2000.0


def test_square_hole_1mhz():
    p = burn_hole(build_background("flat", 3750.0), HoleSpec(0.0, 1e6))
    assert float(p(0.0)) == 0.0
    assert p(np.array([-0.6e6, 0.6e6])).tolist() == [3750.0, 3750.0]


def test_ramp_midpoint():
    p = burn_hole(build_background(**FLAT), HoleSpec(0.0, 18e6, residual=100.0, edge_ramp=2e6))
    assert float(p(8e6)) == pytest.approx(0.5 * (100.0 + 2000.0))
    assert float(p(0.0)) == 100.0


def test_fig1b_like_profile_is_transparent_at_center():
    p = build_profile(dict(shape="gaussian", peak_alpha=2000.0, fwhm=9e9, grid_span=100e9),
                      [HoleSpec(0.0, 18e6, edge_ramp=1e6)])
    g = FrequencyGrid.centered(40e6, 64)
    assert sample(p, g)[32] == 0.0


def test_burn_errors():
    bg = build_background(**FLAT)
    with pytest.raises(InvalidParameter, match="outside"):
        burn_hole(bg, HoleSpec(1.5e9, 18e6))
    with pytest.raises(InvalidParameter, match="residual"):
        burn_hole(bg, HoleSpec(0.0, 18e6, residual=2500.0))


def test_reburn_into_existing_zero_region_is_noop():
    once = burn_hole(build_background(**FLAT), HoleSpec(0.0, 18e6))
    assert burn_hole(once, HoleSpec(0.0, 10e6)) == once


def test_profile_csv_round_trip(tmp_path):
    p = build_profile(FLAT, [HoleSpec(0.0, 18e6), HoleSpec(50e6, 4e6, 10.0, 1e6)])
    path = tmp_path / "p.csv"
    write_profile_csv(path, p)
    assert read_profile_csv(path) == p
    assert path.read_text().splitlines()[0] == "detuning_Hz,alpha_per_m"


def test_profile_rejects_negative_and_unsorted():
    with pytest.raises(InvalidParameter):
        AbsorptionProfile([0.0, 1.0], [1.0, -1.0])
    with pytest.raises(InvalidParameter):
        AbsorptionProfile([1.0, 0.0], [1.0, 1.0])


@st.composite
def hole_specs(draw):
    width = draw(st.floats(1e5, 50e6))
    return HoleSpec(draw(st.floats(-400e6, 400e6)), width, draw(st.floats(0, 500)),
                    draw(st.floats(0, 0.5)) * width)


PROBE = np.linspace(-500e6, 500e6, 20001)


@settings(max_examples=60, deadline=None)
@given(hole_specs(), st.sampled_from(["flat", "gaussian"]))
def test_burning_never_adds_absorption(hole, shape):
    bg = build_background(shape, 2000.0, fwhm=2e9 if shape == "gaussian" else None, grid_span=4e9)
    if hole.residual > float(bg(hole.center)):
        return
    burnt = burn_hole(bg, hole)
    assert np.all(burnt(PROBE) <= bg(PROBE) + 1e-9)
    flat = hole.center + np.linspace(-0.5, 0.5, 51) * (hole.width - 2 * hole.edge_ramp) * 0.999
    assert np.allclose(burnt(flat), np.minimum(hole.residual, bg(flat)))
    assert burn_hole(burnt, hole) == burnt


@settings(max_examples=60, deadline=None)
@given(hole_specs(), hole_specs())
def test_disjoint_burns_commute(h1, h2):
    if h1.upper >= h2.lower and h2.upper >= h1.lower:
        return
    bg = build_background(**FLAT)
    a = burn_hole(burn_hole(bg, h1), h2)
    b = burn_hole(burn_hole(bg, h2), h1)
    assert np.allclose(a(PROBE), b(PROBE))
    assert np.allclose(a(PROBE), np.minimum(burn_hole(bg, h1)(PROBE), burn_hole(bg, h2)(PROBE)))


def test_reburning_a_zero_width_bottom_is_idempotent():
    # ramps of half the width leave a single-point bottom read back by interpolation
    p = build_profile({"shape": "flat", "peak_alpha": 2000.0}, [])
    h = HoleSpec(0.0, 1e5, 1.4912797719040327, 5e4)
    once = burn_hole(p, h)
    assert burn_hole(once, h) == once
