import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import impulse_response
from slowlight.cavity import CavityConfig, FieldTransfer, transfer
from slowlight.errors import InvalidParameter
from slowlight.io import read_columns
from slowlight.kk import DispersionProfile
from slowlight.profile import FrequencyGrid
from slowlight.pulse import (PulseEnvelope, energy_bandwidth, gaussian_energy, gaussian_pulse,
                             propagate, ring_down_metrics, write_pulse_csv)


def measured_fwhm(p):
    i = p.intensity
    above = np.nonzero(i >= 0.5 * i.max())[0]
    return p.times[above[-1]] - p.times[above[0]]


@pytest.mark.parametrize("fwhm, span", [(20e-9, 16e-6), (1e-6, 64e-6)])
def test_gaussian_width_and_peak(fwhm, span):
    p = gaussian_pulse(fwhm, time_span=span, samples=32768)
    assert abs(measured_fwhm(p) - fwhm) <= 2 * p.dt
    assert p.times[np.argmax(p.intensity)] == 0.0


def test_gaussian_energy_closed_form():
    p = gaussian_pulse(20e-9, center=1e-7, time_span=2e-6, samples=8192)
    assert p.energy == pytest.approx(gaussian_energy(20e-9), rel=1e-3)


def test_gaussian_rejects():
    with pytest.raises(InvalidParameter, match="undersampled"):
        gaussian_pulse(20e-9, time_span=16e-6, samples=4096)
    with pytest.raises(InvalidParameter):
        gaussian_pulse(20e-9, time_span=100e-9)
    with pytest.raises(InvalidParameter):
        gaussian_pulse(0.0)


def flat_transfer(value, span=4e9, count=1 << 12):
    g = FrequencyGrid.centered(span, count)
    return FieldTransfer(g, np.full(count, value, dtype=complex))


def test_identity_transfer_round_trip():
    p = gaussian_pulse(20e-9, time_span=4e-6, samples=8192)
    out = propagate(p, flat_transfer(1.0))
    err = np.linalg.norm(out.field - p.field) / np.linalg.norm(p.field)
    assert err < 1e-10


def test_bandwidth_beyond_grid_is_rejected():
    p = gaussian_pulse(20e-9, time_span=4e-6, samples=8192)
    with pytest.raises(InvalidParameter, match="bandwidth"):
        propagate(p, flat_transfer(1.0, span=20e6))


def empty_cavity_echoes(a=None, samples=1 << 14, span=4e-9):
    cfg = CavityConfig() if a is None else CavityConfig(excess_roundtrip=a)
    g = FrequencyGrid.centered(4e12, 1 << 19)
    z = np.zeros(g.count)
    ft = transfer(cfg, z, DispersionProfile(g, z, np.full(g.count, 1.8)))
    p = gaussian_pulse(5e-12, center=-1.8e-9, time_span=span, samples=samples)
    return cfg, p, propagate(p, ft)


def test_empty_cavity_impulse_response():
    cfg, p, out = empty_cavity_echoes()
    rd = ring_down_metrics(out)
    expected_t, expected_i = impulse_response(cfg, 4)
    assert rd.period == pytest.approx(2 * 6e-3 * 1.8 / 299792458.0, rel=1e-3)
    assert rd.period == pytest.approx(72e-12, rel=0.01)
    assert rd.amplitude_ratio == pytest.approx(cfg.round_trip_intensity, rel=1e-3)
    assert np.array(rd.peak_times[:4]) + 1.8e-9 == pytest.approx(expected_t, rel=1e-3)
    assert rd.peak_intensities[0] == pytest.approx(expected_i[0], rel=1e-3)


def test_lossless_cavity_ratio_is_mirror_product():
    # long enough a window that the slowly decaying tail does not wrap around
    cfg, p, out = empty_cavity_echoes(a=1.0, samples=1 << 16, span=16e-9)
    rd = ring_down_metrics(out)
    assert rd.amplitude_ratio == pytest.approx(0.95 * 0.95, rel=1e-3)


def test_causality():
    cfg, p, out = empty_cavity_echoes()
    before = out.times < -1.8e-9 - 30e-12
    assert np.sum(out.intensity[before]) * out.dt < 1e-9 * out.energy


def test_single_peak_is_not_a_ring_down():
    p = gaussian_pulse(20e-9, time_span=4e-6, samples=8192)
    rd = ring_down_metrics(p)
    assert not rd.found and len(rd.peak_times) == 1 and rd.period is None
    zero = PulseEnvelope(p.times, np.zeros_like(p.field))
    assert not ring_down_metrics(zero).found


def test_pulse_csv_normalized(tmp_path):
    p = gaussian_pulse(20e-9, time_span=4e-6, samples=8192).scaled(0.3)
    write_pulse_csv(tmp_path / "p.csv", p, normalize=True)
    cols = read_columns(tmp_path / "p.csv")
    assert list(cols) == ["time_s", "intensity", "re_field", "im_field"]
    assert cols["intensity"].max() == pytest.approx(1.0)


def test_fig3b_round_trip_exceeds_a_microsecond(scenario):
    res = scenario("fig3b")
    assert res.ring_down.found
    assert res.ring_down.period > 1e-6
    ng = res.report.group_index_center
    assert 2 * 6e-3 * ng / 299792458.0 > 1e-6


SMALL_GRID = FrequencyGrid.centered(2e9, 256)
TIMES = gaussian_pulse(20e-9, time_span=1e-6, samples=1024).times


@st.composite
def transfers(draw):
    # random passive transfer through 16 control points
    knots = np.linspace(0, 255, 16)
    mag = np.array(draw(st.lists(st.floats(0, 1), min_size=16, max_size=16)))
    ph = np.array(draw(st.lists(st.floats(-math.pi, math.pi), min_size=16, max_size=16)))
    idx = np.arange(256)
    return FieldTransfer(SMALL_GRID, np.interp(idx, knots, mag) * np.exp(1j * np.interp(idx, knots, ph)))


@settings(max_examples=40, deadline=None)
@given(transfers(), st.floats(-2, 2), st.floats(-2, 2), st.floats(-1e-7, 1e-7))
def test_linearity(ft, a, b, shift):
    x = gaussian_pulse(20e-9, time_span=1e-6, samples=1024)
    y = gaussian_pulse(20e-9, center=shift, time_span=1e-6, samples=1024)
    both = PulseEnvelope(TIMES, a * x.field + b * y.field)
    lhs = propagate(both, ft).field
    rhs = a * propagate(x, ft).field + b * propagate(y, ft).field
    assert np.allclose(lhs, rhs, atol=1e-12 * (1 + np.abs(rhs).max()))


@settings(max_examples=40, deadline=None)
@given(transfers(), st.floats(-1e-7, 1e-7))
def test_passivity(ft, center):
    p = gaussian_pulse(20e-9, center=center, time_span=1e-6, samples=1024)
    assert propagate(p, ft).energy <= p.energy * (1 + 1e-12)


def test_zero_pulse_has_empty_bandwidth():
    p = gaussian_pulse(20e-9, time_span=4e-6, samples=8192).scaled(0.0)
    assert energy_bandwidth(p) == (0.0, 0.0)
