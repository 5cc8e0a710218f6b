import numpy as np
import pytest
from hypothesis import given, strategies as st

from lutherfilter.colorimetry import (
    LabColor,
    Tristimulus,
    WhitePoint,
    delta_e,
    tristimulus,
    xyz_to_lab,
    xyz_to_lab_array,
)
from lutherfilter.data_io import Kind, load_spectral_csv
from lutherfilter.datasets import data_path, load_cmfs
from lutherfilter.spectral import CANONICAL_GRID, SensorSet, SpectralSample

lab_coord = st.floats(-150, 150, allow_nan=False)
labs = st.builds(LabColor, st.floats(0, 100), lab_coord, lab_coord)


def test_tristimulus_of_black_is_zero():
    t = tristimulus(SpectralSample.constant(0.0), load_cmfs())
    assert t == Tristimulus(0.0, 0.0, 0.0)


def test_tristimulus_selector_sensors(rng):
    signal = SpectralSample(CANONICAL_GRID, rng.uniform(size=31))
    sel = np.zeros((31, 3))
    sel[[3, 10, 25], [0, 1, 2]] = 10.0  # delta-lambda folded in
    t = tristimulus(signal, SensorSet(CANONICAL_GRID, sel))
    assert t == pytest.approx(10.0 * signal.values[[3, 10, 25]], rel=1e-15)


def test_d65_white_point_by_direct_summation():
    d65 = load_spectral_csv(data_path("d65"), Kind.ILLUMINANT).samples()[0]
    cmfs = load_cmfs()
    t = np.array(tristimulus(d65, cmfs))
    t = 100 * t / t[1]
    # independent oracle: plain python sums over the raw table rows
    rows = [
        line.split(",")
        for line in data_path("cmf").read_text().splitlines()
        if line[:1].isdigit()
    ]
    power = [
        float(line.split(",")[1])
        for line in data_path("d65").read_text().splitlines()
        if line[:1].isdigit()
    ]
    sums = [sum(p * float(r[k]) for p, r in zip(power, rows)) for k in (1, 2, 3)]
    expected = [100 * s / sums[1] for s in sums]
    assert t == pytest.approx(expected, rel=1e-12)
    assert t[1] == pytest.approx(100.0)
    # 10 nm, 400-700 nm truncation of the D65 white (95.047, 100, 108.883)
    assert t[0] == pytest.approx(95.0, abs=1.0)
    assert t[2] == pytest.approx(108.9, abs=2.0)


@given(st.floats(0.1, 200), st.floats(0.1, 200), st.floats(0.1, 200))
def test_white_maps_to_100(xn, yn, zn):
    assert xyz_to_lab(Tristimulus(xn, yn, zn), WhitePoint(xn, yn, zn)) == LabColor(100.0, 0.0, 0.0)


def test_black_maps_to_zero():
    lab = xyz_to_lab(Tristimulus(0, 0, 0), WhitePoint(95.047, 100.0, 108.883))
    assert lab == pytest.approx((0.0, 0.0, 0.0), abs=1e-12)


def test_eighteen_percent_grey():
    white = WhitePoint(95.047, 100.0, 108.883)
    lab = xyz_to_lab(Tristimulus(*(0.18 * np.array(white))), white)
    # scalar oracle: L* = 116 * 0.18^(1/3) - 16, since 0.18 is above the junction
    assert lab.L == pytest.approx(116.0 * 0.18 ** (1.0 / 3.0) - 16.0, abs=1e-12)
    assert lab.L == pytest.approx(49.496, abs=1e-3)
    assert lab.a == pytest.approx(0.0, abs=1e-12)
    assert lab.b == pytest.approx(0.0, abs=1e-12)


def test_dark_ratio_uses_linear_segment():
    white = WhitePoint(1.0, 1.0, 1.0)
    lab = xyz_to_lab(Tristimulus(0.005, 0.005, 0.005), white)
    assert lab.L == pytest.approx(903.2962962962963 * 0.005, rel=1e-12)


def test_transfer_continuous_at_junction():
    eps = (6 / 29) ** 3
    below = xyz_to_lab_array(np.array([eps * (1 - 1e-12)] * 3), [1, 1, 1])
    above = xyz_to_lab_array(np.array([eps * (1 + 1e-12)] * 3), [1, 1, 1])
    assert np.allclose(below, above, atol=1e-8)


def test_negative_xyz_extends_linearly():
    lab = xyz_to_lab(Tristimulus(-0.01, -0.01, -0.01), WhitePoint(1, 1, 1))
    assert lab.L == pytest.approx(-903.2962962962963 * 0.01, rel=1e-12)


def test_white_point_must_be_positive():
    with pytest.raises(ValueError):
        xyz_to_lab(Tristimulus(1, 1, 1), WhitePoint(1, 0, 1))


def test_delta_e_examples():
    assert delta_e(LabColor(50, 0, 0), LabColor(50, 0, 0)) == 0.0
    assert delta_e(LabColor(50, 0, 0), LabColor(53, 4, 0)) == 5.0


def test_delta_e_matches_formula(rng):
    for _ in range(100):
        p, q = rng.normal(scale=40, size=(2, 3))
        expected = ((p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2 + (p[2] - q[2]) ** 2) ** 0.5
        assert delta_e(LabColor(*p), LabColor(*q)) == pytest.approx(expected, rel=1e-14)


@given(labs, labs, labs)
def test_delta_e_metric(a, b, c):
    assert delta_e(a, b) == delta_e(b, a)
    assert delta_e(a, b) >= 0
    assert delta_e(a, c) <= delta_e(a, b) + delta_e(b, c) + 1e-9


@given(st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 2**32 - 1))
def test_tristimulus_linear(a, b, seed):
    r = np.random.default_rng(seed)
    cmfs = load_cmfs()
    c1, c2 = r.uniform(size=(2, 31))
    mix = SpectralSample(CANONICAL_GRID, a * c1 + b * c2)
    lhs = np.array(tristimulus(mix, cmfs))
    rhs = a * np.array(tristimulus(SpectralSample(CANONICAL_GRID, c1), cmfs)) + b * np.array(
        tristimulus(SpectralSample(CANONICAL_GRID, c2), cmfs)
    )
    scale = np.abs(a) * np.abs(tristimulus(SpectralSample(CANONICAL_GRID, c1), cmfs)) + np.abs(
        b
    ) * np.abs(tristimulus(SpectralSample(CANONICAL_GRID, c2), cmfs))
    assert np.all(np.abs(lhs - rhs) <= 1e-12 * np.maximum(scale, 1e-300))
