import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from transmon_chaos.errors import InvalidParams, NonMonotonicTime, ParseError
from transmon_chaos.pulse import (ChirpedGaussianPulse, FlatPulse,
                                  GaussianFlattopPulse, SampledPulse, ZeroPulse,
                                  load_pulse, save_pulse, synth_test_pulse)


def test_zero_pulse_everywhere_zero():
    p = ZeroPulse()
    for t in (-1.0, 0.0, 13.7, 1e6):
        assert p.evaluate(t) == 0j


def test_flat_pulse_value_and_support():
    p = FlatPulse(50.0, 0.25)
    assert p.evaluate(10.0) == 0.25 + 0j
    assert p.evaluate(-0.1) == 0j
    assert p.evaluate(50.1) == 0j


def test_sampled_linear_interpolation():
    p = SampledPulse([0.0, 1.0], [0.0, 2.0 + 0j])
    assert p.evaluate(0.5) == pytest.approx(1.0 + 0j)
    assert p.evaluate(1.5) == 0j  # outside support


def test_gaussian_flattop_plateau_and_endpoints():
    p = GaussianFlattopPulse(50.0, 0.3, rise=5.0)
    assert abs(p.evaluate(25.0)) == pytest.approx(0.3, abs=1e-15)
    assert p.evaluate(0.0) == 0j
    assert p.evaluate(50.0) == 0j
    # plateau values are bitwise constant (enables step-operator reuse)
    vals = p.evaluate(np.linspace(6.0, 44.0, 101))
    assert np.all(vals == vals[0])


def test_chirped_gaussian_symmetric_modulus():
    p = ChirpedGaussianPulse(40.0, 0.5, chirp_rate=0.02)
    t = np.linspace(0.0, 20.0, 200)
    left = np.abs(p.evaluate(20.0 - t))
    right = np.abs(p.evaluate(20.0 + t))
    # clip to the support overlap
    mask = (20.0 + t <= 40.0) & (20.0 - t >= 0.0)
    assert np.allclose(left[mask], right[mask], atol=1e-12)


def test_synth_test_pulse_dispatch_and_validation():
    assert isinstance(synth_test_pulse("zero", 1.0), ZeroPulse)
    assert isinstance(synth_test_pulse("flat", 50.0, 0.1), FlatPulse)
    assert isinstance(synth_test_pulse("gaussian_flattop", 50.0, 0.3, rise=5.0),
                      GaussianFlattopPulse)
    with pytest.raises(InvalidParams):
        synth_test_pulse("gaussian_flattop", -1.0, 0.3)
    with pytest.raises(InvalidParams):
        synth_test_pulse("squarewave", 1.0, 0.3)


def test_load_pulse_triangle(tmp_path):
    path = tmp_path / "tri.csv"
    path.write_text("0,0,0\n1,1,0\n2,0,0\n")
    p = load_pulse(path)
    assert p.evaluate(1.0) == pytest.approx(1.0 + 0j)
    assert p.evaluate(0.5) == pytest.approx(0.5 + 0j)


def test_load_pulse_header_and_comments(tmp_path):
    path = tmp_path / "hdr.csv"
    path.write_text("# a comment\nt_ns,re_E_ghz,im_E_ghz\n0,0.5,-0.25\n1,0,0\n")
    p = load_pulse(path)
    assert p.evaluate(0.0) == pytest.approx(0.5 - 0.25j)


def test_load_pulse_empty_file_raises(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(ParseError):
        load_pulse(path)


def test_load_pulse_duplicate_time_raises(tmp_path):
    path = tmp_path / "dup.csv"
    path.write_text("0,0,0\n1,1,0\n1,2,0\n")
    with pytest.raises(NonMonotonicTime):
        load_pulse(path)


def test_load_pulse_bad_field_count_has_line_number(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("0,0,0\n1,1\n")
    with pytest.raises(ParseError) as err:
        load_pulse(path)
    assert "line 2" in str(err.value)


def test_save_load_roundtrip_exact(tmp_path):
    rng = np.random.default_rng(3)
    times = np.sort(rng.uniform(0, 50, 40))
    times[0], times[-1] = 0.0, 50.0
    values = rng.standard_normal(40) + 1j * rng.standard_normal(40)
    p = SampledPulse(times, values)
    path = tmp_path / "pulse.csv"
    save_pulse(p, path)
    q = load_pulse(path)
    assert np.array_equal(q.times, p.times)
    assert np.array_equal(q.values, p.values)
    # evaluation agrees exactly at the sample points
    assert np.array_equal(q.evaluate(times), values)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 49.99))
def test_sampled_pulse_piecewise_linear_continuity(t):
    times = np.linspace(0.0, 50.0, 26)
    values = np.cos(times) + 1j * np.sin(0.3 * times)
    p = SampledPulse(times, values)
    eps = 1e-9
    left = p.evaluate(t - eps)
    right = p.evaluate(t + eps)
    assert abs(left - right) < 1e-6


def test_scaled_pulse():
    p = FlatPulse(10.0, 0.2).scaled(1.5)
    assert p.evaluate(5.0) == pytest.approx(0.3 + 0j)


def test_nonmonotonic_constructor():
    with pytest.raises(NonMonotonicTime):
        SampledPulse([0.0, 1.0, 0.5], [0, 0, 0])
