from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.signal import windows

from fmcwhar.dsp import (
    BH_COEFFS,
    MtiState,
    RawFrame,
    RangeMatrix,
    blackman_harris_window,
    doppler_fft,
    fast_time_spectrum,
    mti_update,
    range_fft,
    remove_dc,
    slow_time_peak,
)
from fmcwhar.errors import ConfigError, ShapeError
from fmcwhar.sim import PointTarget, synthesize_frame

finite = st.floats(-1e3, 1e3, allow_nan=False)


# -- DC removal ---------------------------------------------------------------


def test_constant_frame_becomes_zero():
    out = remove_dc(RawFrame(np.full((3, 4, 64), 5.0)))
    assert np.all(out.samples == 0)


def test_integer_period_cosine_unchanged():
    m = np.arange(64)
    x = np.cos(2 * np.pi * 5 * m / 64 + 0.3)[None, None, :].repeat(2, 1)
    out = remove_dc(RawFrame(x))
    np.testing.assert_allclose(out.samples, x, atol=1e-9)


@given(arrays(np.float64, (2, 3, 16), elements=finite))
def test_remove_dc_zero_mean_and_idempotent(x):
    once = remove_dc(RawFrame(x)).samples
    scale = max(np.abs(x).max(), 1.0)
    assert np.all(np.abs(once.mean(axis=-1)) < 1e-12 * scale)
    np.testing.assert_allclose(remove_dc(RawFrame(once)).samples, once, atol=1e-12 * scale)


# -- window -------------------------------------------------------------------


@pytest.mark.parametrize("length", [2, 3, 16, 63, 64, 257])
def test_window_matches_scipy(length):
    np.testing.assert_allclose(blackman_harris_window(length), windows.blackmanharris(length, sym=True), atol=1e-15)


def test_window_l64_endpoint():
    a0, a1, a2, a3 = BH_COEFFS
    w = blackman_harris_window(64)
    assert w[0] == pytest.approx(a0 - a1 + a2 - a3, abs=1e-15)
    assert w[0] == pytest.approx(0.00006, abs=1e-12)


def test_window_peak_is_unity_at_center():
    # evaluated at n = (L-1)/2 the formula is exactly sum(a) = 1; odd L samples that point
    assert sum(BH_COEFFS) == pytest.approx(1.0, abs=1e-12)
    for length in (33, 65, 129):
        assert blackman_harris_window(length)[(length - 1) // 2] == pytest.approx(1.0, abs=1e-12)
    # even L straddles the center; the nearest samples sit within (pi/(L-1))^2-order of 1
    for length in (64, 128, 256, 1024):
        mid = blackman_harris_window(length)[length // 2 - 1]
        assert 1.0 - mid < 2e-3 * (64 / length) ** 2 * 1.01


@given(st.integers(2, 300))
def test_window_symmetric(length):
    w = blackman_harris_window(length)
    np.testing.assert_allclose(w, w[::-1], atol=1e-15)


def test_window_too_short():
    with pytest.raises(ValueError):
        blackman_harris_window(1)


# -- range FFT ----------------------------------------------------------------


def test_zero_frame_zero_range_matrix(window):
    rm = range_fft(RawFrame(np.zeros((3, 8, 64))), window)
    assert rm.bins.shape == (3, 8, 32) and not rm.bins.any()


def test_single_target_bin_10(cfg, geom, chain):
    rm, _ = chain(synthesize_frame(cfg, geom, [PointTarget(1.5)]))
    assert np.all(np.argmax(np.abs(rm.bins), axis=-1) == 10)


def test_two_targets_two_peaks(cfg, geom, chain):
    rm, _ = chain(synthesize_frame(cfg, geom, [PointTarget(1.5), PointTarget(3.0)]))
    profile = np.abs(rm.bins[0, 0])
    peaks = [k for k in range(1, 31) if profile[k] >= profile[k - 1] and profile[k] >= profile[k + 1]]
    top = sorted(sorted(peaks, key=lambda k: -profile[k])[:2])
    assert abs(top[0] - 10) <= 1 and abs(top[1] - 20) <= 1


def test_window_length_mismatch(window):
    with pytest.raises(ShapeError):
        range_fft(RawFrame(np.zeros((1, 2, 32))), window)


@settings(max_examples=30)
@given(arrays(np.float64, (1, 2, 64), elements=finite), arrays(np.float64, (1, 2, 64), elements=finite))
def test_range_fft_linear(x, y):
    w = blackman_harris_window(64)
    a = range_fft(RawFrame(x + y), w).bins
    b = range_fft(RawFrame(x), w).bins + range_fft(RawFrame(y), w).bins
    scale = max(np.abs(a).max(), 1.0)
    assert np.abs(a - b).max() <= 1e-9 * scale


@settings(max_examples=30)
@given(arrays(np.float64, (2, 3, 64), elements=finite))
def test_parseval(x):
    w = blackman_harris_window(64)
    spec = fast_time_spectrum(x, w)
    time_energy = ((x * w) ** 2).sum()
    freq_energy = (np.abs(spec) ** 2).sum() / 64
    assert freq_energy == pytest.approx(time_energy, rel=1e-6, abs=1e-300)


# -- MTI ----------------------------------------------------------------------


def test_mti_first_frame_passes_input():
    r = np.array([0.5, 2.0, 3.0])
    state, filtered = mti_update(MtiState(), r)
    assert np.array_equal(filtered, r)
    assert state.initialized and np.allclose(state.t, 0.1 * r)


def test_mti_state_starts_empty():
    s = MtiState()
    assert s.t is None and not s.initialized


def test_mti_constant_input_k45():
    state = MtiState(alpha=0.1)
    for _ in range(45):
        state, filtered = mti_update(state, np.ones(4))
    assert filtered[0] == pytest.approx(0.9**44, rel=1e-12)
    assert filtered[0] == pytest.approx(0.0097, abs=1e-4)


@given(alpha=st.floats(0.01, 1.0), v=st.floats(0.01, 1e3), k=st.integers(1, 60))
def test_mti_geometric_decay(alpha, v, k):
    state = MtiState(alpha=alpha)
    for _ in range(k):
        state, filtered = mti_update(state, np.full(3, v))
    # exact rational closed form of the float inputs; fl(1 - alpha) alone is off by ~1e-11 near alpha = 1
    expected = float(Fraction(v) * (1 - Fraction(alpha)) ** (k - 1))
    np.testing.assert_allclose(filtered, expected, rtol=1e-12, atol=0)


@pytest.mark.parametrize("alpha", [0.0, -0.1, 1.5])
def test_mti_alpha_range(alpha):
    with pytest.raises(ConfigError):
        MtiState(alpha=alpha)


def test_mti_suppresses_static_keeps_moving(cfg, geom, window):
    static = PointTarget(0.6)
    moving = PointTarget(4.5, radial_velocity_mps=-0.6)
    state = MtiState()
    for f in range(50):
        frame = synthesize_frame(cfg, geom, [static, moving], frame_index=f)
        peak = slow_time_peak(range_fft(remove_dc(frame), window))
        state, filtered = mti_update(state, peak)
    static_bin = round(0.6 / 0.149896)
    moving_bin = int(np.argmax(peak[0, 8:])) + 8
    assert filtered[0, static_bin] <= 0.05 * peak[0, static_bin]
    assert filtered[0, moving_bin] >= 0.5 * peak[0, moving_bin]


# -- Doppler FFT --------------------------------------------------------------


def test_static_target_zero_doppler_removed(cfg, geom, chain):
    rm, rd = chain(synthesize_frame(cfg, geom, [PointTarget(1.5)]))
    before = np.abs(np.fft.fft(rm.bins, axis=-2))[:, 0, 10]
    after = rd.magnitude[:, rd.center_bin, 10]
    assert np.all(after <= 1e-6 * before)


@pytest.mark.parametrize("k", [4, -4, 1, 7])
def test_doppler_bin_from_velocity(cfg, geom, dp, chain, k):
    frame = synthesize_frame(cfg, geom, [PointTarget(2.0, radial_velocity_mps=k * dp.velocity_resolution_mps)])
    _, rd = chain(frame)
    doppler_bin = np.argmax(rd.combined()[:, 13])
    assert doppler_bin == rd.center_bin + k


def test_negated_velocity_mirrors(cfg, geom, dp, chain):
    v = 3 * dp.velocity_resolution_mps
    a = np.argmax(chain(synthesize_frame(cfg, geom, [PointTarget(2.0, v)]))[1].combined()[:, 13])
    b = np.argmax(chain(synthesize_frame(cfg, geom, [PointTarget(2.0, -v)]))[1].combined()[:, 13])
    assert a - 64 == 64 - b


def test_doppler_independent_of_frame_index():
    bins = np.random.default_rng(3).standard_normal((2, 16, 8)) + 0j
    a = doppler_fft(RangeMatrix(bins, frame_index=0))
    b = doppler_fft(RangeMatrix(bins, frame_index=99))
    assert np.array_equal(a.magnitude, b.magnitude)
    assert a.magnitude.shape == (2, 16, 8) and np.all(a.magnitude >= 0)
