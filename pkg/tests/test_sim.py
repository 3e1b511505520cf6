import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fmcwhar.archetypes import DatasetScript, activity_intervals, load_bundled
from fmcwhar.dsp import range_fft, remove_dc
from fmcwhar.errors import ConfigError, SimulationError
from fmcwhar.sim import (
    Interval,
    PointTarget,
    SceneScript,
    load_scene_script,
    noise_std_for_snr,
    synthesize_frame,
    synthesize_recording,
)

targets = st.builds(
    PointTarget,
    range_m=st.floats(0.2, 4.5),
    radial_velocity_mps=st.floats(-3, 3),
    azimuth_deg=st.floats(-60, 60),
    elevation_deg=st.floats(-60, 60),
    amplitude=st.floats(0.1, 10),
)


def test_empty_scene_is_zero(cfg, geom):
    f = synthesize_frame(cfg, geom, [])
    assert f.samples.shape == cfg.shape and not f.samples.any()


def test_beat_frequency_matches_formula(cfg, geom, dp):
    # single channel, chirp 0, no angle: samples are cos(2 pi f_b t + 4 pi R / lambda)
    r = 2.0
    f = synthesize_frame(cfg, geom, [PointTarget(r)])
    t = np.arange(cfg.samples_per_chirp) / cfg.adc_rate_sps
    fb = 2 * dp.bandwidth_hz * r / (299_792_458.0 * cfg.chirp_duration_s)
    expected = np.cos(2 * np.pi * fb * t + 4 * np.pi * r / dp.wavelength_m)
    np.testing.assert_allclose(f.samples[2, 0], expected, atol=1e-9)


def test_spatial_phase_on_displaced_elements(cfg, geom, dp):
    az, el, r = 20.0, -10.0, 2.0
    f = synthesize_frame(cfg, geom, [PointTarget(r, azimuth_deg=az, elevation_deg=el)])
    t = np.arange(cfg.samples_per_chirp) / cfg.adc_rate_sps
    fb = 2 * dp.bandwidth_hz * r / (299_792_458.0 * cfg.chirp_duration_s)
    base = 2 * np.pi * fb * t + 4 * np.pi * r / dp.wavelength_m
    # RX1 (index 0) is displaced horizontally, RX2 (index 1) vertically, RX3 is the reference
    np.testing.assert_allclose(f.samples[0, 0], np.cos(base + np.pi * np.sin(np.radians(az))), atol=1e-9)
    np.testing.assert_allclose(f.samples[1, 0], np.cos(base + np.pi * np.sin(np.radians(el))), atol=1e-9)
    np.testing.assert_allclose(f.samples[2, 0], np.cos(base), atol=1e-9)


def test_target_beyond_max_range(cfg, geom):
    with pytest.raises(SimulationError, match="max range"):
        synthesize_frame(cfg, geom, [PointTarget(5.0)])


def test_negative_noise(cfg, geom):
    with pytest.raises(SimulationError):
        synthesize_frame(cfg, geom, [], noise_std=-1)


def test_bad_target_fields():
    with pytest.raises(SimulationError):
        PointTarget(-1.0)
    with pytest.raises(SimulationError):
        PointTarget(1.0, amplitude=0)
    with pytest.raises(SimulationError):
        PointTarget(1.0, azimuth_deg=91)


def test_noise_deterministic_and_seed_dependent(cfg, geom):
    a = synthesize_frame(cfg, geom, [PointTarget(1)], 3, 0.1, 7).samples
    b = synthesize_frame(cfg, geom, [PointTarget(1)], 3, 0.1, 7).samples
    c = synthesize_frame(cfg, geom, [PointTarget(1)], 3, 0.1, 8).samples
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_noise_std_for_snr():
    assert noise_std_for_snr(1.0, 0) == pytest.approx(1 / np.sqrt(2))
    assert noise_std_for_snr(2.0, 20) == pytest.approx(2 / np.sqrt(2) / 10)


@settings(max_examples=25, deadline=None)
@given(st.lists(targets, min_size=1, max_size=3), st.lists(targets, min_size=1, max_size=3))
def test_superposition(cfg, geom, t1, t2):
    both = synthesize_frame(cfg, geom, t1 + t2).samples
    parts = synthesize_frame(cfg, geom, t1).samples + synthesize_frame(cfg, geom, t2).samples
    assert np.abs(both - parts).max() <= 1e-9 * max(np.abs(both).max(), 1.0)


@settings(max_examples=25, deadline=None)
@given(targets)
def test_amplitude_scales_peak(cfg, geom, window, t):
    def peak(tgt):
        return np.abs(range_fft(remove_dc(synthesize_frame(cfg, geom, [tgt])), window).bins).max()

    doubled = PointTarget(t.range_m, t.radial_velocity_mps, t.azimuth_deg, t.elevation_deg, 2 * t.amplitude)
    assert peak(doubled) == pytest.approx(2 * peak(t), rel=1e-6)


# -- recordings ---------------------------------------------------------------


def test_empty_room_recording(cfg, geom):
    rec = synthesize_recording(cfg, geom, SceneScript((Interval(0, 10, "A6"),)))
    assert len(rec.frames) == 10 and rec.labels == ["A6"] * 10
    assert all(not f.samples.any() for f in rec.frames)


def test_walking_kinematics(cfg, geom):
    # 1 m/s toward the radar from 3 m; range after 2 s is 1 m
    script = SceneScript((Interval(0, 21, "A1", (PointTarget(3.0, -1.0),)),))
    rec = synthesize_recording(cfg, geom, script)
    assert rec.ranges[0][0] == pytest.approx(3.0)
    assert rec.ranges[20][0] == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff([r[0] for r in rec.ranges]) < 0)


def test_labels_follow_intervals(cfg, geom):
    script = SceneScript((Interval(4, 9, "A2"), Interval(0, 4, "A1")))
    rec = synthesize_recording(cfg, geom, script)
    assert rec.labels == ["A1"] * 4 + ["A2"] * 5
    assert [f.frame_index for f in rec.frames] == list(range(9))


def test_overlap_and_gap_rejected():
    with pytest.raises(SimulationError, match="overlap"):
        SceneScript((Interval(0, 5, "A1"), Interval(3, 8, "A2")))
    with pytest.raises(SimulationError, match="not covered"):
        SceneScript((Interval(0, 5, "A1"), Interval(6, 8, "A2")))


def test_bad_label_rejected():
    with pytest.raises(SimulationError):
        Interval(0, 5, "A9")


def test_recording_deterministic(cfg, geom):
    script = SceneScript((Interval(0, 3, "A2", (PointTarget(2.0),), 0.05),), noise_std=0.1, rng_seed=5)
    a = synthesize_recording(cfg, geom, script)
    b = synthesize_recording(cfg, geom, script)
    assert all(np.array_equal(x.samples, y.samples) for x, y in zip(a.frames, b.frames))


def test_frame_rng_independent_of_order(cfg, geom):
    f5 = synthesize_frame(cfg, geom, [], 5, 0.3, 11).samples
    synthesize_frame(cfg, geom, [], 4, 0.3, 11)
    assert np.array_equal(f5, synthesize_frame(cfg, geom, [], 5, 0.3, 11).samples)


def test_scene_script_json_round_trip(tmp_path):
    script = SceneScript(
        (Interval(0, 3, "A1", (PointTarget(2.0, 1.0, 5.0, -5.0, 2.0),)), Interval(3, 6, "A6")), 0.2, 9
    )
    p = tmp_path / "s.json"
    p.write_text(json.dumps(script.to_dict()))
    assert load_scene_script(p) == script


def test_geometry_must_fit_channels(geom):
    from fmcwhar.config import RadarConfig

    with pytest.raises(ConfigError):
        synthesize_frame(RadarConfig(rx_channels=2), geom, [])


# -- archetypes ---------------------------------------------------------------


@pytest.mark.parametrize("label", ["A1", "A2", "A3", "A4", "A5", "A6", "A7"])
def test_every_archetype_renders(cfg, geom, label):
    ivs = activity_intervals(label, 0, 40, np.random.default_rng(0), cfg)
    rec = synthesize_recording(cfg, geom, SceneScript(tuple(ivs), 0.05, 1))
    assert rec.labels == [label] * 40


def test_bundled_dataset_layout(cfg):
    ds = load_bundled("har4")
    assert isinstance(ds, DatasetScript)
    scenes = ds.scenes(cfg)
    assert len(scenes) == 12 and len({s.subject_id for s in scenes}) == 3
    assert len({s.scene_id for s in scenes}) == 12
    labels = {iv.label for s in scenes for iv in s.script.intervals}
    assert labels == {"A1", "A2", "A4", "A6"}
    assert [s.script for s in ds.scenes(cfg)] == [s.script for s in scenes]
