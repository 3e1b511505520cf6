import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fmcwhar.cube import (
    CHANNELS,
    STD_FLOOR,
    Normalizer,
    Segment,
    apply_normalizer,
    build_cube,
    fit_normalizer,
    segment_stream,
)
from fmcwhar.errors import NotFittedError, SegmentationError, ShapeError
from fmcwhar.labels import CODES
from fmcwhar.pipeline import FrameProcessor, ProcessingOptions, process_recording, to_db
from fmcwhar.sim import Interval, PointTarget, SceneScript, synthesize_recording


def cube(frame, label="A1", value=0.0, shape=(4, 3, 5)):
    n, b, a = shape
    return build_cube(np.full((n, b), value), np.full((b, a), value), np.full((b, a), value), frame, label)


def cubes_from_labels(labels):
    return [cube(i, lab) for i, lab in enumerate(labels)]


def reference_scanner(labels):
    """Start frames of uniform non-overlapping 5-windows, written independently of the library."""
    starts = []
    pos = 0
    while len(labels) - pos >= 5:
        if len(set(labels[pos : pos + 5])) == 1:
            starts.append(pos)
        pos += 5
    return starts


# -- build_cube ---------------------------------------------------------------


def test_zero_maps_make_valid_cube():
    c = build_cube(np.zeros((8, 4)), np.zeros((4, 7)), np.zeros((4, 7)), 3, "A6", n_angles=7)
    assert c.frame_index == 3 and c.label == "A6" and not c.rd.any()


def test_cube_keeps_channels_separate():
    c = build_cube(np.ones((8, 4)), 2 * np.ones((4, 7)), 3 * np.ones((4, 7)), 0)
    assert c.rd.shape == (8, 4) and c.ra.mean() == 2 and c.re.mean() == 3


@pytest.mark.parametrize(
    "rd,ra,re,n_angles",
    [
        ((8, 4), (4, 6), (4, 7), None),
        ((8, 4), (5, 7), (5, 7), None),
        ((8, 4), (4, 6), (4, 6), 7),
        ((8,), (4, 6), (4, 6), None),
    ],
)
def test_cube_shape_errors(rd, ra, re, n_angles):
    with pytest.raises(ShapeError):
        build_cube(np.zeros(rd), np.zeros(ra), np.zeros(re), 0, n_angles=n_angles)


def test_cube_rejects_non_finite_and_bad_label():
    with pytest.raises(ShapeError):
        build_cube(np.full((2, 2), np.nan), np.zeros((2, 3)), np.zeros((2, 3)), 0)
    with pytest.raises(ShapeError):
        build_cube(np.zeros((2, 2)), np.zeros((2, 3)), np.zeros((2, 3)), 0, "walk")


def test_walking_rd_peak_moves(cfg, geom):
    script = SceneScript((Interval(0, 11, "A1", (PointTarget(3.5, -1.0),)),))
    rec = synthesize_recording(cfg, geom, script)
    cubes, _ = process_recording(cfg, geom, rec.frames, rec.labels)

    def range_peak(c):
        return np.unravel_index(np.argmax(c.rd), c.rd.shape)[1]

    assert range_peak(cubes[0]) - range_peak(cubes[10]) >= 1


# -- segmentation -------------------------------------------------------------


def test_uniform_five():
    segs = segment_stream(cubes_from_labels(["A2"] * 5), recording="r")
    assert len(segs) == 1 and segs[0].label == "A2" and segs[0].recording == "r" and segs[0].start_frame == 0


def test_mixed_window_dropped():
    segs = segment_stream(cubes_from_labels(["A1"] * 3 + ["A2"] * 7))
    assert [(s.label, s.start_frame) for s in segs] == [("A2", 5)]


def test_remainder_dropped():
    segs = segment_stream(cubes_from_labels(["A1"] * 12))
    assert [s.start_frame for s in segs] == [0, 5]


def test_unlabeled_rejected():
    with pytest.raises(SegmentationError):
        segment_stream([cube(0, None)] + cubes_from_labels(["A1"] * 4))


def test_non_consecutive_window_dropped():
    cubes = [cube(i, "A1") for i in (0, 1, 2, 4, 5)]
    assert segment_stream(cubes) == []


def test_segment_invariants_enforced():
    with pytest.raises(SegmentationError):
        Segment(tuple(cubes_from_labels(["A1"] * 4)), "A1")
    with pytest.raises(SegmentationError):
        Segment(tuple(cubes_from_labels(["A1"] * 4 + ["A2"])), "A1")


@settings(max_examples=200)
@given(st.lists(st.sampled_from(CODES), max_size=60))
def test_segmentation_matches_reference(labels):
    segs = segment_stream(cubes_from_labels(labels))
    assert [s.start_frame for s in segs] == reference_scanner(labels)
    assert len(segs) <= len(labels) // 5
    for s in segs:
        assert all(c.label == s.label for c in s.cubes)


def test_segment_flatten_layout():
    seg = segment_stream([cube(i, "A1", value=i) for i in range(5)])[0]
    v = seg.flatten(("ra",))
    assert v.shape == (5 * 3 * 5,) and v[0] == 0 and v[-1] == 4
    assert seg.flatten().size == 5 * (4 * 3 + 2 * 3 * 5)


# -- normalizer ---------------------------------------------------------------


def seg_with(values, label="A1"):
    return segment_stream([cube(i, label, v) for i, v in enumerate(values)])[0]


def test_constant_zero_gets_floor():
    norm = fit_normalizer([seg_with([0] * 5)])
    assert all(norm.mean[c] == 0 and norm.std[c] == STD_FLOOR for c in CHANNELS)
    out = apply_normalizer(norm, seg_with([0] * 5))
    assert all(not out.stack(c).any() for c in CHANNELS)


def test_hand_computed_stats():
    # one segment of all-1 cubes and one of all-3 cubes: population mean 2, std 1
    norm = fit_normalizer([seg_with([1] * 5), seg_with([3] * 5)])
    assert norm.mean["rd"] == 2 and norm.std["rd"] == 1
    norm = fit_normalizer([seg_with([1, 1, 1, 1, 6])])
    assert norm.mean["ra"] == pytest.approx(2.0) and norm.std["ra"] == pytest.approx(2.0)


def test_constant_channel_normalizes_to_zero():
    norm = fit_normalizer([seg_with([7] * 5)])
    assert not apply_normalizer(norm, seg_with([7] * 5)).stack("re").any()


def test_unfitted():
    with pytest.raises(NotFittedError):
        apply_normalizer(None, seg_with([0] * 5))
    with pytest.raises(ValueError):
        fit_normalizer([])


def random_segment(rng, shift=0.0):
    cubes = [
        build_cube(rng.normal(shift, 3, (4, 3)), rng.normal(-shift, 2, (3, 5)), rng.normal(1, 0.5, (3, 5)), i, "A1")
        for i in range(5)
    ]
    return segment_stream(cubes)[0]


@given(st.integers(0, 2**32 - 1), st.integers(1, 5))
def test_standardization_fixed_point(seed, n):
    rng = np.random.default_rng(seed)
    segs = [random_segment(rng, k) for k in range(n)]
    norm = fit_normalizer(segs)
    refit = fit_normalizer([apply_normalizer(norm, s) for s in segs])
    for c in CHANNELS:
        assert abs(refit.mean[c]) < 1e-9 and abs(refit.std[c] - 1) < 1e-9


def test_normalization_preserves_argmax(rng):
    seg = random_segment(rng)
    out = apply_normalizer(fit_normalizer([seg]), seg)
    for c in CHANNELS:
        for a, b in zip(seg.stack(c), out.stack(c)):
            assert np.argmax(a) == np.argmax(b)


def test_normalizer_array_round_trip(rng):
    norm = fit_normalizer([random_segment(rng)])
    assert Normalizer.from_arrays(norm.to_arrays()) == norm


# -- frame processor ----------------------------------------------------------


def test_to_db_clip():
    p = np.array([1.0, 1e-3, 1e-9, 0.0])
    np.testing.assert_allclose(to_db(p), [0, -30, -90, -120])
    np.testing.assert_allclose(to_db(p, 40.0), [0, -30, -40, -40])


def test_processor_shapes_and_determinism(cfg, geom):
    script = SceneScript((Interval(0, 6, "A2", (PointTarget(2.0, 0.0, 10, -5),), 0.05),), 0.05, 3)
    rec = synthesize_recording(cfg, geom, script)
    a, mti_a = process_recording(cfg, geom, rec.frames, rec.labels)
    b, mti_b = process_recording(cfg, geom, rec.frames, rec.labels)
    assert a[0].rd.shape == (128, 32) and a[0].ra.shape == (32, 121) and mti_a.shape == (6, 3, 32)
    assert all(np.array_equal(x.ra, y.ra) and np.array_equal(x.rd, y.rd) for x, y in zip(a, b))
    assert np.array_equal(mti_a, mti_b)


def test_processor_linear_scale(cfg, geom):
    script = SceneScript((Interval(0, 1, "A2", (PointTarget(2.0),)),))
    rec = synthesize_recording(cfg, geom, script)
    proc = FrameProcessor(cfg, geom, ProcessingOptions(scale="linear"))
    rd, ra, re, _ = proc.maps(rec.frames[0])
    assert np.all(ra > 0) and rd.min() >= 0


def test_processor_rejects_wrong_shape(cfg, geom):
    from fmcwhar.dsp import RawFrame

    with pytest.raises(ShapeError):
        FrameProcessor(cfg, geom).maps(RawFrame(np.zeros((3, 64, 64))))
