import cv2
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from autous.exceptions import DecodeError, ShapeError, ValidationError
from autous.video_data import (
    ManifestEntry,
    VideoSample,
    frame_indices,
    load_video,
    synth_video,
)


def _npz_entry(tmp_path, frames, name="clip"):
    path = tmp_path / f"{name}.npz"
    np.savez(path, frames=frames)
    return ManifestEntry(
        id=name, media_path=str(path), class_id=0, num_frames=frames.shape[0]
    )


# ---------------------------------------------------------------------------
# Frame index selection
# ---------------------------------------------------------------------------

def test_frame_indices_known_values():
    assert frame_indices(10, 5) == [0, 2, 4, 7, 9]
    assert frame_indices(8, 8) == list(range(8))
    assert frame_indices(3, 6) == [0, 0, 1, 1, 2, 2]
    assert frame_indices(100, 1) == [0]


@given(n=st.integers(min_value=1, max_value=500), t=st.integers(min_value=1, max_value=64))
def test_frame_indices_properties(n, t):
    idx = frame_indices(n, t)
    assert len(idx) == t
    assert idx[0] == 0
    assert idx[-1] == n - 1 if t > 1 else idx[-1] == 0
    assert all(0 <= i < n for i in idx)
    assert all(a <= b for a, b in zip(idx, idx[1:]))


def test_frame_indices_rejects_nonpositive():
    with pytest.raises(ValidationError):
        frame_indices(0, 4)
    with pytest.raises(ValidationError):
        frame_indices(4, 0)


# ---------------------------------------------------------------------------
# Decoding
# ---------------------------------------------------------------------------

def test_npz_roundtrip_exact(tmp_path):
    src = synth_video(1, 3, shape=(6, 16, 16))
    entry = _npz_entry(tmp_path, src.frames)
    out = load_video(entry, (16, 16), 6)
    assert np.array_equal(out.frames, src.frames)
    assert out.class_id == 0 and out.id == "clip"


def test_npz_grayscale_3d_gets_channel_axis(tmp_path):
    frames = np.random.default_rng(0).random((4, 12, 12)).astype(np.float32)
    entry = _npz_entry(tmp_path, frames)
    out = load_video(entry, (12, 12), 4)
    assert out.frames.shape == (4, 12, 12, 1)
    assert np.array_equal(out.frames[..., 0], frames)


def test_uint8_scaled_by_255(tmp_path):
    frames = np.full((2, 8, 8, 1), 255, dtype=np.uint8)
    out = load_video(_npz_entry(tmp_path, frames), (8, 8), 2)
    assert np.allclose(out.frames, 1.0)
    frames = np.full((2, 8, 8, 1), 51, dtype=np.uint8)
    out = load_video(_npz_entry(tmp_path, frames, "b"), (8, 8), 2)
    assert np.allclose(out.frames, 51.0 / 255.0)


def test_uint16_scaled_by_65535(tmp_path):
    frames = np.full((2, 8, 8, 1), 65535, dtype=np.uint16)
    out = load_video(_npz_entry(tmp_path, frames), (8, 8), 2)
    assert np.allclose(out.frames, 1.0)


def test_temporal_subsampling(tmp_path):
    frames = np.zeros((10, 8, 8, 1), dtype=np.float32)
    for t in range(10):
        frames[t] = t / 10.0
    out = load_video(_npz_entry(tmp_path, frames), (8, 8), 5)
    picked = [float(out.frames[i, 0, 0, 0]) for i in range(5)]
    assert picked == pytest.approx([0.0, 0.2, 0.4, 0.7, 0.9])


def test_temporal_oversampling_repeats(tmp_path):
    frames = np.zeros((2, 8, 8, 1), dtype=np.float32)
    frames[1] = 1.0
    out = load_video(_npz_entry(tmp_path, frames), (8, 8), 4)
    vals = [float(out.frames[i, 0, 0, 0]) for i in range(4)]
    assert vals == [0.0, 0.0, 1.0, 1.0]


def test_spatial_resize(tmp_path):
    src = synth_video(0, 0, shape=(4, 32, 32))
    entry = _npz_entry(tmp_path, src.frames)
    out = load_video(entry, (16, 16), 4)
    assert out.frames.shape == (4, 16, 16, 1)
    assert out.frames.min() >= 0.0 and out.frames.max() <= 1.0


def test_resize_constant_frame_is_exact(tmp_path):
    frames = np.full((2, 24, 24, 1), 0.5, dtype=np.float32)
    out = load_video(_npz_entry(tmp_path, frames), (8, 8), 2)
    assert np.allclose(out.frames, 0.5, atol=1e-6)


def test_missing_frames_key(tmp_path):
    path = tmp_path / "bad.npz"
    np.savez(path, pixels=np.zeros((2, 8, 8, 1)))
    entry = ManifestEntry(id="bad", media_path=str(path), class_id=0)
    with pytest.raises(DecodeError):
        load_video(entry, (8, 8), 2)


def test_unreadable_file(tmp_path):
    entry = ManifestEntry(id="x", media_path=str(tmp_path / "nope.npz"), class_id=0)
    with pytest.raises(DecodeError):
        load_video(entry, (8, 8), 2)
    garbled = tmp_path / "garbled.npz"
    garbled.write_bytes(b"not a zip archive")
    entry = ManifestEntry(id="g", media_path=str(garbled), class_id=0)
    with pytest.raises(DecodeError):
        load_video(entry, (8, 8), 2)


def test_bad_npz_shape(tmp_path):
    path = tmp_path / "bad.npz"
    np.savez(path, frames=np.zeros((2, 8, 8, 4)))
    entry = ManifestEntry(id="bad", media_path=str(path), class_id=0)
    with pytest.raises(DecodeError):
        load_video(entry, (8, 8), 2)


def test_avi_roundtrip(tmp_path):
    path = tmp_path / "clip.avi"
    writer = cv2.VideoWriter(
        str(path), cv2.VideoWriter_fourcc(*"MJPG"), 10.0, (32, 32), isColor=False
    )
    if not writer.isOpened():
        pytest.skip("MJPG codec unavailable in this OpenCV build")
    rng = np.random.default_rng(1)
    src = (rng.random((6, 32, 32)) * 255).astype(np.uint8)
    for frame in src:
        writer.write(frame)
    writer.release()

    entry = ManifestEntry(id="avi", media_path=str(path), class_id=2, num_frames=6)
    out = load_video(entry, (32, 32), 6)
    assert out.frames.shape == (6, 32, 32, 1)
    # MJPG is lossy; require agreement to within a few code values.
    assert np.abs(out.frames[..., 0] - src / 255.0).mean() < 0.05


def test_opencv_open_failure(tmp_path):
    path = tmp_path / "broken.avi"
    path.write_bytes(b"\x00" * 64)
    entry = ManifestEntry(id="broken", media_path=str(path), class_id=0)
    with pytest.raises(DecodeError):
        load_video(entry, (8, 8), 2)


# ---------------------------------------------------------------------------
# Sample validation
# ---------------------------------------------------------------------------

def test_sample_shape_contract():
    ok = np.zeros((2, 8, 8, 1), dtype=np.float32)
    VideoSample(frames=ok, class_id=0, id="ok")
    with pytest.raises(ShapeError):
        VideoSample(frames=np.zeros((8, 8, 1), dtype=np.float32), class_id=0, id="x")
    with pytest.raises(ShapeError):
        VideoSample(frames=np.zeros((2, 4, 8, 1), dtype=np.float32), class_id=0, id="x")
    with pytest.raises(ShapeError):
        VideoSample(frames=np.zeros((2, 8, 8, 2), dtype=np.float32), class_id=0, id="x")


def test_sample_value_contract():
    bad = np.zeros((2, 8, 8, 1), dtype=np.float32)
    bad[0, 0, 0, 0] = np.nan
    with pytest.raises(ValidationError):
        VideoSample(frames=bad, class_id=0, id="nan")
    bad = np.full((2, 8, 8, 1), 1.5, dtype=np.float32)
    with pytest.raises(ValidationError):
        VideoSample(frames=bad, class_id=0, id="range")
