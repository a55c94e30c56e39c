"""Decoding clips into fixed-shape frame blocks.

Two container families are understood: ``.npz`` fixtures (a ``frames`` array,
grayscale or RGB, any dtype) and anything OpenCV can open (mp4/avi/...).
Frames are sampled at evenly spaced indices, resized bilinearly and scaled
into [0,1] by the container's max code value.
"""

from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np

from ..exceptions import DecodeError, ShapeError, ValidationError
from .manifest import ManifestEntry


@dataclass
class VideoSample:
    frames: np.ndarray  # [T, H, W, Cch] float32 in [0,1]
    class_id: int
    id: str

    def __post_init__(self):
        f = self.frames
        if f.ndim != 4:
            raise ShapeError(f"sample {self.id!r}: frames must be 4-D, got {f.shape}")
        t, h, w, c = f.shape
        if t < 1:
            raise ShapeError(f"sample {self.id!r}: T must be >= 1, got {t}")
        if h < 8 or w < 8:
            raise ShapeError(f"sample {self.id!r}: H and W must be >= 8, got {h}x{w}")
        if c not in (1, 3):
            raise ShapeError(f"sample {self.id!r}: channels must be 1 or 3, got {c}")
        if not np.isfinite(f).all():
            raise ValidationError(f"sample {self.id!r}: non-finite pixel values")
        if f.min() < 0.0 or f.max() > 1.0:
            raise ValidationError(f"sample {self.id!r}: pixel values outside [0,1]")


def frame_indices(num_frames: int, target: int) -> list[int]:
    """Evenly spaced source indices, ``round(i*(n-1)/(T-1))`` for i in 0..T-1."""
    if num_frames < 1 or target < 1:
        raise ValidationError("frame counts must be >= 1")
    if target == 1:
        return [0]
    return [round(i * (num_frames - 1) / (target - 1)) for i in range(target)]


def load_video(
    entry: ManifestEntry, target_hw: tuple[int, int], target_frames: int
) -> VideoSample:
    h, w = target_hw
    if h < 8 or w < 8:
        raise ValidationError(f"target dims must be >= 8, got {h}x{w}")
    if entry.media_path.endswith(".npz"):
        raw = _read_npz(entry.media_path)
    else:
        raw = _read_with_opencv(entry.media_path)
    if raw.shape[0] < 1:
        raise DecodeError(f"{entry.media_path}: no frames decoded")

    raw = _normalize_values(raw)
    idx = frame_indices(raw.shape[0], target_frames)
    picked = raw[idx]

    if picked.shape[1] != h or picked.shape[2] != w:
        resized = np.empty((len(idx), h, w, picked.shape[3]), dtype=np.float32)
        for i, frame in enumerate(picked):
            out = cv2.resize(frame, (w, h), interpolation=cv2.INTER_LINEAR)
            resized[i] = out[..., None] if out.ndim == 2 else out
        picked = resized

    picked = np.clip(picked.astype(np.float32), 0.0, 1.0)
    return VideoSample(frames=picked, class_id=entry.class_id, id=entry.id)


def _read_npz(path: str) -> np.ndarray:
    try:
        with np.load(path) as data:
            if "frames" not in data:
                raise DecodeError(f"{path}: missing 'frames' array")
            raw = np.asarray(data["frames"])
    except (OSError, ValueError) as exc:
        raise DecodeError(f"{path}: cannot read npz ({exc})") from exc
    if raw.ndim == 3:  # [T,H,W] grayscale
        raw = raw[..., None]
    if raw.ndim != 4 or raw.shape[3] not in (1, 3):
        raise DecodeError(f"{path}: frames array has bad shape {raw.shape}")
    return raw


def _read_with_opencv(path: str) -> np.ndarray:
    cap = cv2.VideoCapture(path)
    if not cap.isOpened():
        raise DecodeError(f"{path}: OpenCV cannot open file")
    frames = []
    try:
        while True:
            ok, frame = cap.read()
            if not ok:
                break
            frames.append(cv2.cvtColor(frame, cv2.COLOR_BGR2RGB))
    finally:
        cap.release()
    if not frames:
        raise DecodeError(f"{path}: no frames decoded")
    stacked = np.stack(frames)
    # Codecs hand back 3 identical planes for grayscale sources; collapse them.
    if stacked.shape[3] == 3 and (
        (stacked[..., 0] == stacked[..., 1]).all()
        and (stacked[..., 1] == stacked[..., 2]).all()
    ):
        stacked = stacked[..., :1]
    return stacked


def _normalize_values(raw: np.ndarray) -> np.ndarray:
    if np.issubdtype(raw.dtype, np.integer):
        max_code = float(np.iinfo(raw.dtype).max)
        return raw.astype(np.float32) / max_code
    return raw.astype(np.float32)
