"""Deterministic synthetic ultrasound-like fixtures.

Real clips are not redistributable, so tests and desk-scale training run on
generated clips in which every class is separable along all three signal
families the classifier looks at:

* spatial   - a bright Gaussian blob at a class-specific position,
* temporal  - the blob drifts with a class-specific velocity,
* spectral  - additive sinusoidal stripes at a class-specific frequency.

Generation is a pure function of ``(class_id, seed, shape)``.
"""

from __future__ import annotations

import os

import numpy as np

from ..exceptions import ValidationError
from .loader import VideoSample
from .manifest import DEFAULT_CLASS_NAMES, DatasetManifest, ManifestEntry

NUM_CLASSES = 5

# Per-class generators: blob anchor (fractions of H/W), drift in px/frame,
# stripe frequency in cycles per frame width.
_BLOB_ANCHOR = [(0.25, 0.25), (0.25, 0.75), (0.75, 0.25), (0.75, 0.75), (0.5, 0.5)]
_DRIFT = [(0.0, 1.5), (1.5, 0.0), (0.0, -1.5), (-1.5, 0.0), (1.0, 1.0)]
_STRIPE_CYCLES = [2.0, 4.0, 6.0, 8.0, 10.0]


def synth_video(
    class_id: int, seed: int, shape: tuple[int, int, int] = (8, 32, 32)
) -> VideoSample:
    if not 0 <= class_id < NUM_CLASSES:
        raise ValidationError(f"class_id must be in [0,{NUM_CLASSES}), got {class_id}")
    t, h, w = shape
    if t < 1 or h < 8 or w < 8:
        raise ValidationError(f"shape must satisfy T>=1, H,W>=8, got {shape}")

    rng = np.random.default_rng([class_id, seed, t, h, w])
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)

    cy0 = _BLOB_ANCHOR[class_id][0] * h
    cx0 = _BLOB_ANCHOR[class_id][1] * w
    vy, vx = _DRIFT[class_id]
    sigma = max(h, w) / 10.0
    cycles = _STRIPE_CYCLES[class_id]
    phase = rng.uniform(0.0, 2.0 * np.pi)

    frames = np.empty((t, h, w), dtype=np.float64)
    for ti in range(t):
        cy = (cy0 + vy * ti) % h
        cx = (cx0 + vx * ti) % w
        blob = np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2.0 * sigma**2))
        stripes = 0.5 * (1.0 + np.sin(2.0 * np.pi * cycles * xx / w + phase))
        noise = rng.random((h, w))
        frames[ti] = 0.15 + 0.45 * blob + 0.25 * stripes + 0.12 * noise

    frames = np.clip(frames, 0.0, 1.0).astype(np.float32)[..., None]
    return VideoSample(frames=frames, class_id=class_id, id=f"synth-{class_id}-{seed}")


def build_fixture_corpus(
    root: str,
    per_class: int,
    shape: tuple[int, int, int] = (8, 32, 32),
    seed: int = 0,
    class_names: list[str] | None = None,
) -> DatasetManifest:
    """Materialize ``per_class`` clips per class as npz files plus a manifest."""
    names = class_names or list(DEFAULT_CLASS_NAMES)
    os.makedirs(root, exist_ok=True)
    entries = []
    for class_id in range(len(names)):
        for k in range(per_class):
            clip_seed = seed * 1_000_003 + class_id * 10_000 + k
            sample = synth_video(class_id, clip_seed, shape)
            slug = names[class_id].lower().rstrip(".").replace(" ", "_")
            filename = f"{slug}_{k:04d}.npz"
            path = os.path.join(root, filename)
            np.savez_compressed(path, frames=sample.frames)
            entries.append(
                ManifestEntry(
                    id=f"{slug}_{k:04d}",
                    media_path=os.path.abspath(path),
                    class_id=class_id,
                    source_dataset="synthetic",
                    num_frames=shape[0],
                )
            )
    return DatasetManifest(entries=entries, source_name="synthetic", class_names=names)
