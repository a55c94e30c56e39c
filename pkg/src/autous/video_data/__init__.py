from .loader import VideoSample, frame_indices, load_video
from .manifest import (
    DEFAULT_CLASS_NAMES,
    DatasetManifest,
    FilterDecision,
    ManifestEntry,
    evaluate_dataset_acceptance,
    identity_mapping,
    load_manifest,
    merge_categories,
    save_manifest,
    split_train_test,
)
from .synthetic import NUM_CLASSES, build_fixture_corpus, synth_video

__all__ = [
    "DEFAULT_CLASS_NAMES",
    "NUM_CLASSES",
    "DatasetManifest",
    "FilterDecision",
    "ManifestEntry",
    "VideoSample",
    "build_fixture_corpus",
    "evaluate_dataset_acceptance",
    "frame_indices",
    "identity_mapping",
    "load_manifest",
    "load_video",
    "merge_categories",
    "save_manifest",
    "split_train_test",
    "synth_video",
]
