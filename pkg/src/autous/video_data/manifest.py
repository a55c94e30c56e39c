"""Dataset manifests and the curation rules applied to candidate sources.

A manifest is a flat list of clip records plus an ordered class-name table.
On disk it is a line-delimited UTF-8 file (tab-separated fields) with a
``classes.txt`` sidecar so that diffs stay readable and appends stay cheap.
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass, field, replace

import numpy as np

from ..exceptions import ValidationError

SPLITS = ("train", "test", "unassigned")

# Five-category label set used throughout the toolkit.
DEFAULT_CLASS_NAMES = ["Benign", "Malignant", "Gall.", "COVID", "Pneu."]


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    media_path: str
    class_id: int
    split: str = "unassigned"
    source_dataset: str = ""
    num_frames: int = 1

    def __post_init__(self):
        if not self.media_path:
            raise ValidationError(f"entry {self.id!r}: media_path is empty")
        if self.num_frames < 1:
            raise ValidationError(f"entry {self.id!r}: num_frames must be >= 1")
        if self.split not in SPLITS:
            raise ValidationError(f"entry {self.id!r}: bad split {self.split!r}")


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry] = field(default_factory=list)
    source_name: str = ""
    class_names: list[str] = field(default_factory=lambda: list(DEFAULT_CLASS_NAMES))

    def __post_init__(self):
        self.validate()

    def validate(self):
        seen = set()
        for e in self.entries:
            if e.id in seen:
                raise ValidationError(f"duplicate entry id {e.id!r}")
            seen.add(e.id)
            if not 0 <= e.class_id < len(self.class_names):
                raise ValidationError(
                    f"entry {e.id!r}: class_id {e.class_id} outside "
                    f"[0, {len(self.class_names)})"
                )

    def counts_per_class(self) -> dict[int, int]:
        counts = {i: 0 for i in range(len(self.class_names))}
        for e in self.entries:
            counts[e.class_id] += 1
        return counts

    def subset(self, split: str) -> list[ManifestEntry]:
        return [e for e in self.entries if e.split == split]


@dataclass(frozen=True)
class FilterDecision:
    accuracy: float
    num_classes: int
    theta: float
    threshold: float
    accepted: bool


def evaluate_dataset_acceptance(
    accuracy: float, num_classes: int, theta: float = 0.4, log_base: float = math.e
) -> FilterDecision:
    """Screen a candidate source dataset by baseline accuracy vs class count.

    A source passes when ``accuracy >= 1 - theta * log(num_classes)``.  The
    log base defaults to natural log and is exposed because the rule is
    base-sensitive (``filter.log_base`` in configs).
    """
    for name, v in (("accuracy", accuracy), ("theta", theta), ("log_base", log_base)):
        if not math.isfinite(v):
            raise ValidationError(f"{name} must be finite, got {v!r}")
    if not 0.0 <= accuracy <= 1.0:
        raise ValidationError(f"accuracy must be in [0,1], got {accuracy}")
    if num_classes < 1:
        raise ValidationError(f"num_classes must be >= 1, got {num_classes}")
    if theta <= 0:
        raise ValidationError(f"theta must be > 0, got {theta}")
    if log_base <= 0 or log_base == 1.0:
        raise ValidationError(f"log_base must be positive and != 1, got {log_base}")

    threshold = 1.0 - theta * (math.log(num_classes) / math.log(log_base))
    return FilterDecision(
        accuracy=accuracy,
        num_classes=num_classes,
        theta=theta,
        threshold=threshold,
        accepted=accuracy >= threshold,
    )


def merge_categories(
    manifest: DatasetManifest, mapping: dict[int, str]
) -> DatasetManifest:
    """Collapse or rename classes; ``mapping`` sends old class id -> new name.

    Every class id actually present in the manifest must be mapped.  New class
    ids follow first appearance of each target name in old-id order, so an
    identity mapping leaves the manifest unchanged.
    """
    present = sorted({e.class_id for e in manifest.entries})
    missing = [c for c in present if c not in mapping]
    if missing:
        names = ", ".join(
            f"{c} ({manifest.class_names[c]!r})" for c in missing
        )
        raise ValidationError(f"mapping is missing present class(es): {names}")

    new_names: list[str] = []
    for old_id in sorted(mapping):
        target = mapping[old_id]
        if target not in new_names:
            new_names.append(target)
    name_to_id = {n: i for i, n in enumerate(new_names)}

    new_entries = [
        replace(e, class_id=name_to_id[mapping[e.class_id]]) for e in manifest.entries
    ]
    return DatasetManifest(
        entries=new_entries, source_name=manifest.source_name, class_names=new_names
    )


def identity_mapping(manifest: DatasetManifest) -> dict[int, str]:
    return {i: n for i, n in enumerate(manifest.class_names)}


def split_train_test(
    manifest: DatasetManifest, train_fraction: float, seed: int
) -> DatasetManifest:
    """Stratified train/test assignment, deterministic for a fixed seed.

    Each class keeps ``round(train_fraction * n)`` entries for training.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValidationError(
            f"train_fraction must be in (0,1), got {train_fraction}"
        )
    by_class: dict[int, list[ManifestEntry]] = {}
    for e in manifest.entries:
        by_class.setdefault(e.class_id, []).append(e)
    for cid, group in by_class.items():
        if len(group) < 2:
            raise ValidationError(
                f"class {manifest.class_names[cid]!r} has {len(group)} entry; "
                "need >= 2 to stratify"
            )

    rng = np.random.default_rng(seed)
    assignment: dict[str, str] = {}
    for cid in sorted(by_class):
        group = sorted(by_class[cid], key=lambda e: e.id)
        n_train = int(math.floor(train_fraction * len(group) + 0.5))
        order = rng.permutation(len(group))
        for rank, idx in enumerate(order):
            assignment[group[idx].id] = "train" if rank < n_train else "test"

    new_entries = [replace(e, split=assignment[e.id]) for e in manifest.entries]
    return DatasetManifest(
        entries=new_entries,
        source_name=manifest.source_name,
        class_names=list(manifest.class_names),
    )


# ---------------------------------------------------------------------------
# On-disk format: id<TAB>path<TAB>class_id<TAB>split<TAB>source<TAB>frames
# ---------------------------------------------------------------------------

def classes_sidecar_path(manifest_path: str) -> str:
    return os.path.join(os.path.dirname(os.path.abspath(manifest_path)), "classes.txt")


def save_manifest(manifest: DatasetManifest, path: str) -> None:
    """Atomic whole-file replace (write temp, rename) plus classes sidecar."""
    lines = []
    for e in manifest.entries:
        for fld in (e.id, e.media_path, e.split, e.source_dataset):
            if "\t" in fld or "\n" in fld:
                raise ValidationError(
                    f"entry {e.id!r}: field contains tab/newline, not representable"
                )
        lines.append(
            f"{e.id}\t{e.media_path}\t{e.class_id}\t{e.split}\t"
            f"{e.source_dataset}\t{e.num_frames}\n"
        )
    _atomic_write(path, "".join(lines))
    _atomic_write(
        classes_sidecar_path(path), "".join(f"{n}\n" for n in manifest.class_names)
    )


def load_manifest(path: str, source_name: str = "") -> DatasetManifest:
    sidecar = classes_sidecar_path(path)
    if os.path.exists(sidecar):
        with open(sidecar, encoding="utf-8") as f:
            class_names = [line.rstrip("\n") for line in f if line.strip()]
    else:
        class_names = list(DEFAULT_CLASS_NAMES)

    entries = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 6:
                raise ValidationError(
                    f"{path}:{lineno}: expected 6 tab-separated fields, got {len(parts)}"
                )
            eid, media_path, class_id, split, source, frames = parts
            entries.append(
                ManifestEntry(
                    id=eid,
                    media_path=media_path,
                    class_id=int(class_id),
                    split=split,
                    source_dataset=source,
                    num_frames=int(frames),
                )
            )
    return DatasetManifest(
        entries=entries, source_name=source_name, class_names=class_names
    )


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".manifest-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
