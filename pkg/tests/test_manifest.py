import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from autous.exceptions import ValidationError
from autous.video_data import (
    DatasetManifest,
    ManifestEntry,
    evaluate_dataset_acceptance,
    identity_mapping,
    load_manifest,
    merge_categories,
    save_manifest,
    split_train_test,
)


def make_manifest(counts, class_names=None):
    names = class_names or ["Benign", "Malignant", "Gall.", "COVID", "Pneu."]
    entries = []
    k = 0
    for cid, n in enumerate(counts):
        for _ in range(n):
            entries.append(
                ManifestEntry(id=f"clip{k:04d}", media_path=f"v{k}.npz", class_id=cid)
            )
            k += 1
    return DatasetManifest(entries=entries, class_names=names)


def test_duplicate_ids_rejected():
    with pytest.raises(ValidationError):
        DatasetManifest(
            entries=[
                ManifestEntry(id="a", media_path="x.npz", class_id=0),
                ManifestEntry(id="a", media_path="y.npz", class_id=1),
            ]
        )


def test_class_id_out_of_range_rejected():
    with pytest.raises(ValidationError):
        DatasetManifest(
            entries=[ManifestEntry(id="a", media_path="x.npz", class_id=5)]
        )


def test_entry_field_validation():
    with pytest.raises(ValidationError):
        ManifestEntry(id="a", media_path="", class_id=0)
    with pytest.raises(ValidationError):
        ManifestEntry(id="a", media_path="x.npz", class_id=0, num_frames=0)
    with pytest.raises(ValidationError):
        ManifestEntry(id="a", media_path="x.npz", class_id=0, split="dev")


# ---------------------------------------------------------------------------
# Source acceptance rule
# ---------------------------------------------------------------------------

def test_acceptance_threshold_five_classes():
    d = evaluate_dataset_acceptance(0.5, 5)
    # Oracle: 1 - 0.4 * ln(5) = 0.35622...
    assert d.threshold == pytest.approx(1.0 - 0.4 * math.log(5.0), abs=1e-12)
    assert d.threshold == pytest.approx(0.3562, abs=1e-4)
    assert d.accepted


def test_acceptance_boundary_is_inclusive():
    threshold = 1.0 - 0.4 * math.log(5.0)
    assert evaluate_dataset_acceptance(threshold, 5).accepted
    assert not evaluate_dataset_acceptance(threshold - 1e-9, 5).accepted


def test_acceptance_binary_and_single_class():
    # C=1: threshold is exactly 1 - theta*ln(1) = 1, only perfect scores pass.
    assert evaluate_dataset_acceptance(1.0, 1).accepted
    assert not evaluate_dataset_acceptance(0.999, 1).accepted
    # C=2: threshold 1 - 0.4*ln 2 = 0.72274...
    d = evaluate_dataset_acceptance(0.73, 2)
    assert d.threshold == pytest.approx(1.0 - 0.4 * math.log(2.0), abs=1e-12)
    assert d.accepted


def test_acceptance_log_base_is_configurable():
    # log2(4) = 2, so the bar drops to 1 - 0.4*2 = 0.2.
    d = evaluate_dataset_acceptance(0.5, 4, log_base=2.0)
    assert d.threshold == pytest.approx(1.0 - 0.4 * 2.0, abs=1e-12)
    assert d.accepted
    assert not evaluate_dataset_acceptance(0.19, 4, log_base=2.0).accepted


def test_acceptance_input_validation():
    with pytest.raises(ValidationError):
        evaluate_dataset_acceptance(1.5, 5)
    with pytest.raises(ValidationError):
        evaluate_dataset_acceptance(-0.1, 5)
    with pytest.raises(ValidationError):
        evaluate_dataset_acceptance(0.5, 0)
    with pytest.raises(ValidationError):
        evaluate_dataset_acceptance(0.5, 5, theta=0.0)
    with pytest.raises(ValidationError):
        evaluate_dataset_acceptance(0.5, 5, log_base=1.0)
    with pytest.raises(ValidationError):
        evaluate_dataset_acceptance(float("nan"), 5)


@given(
    acc=st.floats(min_value=0.0, max_value=1.0),
    delta=st.floats(min_value=0.0, max_value=1.0),
    c=st.integers(min_value=1, max_value=50),
)
def test_acceptance_monotone_in_accuracy(acc, delta, c):
    hi = min(1.0, acc + delta)
    if evaluate_dataset_acceptance(acc, c).accepted:
        assert evaluate_dataset_acceptance(hi, c).accepted


@given(
    acc=st.floats(min_value=0.0, max_value=1.0),
    c=st.integers(min_value=1, max_value=49),
)
def test_acceptance_monotone_in_class_count(acc, c):
    # More classes lower the bar, so acceptance can only switch off -> on.
    if evaluate_dataset_acceptance(acc, c).accepted:
        assert evaluate_dataset_acceptance(acc, c + 1).accepted


# ---------------------------------------------------------------------------
# Category merging
# ---------------------------------------------------------------------------

def test_identity_mapping_is_noop():
    m = make_manifest([2, 3, 1, 1, 2])
    merged = merge_categories(m, identity_mapping(m))
    assert merged.class_names == m.class_names
    assert [e.class_id for e in merged.entries] == [e.class_id for e in m.entries]
    assert [e.id for e in merged.entries] == [e.id for e in m.entries]


def test_merge_collapses_counts():
    m = make_manifest([2, 3, 1, 1, 2])
    mapping = {0: "Lesion", 1: "Lesion", 2: "Gall.", 3: "Lung", 4: "Lung"}
    merged = merge_categories(m, mapping)
    assert merged.class_names == ["Lesion", "Gall.", "Lung"]
    counts = merged.counts_per_class()
    assert counts[0] == 5 and counts[1] == 1 and counts[2] == 3
    assert len(merged.entries) == len(m.entries)


def test_merge_requires_every_present_class():
    m = make_manifest([1, 1, 1, 1, 1])
    with pytest.raises(ValidationError):
        merge_categories(m, {0: "A", 1: "B"})


def test_merge_ignores_absent_classes():
    m = make_manifest([2, 2, 0, 0, 0])
    merged = merge_categories(m, {0: "X", 1: "Y"})
    assert merged.class_names == ["X", "Y"]


@given(
    counts=st.lists(st.integers(min_value=0, max_value=4), min_size=1, max_size=5),
    targets=st.lists(
        st.sampled_from(["A", "B", "C"]), min_size=5, max_size=5
    ),
)
def test_merge_preserves_entry_count_and_partitions(counts, targets):
    counts = counts + [0] * (5 - len(counts))
    m = make_manifest(counts)
    mapping = {i: targets[i] for i in range(5)}
    merged = merge_categories(m, mapping)
    assert len(merged.entries) == len(m.entries)
    # Entries mapped to the same target name share a class id and vice versa.
    for a, ea in zip(m.entries, merged.entries):
        assert merged.class_names[ea.class_id] == mapping[a.class_id]


# ---------------------------------------------------------------------------
# Stratified split
# ---------------------------------------------------------------------------

def test_split_rounds_per_class():
    m = make_manifest([6, 6, 6, 6, 6])
    out = split_train_test(m, 0.8, seed=7)
    for cid in range(5):
        group = [e for e in out.entries if e.class_id == cid]
        n_train = sum(1 for e in group if e.split == "train")
        assert n_train == round(0.8 * 6) == 5
        assert all(e.split in ("train", "test") for e in group)


def test_split_half_up_rounding():
    # 0.5 * 5 = 2.5 rounds half-up to 3 per class.
    m = make_manifest([5, 5, 0, 0, 0])
    out = split_train_test(m, 0.5, seed=0)
    for cid in (0, 1):
        n_train = sum(
            1 for e in out.entries if e.class_id == cid and e.split == "train"
        )
        assert n_train == 3


def test_split_deterministic_and_seed_sensitive():
    m = make_manifest([6, 6, 6, 6, 6])
    a = split_train_test(m, 0.8, seed=7)
    b = split_train_test(m, 0.8, seed=7)
    assert [e.split for e in a.entries] == [e.split for e in b.entries]
    seen = {
        tuple(e.split for e in split_train_test(m, 0.8, seed=s).entries)
        for s in range(8)
    }
    assert len(seen) > 1


def test_split_rejects_degenerate_inputs():
    m = make_manifest([6, 6, 6, 6, 6])
    with pytest.raises(ValidationError):
        split_train_test(m, 0.0, seed=0)
    with pytest.raises(ValidationError):
        split_train_test(m, 1.0, seed=0)
    singleton = make_manifest([1, 2, 2, 2, 2])
    with pytest.raises(ValidationError):
        split_train_test(singleton, 0.8, seed=0)


@given(
    counts=st.lists(st.integers(min_value=2, max_value=9), min_size=2, max_size=5),
    frac=st.floats(min_value=0.05, max_value=0.95),
    seed=st.integers(min_value=0, max_value=1000),
)
def test_split_is_stratified(counts, frac, seed):
    counts = counts + [2] * (5 - len(counts))
    m = make_manifest(counts)
    out = split_train_test(m, frac, seed=seed)
    for cid, n in enumerate(counts):
        group = [e for e in out.entries if e.class_id == cid]
        n_train = sum(1 for e in group if e.split == "train")
        assert n_train == int(math.floor(frac * n + 0.5))


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def test_manifest_roundtrip(tmp_path):
    m = make_manifest([2, 2, 2, 2, 2])
    m = split_train_test(m, 0.5, seed=3)
    path = tmp_path / "manifest.tsv"
    save_manifest(m, str(path))
    back = load_manifest(str(path))
    assert back.class_names == m.class_names
    assert back.entries == m.entries


def test_manifest_rejects_tab_in_field(tmp_path):
    m = DatasetManifest(
        entries=[ManifestEntry(id="a\tb", media_path="x.npz", class_id=0)]
    )
    with pytest.raises(ValidationError):
        save_manifest(m, str(tmp_path / "m.tsv"))


def test_manifest_bad_field_count(tmp_path):
    path = tmp_path / "m.tsv"
    path.write_text("one\ttwo\tthree\n")
    with pytest.raises(ValidationError):
        load_manifest(str(path))
