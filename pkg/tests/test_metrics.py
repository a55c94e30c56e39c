import numpy as np
import pytest

from autous.exceptions import ValidationError
from autous.train_eval import (
    auc_one_vs_rest,
    confusion_matrix,
    evaluate,
    metrics_from_scores,
    predict_manifest,
)


def brute_force_auc(scores, positive_mask):
    """Literal pair count: P(pos > neg) + 0.5 P(tie)."""
    pos = scores[positive_mask]
    neg = scores[~positive_mask]
    total = 0.0
    for p in pos:
        for n in neg:
            if p > n:
                total += 1.0
            elif p == n:
                total += 0.5
    return total / (len(pos) * len(neg))


def brute_force_metrics(labels, probs, num_classes):
    predictions = probs.argmax(axis=1)
    cm = np.zeros((num_classes, num_classes), dtype=np.int64)
    for y, p in zip(labels, predictions):
        cm[y, p] += 1
    accuracy = float((labels == predictions).mean())
    recalls, precisions = [], []
    for k in range(num_classes):
        support = int((labels == k).sum())
        predicted = int((predictions == k).sum())
        tp = int(((labels == k) & (predictions == k)).sum())
        recalls.append(tp / support if support else 0.0)
        precisions.append(tp / predicted if predicted else 0.0)
    return cm, accuracy, float(np.mean(recalls)), float(np.mean(precisions))


def test_confusion_matrix_small_case():
    cm = confusion_matrix([0, 0, 1, 2], [0, 1, 1, 2], 3)
    expected = np.array([[1, 1, 0], [0, 1, 0], [0, 0, 1]])
    assert np.array_equal(cm, expected)


def test_confusion_matrix_validation():
    with pytest.raises(ValidationError):
        confusion_matrix([0, 1], [0], 2)
    with pytest.raises(ValidationError):
        confusion_matrix([], [], 2)
    with pytest.raises(ValidationError):
        confusion_matrix([0, 2], [0, 1], 2)
    with pytest.raises(ValidationError):
        confusion_matrix([0, 1], [0, -1], 2)


def test_auc_perfect_and_inverted():
    scores = np.array([0.9, 0.8, 0.2, 0.1])
    mask = np.array([True, True, False, False])
    assert auc_one_vs_rest(scores, mask) == 1.0
    assert auc_one_vs_rest(scores, ~mask) == 0.0


def test_auc_all_tied_is_half():
    scores = np.ones(6)
    mask = np.array([True, True, False, False, False, True])
    assert auc_one_vs_rest(scores, mask) == 0.5


def test_auc_known_mixed_case():
    # pos {0.8, 0.4}, neg {0.6, 0.4, 0.2}: pairs > = 1+1+1+0+0.5+1 = 4.5 of 6.
    scores = np.array([0.8, 0.4, 0.6, 0.4, 0.2])
    mask = np.array([True, True, False, False, False])
    assert auc_one_vs_rest(scores, mask) == pytest.approx(4.5 / 6.0, abs=1e-15)


def test_auc_undefined_without_both_sides():
    with pytest.raises(ValidationError):
        auc_one_vs_rest(np.array([0.1, 0.2]), np.array([True, True]))
    with pytest.raises(ValidationError):
        auc_one_vs_rest(np.array([0.1, 0.2]), np.array([False, False]))


def test_auc_against_brute_force_oracle():
    rng = np.random.default_rng(12)
    for trial in range(50):
        n = int(rng.integers(3, 40))
        # Quantized scores so ties occur often.
        scores = rng.integers(0, 6, size=n) / 5.0
        mask = rng.random(n) < 0.4
        if not mask.any() or mask.all():
            continue
        fast = auc_one_vs_rest(scores, mask)
        slow = brute_force_auc(scores, mask)
        assert abs(fast - slow) < 1e-12


def test_metrics_against_brute_force_oracle():
    rng = np.random.default_rng(34)
    checked = 0
    for trial in range(50):
        num_classes = int(rng.integers(2, 6))
        n = int(rng.integers(4, 50))
        labels = rng.integers(0, num_classes, size=n)
        probs = rng.random((n, num_classes))
        probs = probs / probs.sum(axis=1, keepdims=True)

        report = metrics_from_scores(labels, probs, num_classes)
        cm, acc, rec, prec = brute_force_metrics(labels, probs, num_classes)
        assert np.array_equal(report.confusion, cm)
        assert abs(report.accuracy - acc) < 1e-12
        assert abs(report.macro_recall - rec) < 1e-12
        assert abs(report.macro_precision - prec) < 1e-12
        for k in range(num_classes):
            positives = labels == k
            if positives.any() and (~positives).any():
                assert report.per_class_auc[k] == pytest.approx(
                    brute_force_auc(probs[:, k], positives), abs=1e-12
                )
                checked += 1
            else:
                assert report.per_class_auc[k] is None
    assert checked > 50


def test_absent_class_handling():
    labels = np.array([0, 0, 1, 1])
    probs = np.array([
        [0.7, 0.2, 0.1],
        [0.6, 0.3, 0.1],
        [0.2, 0.7, 0.1],
        [0.3, 0.6, 0.1],
    ])
    report = metrics_from_scores(labels, probs, 3)
    assert report.per_class_auc[2] is None
    # Absent class contributes 0 to the macro means.
    assert report.macro_recall == pytest.approx((1.0 + 1.0 + 0.0) / 3.0)
    assert report.defined_auc_mean() == pytest.approx(1.0)


def test_defined_auc_mean_none_when_all_undefined():
    labels = np.array([0, 0])
    probs = np.array([[0.9, 0.1], [0.8, 0.2]])
    report = metrics_from_scores(labels, probs, 2)
    assert report.defined_auc_mean() is None


def test_predict_manifest_and_evaluate(tiny_model, corpus):
    labels, probs = predict_manifest(tiny_model, corpus, "test")
    assert labels.shape == (5,)
    assert probs.shape == (5, 5)
    assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-6)
    report = evaluate(tiny_model, corpus, split="test")
    assert 0.0 <= report.accuracy <= 1.0
    assert report.confusion.sum() == 5


def test_predict_empty_split(tiny_model, corpus):
    with pytest.raises(ValidationError):
        predict_manifest(tiny_model, corpus, "unassigned")


def test_evaluate_accepts_checkpoint(tiny_model, corpus):
    from autous.ctu_net import checkpoint_from_model

    via_model = evaluate(tiny_model, corpus, split="test")
    via_ckpt = evaluate(checkpoint_from_model(tiny_model), corpus, split="test")
    assert via_model.accuracy == via_ckpt.accuracy
    assert np.array_equal(via_model.confusion, via_ckpt.confusion)
