import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stutterkit.errors import StutterKitError
from stutterkit.evalreport import (
    ConfusionMatrix,
    confusion,
    emit_report,
    load_report,
    metrics,
    percent,
    summary_line,
    uar_from_recalls,
)

# Published per-class validation recalls (percent) for two reference systems
SVM_L5_RECALLS = [9.09, 69.61, 22.64, 23.68, 32.69, 70.27, 0.00, 67.57]
MB_SUM_RECALLS = [12.12, 78.43, 39.62, 26.32, 58.65, 80.00, 0.00, 32.88]


def _cm_from_recalls(recalls, per_class=10000):
    counts = np.zeros((8, 8), dtype=np.int64)
    for c, r in enumerate(recalls):
        correct = int(round(r / 100.0 * per_class))
        counts[c, c] = correct
        counts[c, (c + 1) % 8] = per_class - correct
    return ConfusionMatrix(counts)


def test_confusion_diagonal_for_perfect_predictions():
    ref = [0, 1, 2, 3, 4, 5, 6, 7, 7, 3]
    cm = confusion(ref, ref)
    assert np.trace(cm.counts) == 10
    assert cm.counts.sum() == 10


def test_confusion_single_pair():
    cm = confusion([4], [5])  # Block predicted as Modified
    assert cm.counts[4, 5] == 1
    assert cm.counts.sum() == 1


def test_confusion_counting_oracle():
    rng = np.random.default_rng(0)
    ref = rng.integers(0, 8, size=500)
    pred = rng.integers(0, 8, size=500)
    cm = confusion(ref, pred)
    for r in range(8):
        for p in range(8):
            assert cm.counts[r, p] == int(np.sum((ref == r) & (pred == p)))


def test_confusion_length_mismatch():
    with pytest.raises(StutterKitError):
        confusion([0, 1], [0])
    with pytest.raises(StutterKitError):
        confusion([], [])


def test_metrics_two_class_hand_values():
    counts = np.zeros((8, 8), dtype=int)
    counts[0, 0], counts[0, 1] = 3, 1
    counts[1, 0], counts[1, 1] = 2, 4
    with pytest.warns(UserWarning):
        report = metrics(ConfusionMatrix(counts))
    assert report.per_class_recall[0] == pytest.approx(0.75)
    assert report.per_class_recall[1] == pytest.approx(2 / 3)
    assert report.uar == pytest.approx((0.75 + 2 / 3) / 2, abs=1e-12)
    assert percent(report.uar) == "70.8"
    assert report.total_accuracy == pytest.approx(0.7)
    assert len(report.excluded_classes) == 6


def test_all_correct_metrics():
    cm = confusion(list(range(8)), list(range(8)))
    report = metrics(cm)
    assert report.uar == 1.0
    assert report.total_accuracy == 1.0
    assert report.excluded_classes == ()


def test_published_row_arithmetic():
    assert uar_from_recalls([r / 100 for r in SVM_L5_RECALLS]) * 100 == pytest.approx(
        36.9, abs=0.05
    )
    assert uar_from_recalls([r / 100 for r in MB_SUM_RECALLS]) * 100 == pytest.approx(
        41.0, abs=0.05
    )
    report = metrics(_cm_from_recalls(SVM_L5_RECALLS))
    assert percent(report.uar) == "36.9"


def test_uar_invariant_to_class_duplication():
    rng = np.random.default_rng(1)
    ref = rng.integers(0, 8, size=200).tolist()
    pred = rng.integers(0, 8, size=200).tolist()
    base = metrics(confusion(ref, pred)).uar
    dup_ref, dup_pred = list(ref), list(pred)
    for r, p in zip(ref, pred):
        if r == 3:  # duplicate every sample of one class
            dup_ref += [r] * 2
            dup_pred += [p] * 2
    assert metrics(confusion(dup_ref, dup_pred)).uar == pytest.approx(base, abs=1e-12)


def test_total_accuracy_differs_from_uar_generally():
    # unbalanced reference with class-dependent recall
    ref = [0] * 90 + [1] * 10
    pred = [0] * 90 + [0] * 10
    report = metrics(confusion(ref, pred))
    assert report.total_accuracy == pytest.approx(0.9)
    assert report.uar == pytest.approx(0.5)


@settings(max_examples=40)
@given(st.lists(st.integers(0, 7), min_size=1, max_size=60))
def test_self_confusion_uar_is_one(ref):
    assert metrics(confusion(ref, ref)).uar == 1.0


def test_percent_half_up():
    assert percent(0.36944) == "36.9"
    assert percent(0.12345) == "12.3"
    # 0.125 is binary-exact; half-up gives 13, banker's rounding would give 12
    assert percent(0.125, decimals=0) == "13"
    assert percent(1.0) == "100.0"


def test_emit_report_files(tmp_path):
    ref = [0, 1, 2, 3, 4, 5, 6, 7, 7, 4]
    pred = [0, 1, 2, 3, 4, 5, 6, 7, 4, 4]
    cm = confusion(ref, pred)
    report = metrics(cm)
    paths = emit_report(report, cm, str(tmp_path / "out"))
    loaded = load_report(paths["metrics"])
    assert loaded["uar"] == report.uar  # full precision round-trip
    assert loaded["total_accuracy"] == report.total_accuracy
    lines = (tmp_path / "out" / "confusion.csv").read_text().strip().splitlines()
    assert len(lines) == 9
    for c, line in enumerate(lines[1:]):
        row = line.split(",")
        assert sum(map(int, row[1:])) == int(cm.counts[c].sum())
    summary = (tmp_path / "out" / "summary.txt").read_text()
    assert f"UAR {percent(report.uar)}" in summary


def test_summary_line_for_published_row():
    report = metrics(_cm_from_recalls(SVM_L5_RECALLS))
    assert summary_line(report).endswith("UAR 36.9")


def test_metrics_json_bytes_deterministic(tmp_path):
    ref = [0, 1, 2, 3, 4, 5, 6, 7]
    pred = [0, 1, 2, 2, 4, 5, 6, 7]
    cm = confusion(ref, pred)
    report = metrics(cm)
    p1 = emit_report(report, cm, str(tmp_path / "a"))["metrics"]
    p2 = emit_report(report, cm, str(tmp_path / "b"))["metrics"]
    assert open(p1, "rb").read() == open(p2, "rb").read()
