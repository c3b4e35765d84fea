import numpy as np
import numpy.testing as npt
import pytest

from exhaust_sentinel._rng import derive_seed, make_rng
from exhaust_sentinel.evaluation import (
    CvReport,
    RocCurve,
    auc,
    repeated_stratified_cv,
    roc,
    tpr_at_fpr,
    write_report_csv,
    write_roc_points_csv,
    write_roc_svg,
    write_summary_csv,
)
from exhaust_sentinel.profiles import TcRecord


def mann_whitney_auc(scores, labels):
    """Pairwise ranking oracle: P(pos > neg) with ties counted 1/2."""
    scores = np.asarray(scores, float)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos) * len(neg))


def brute_force_roc_points(scores, labels):
    """Confusion-matrix sweep over every distinct threshold, plus (0,0)."""
    scores = np.asarray(scores, float)
    labels = np.asarray(labels)
    n_pos = int((labels == 1).sum())
    n_neg = int((labels == 0).sum())
    points = [(0.0, 0.0)]
    for thr in sorted(set(scores.tolist()), reverse=True):
        predicted_pos = scores >= thr
        tp = int(np.sum(predicted_pos & (labels == 1)))
        fp = int(np.sum(predicted_pos & (labels == 0)))
        points.append((fp / n_neg, tp / n_pos))
    return np.array(points)


def random_scores_with_ties(rng, n):
    labels = np.zeros(n, dtype=int)
    labels[: max(1, n // 4)] = 1
    rng.shuffle(labels)
    # Quantized scores force plenty of exact ties, mixed per class.
    scores = np.round(rng.uniform(0, 1, n) * 8) / 8 + 0.25 * labels * rng.integers(0, 2, n)
    return scores, labels


def make_labeled_records(n_normal, n_event, seed=0):
    rng = np.random.default_rng(seed)
    records = []
    for i in range(n_normal + n_event):
        label = "event" if i < n_event else "normal"
        records.append(
            TcRecord(
                timestamp=float(i),
                tc_temps=rng.uniform(990, 1010, 5),
                dwatt=150.0,
                tnh=99.0,
                label=label,
            )
        )
    rng.shuffle(records)
    return records


def constant_model_pipeline(train, test, seed):
    """Deterministic stub: scores depend only on the fold seed and test size."""
    rng = make_rng(seed)
    return rng.uniform(0.0, 1.0, size=len(test))


class TestRoc:
    def test_perfect_separation(self):
        curve = roc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0])
        npt.assert_allclose(
            curve.points, [[0, 0], [0, 0.5], [0, 1], [0.5, 1], [1, 1]]
        )

    def test_all_scores_tied_is_one_diagonal_step(self):
        curve = roc([0.5, 0.5, 0.5, 0.5], [1, 0, 1, 0])
        npt.assert_allclose(curve.points, [[0, 0], [1, 1]])

    def test_eight_sample_hand_case(self):
        scores = [0.9, 0.8, 0.8, 0.6, 0.5, 0.5, 0.5, 0.2]
        labels = [1, 1, 0, 1, 0, 1, 0, 0]
        npt.assert_allclose(
            roc(scores, labels).points,
            brute_force_roc_points(scores, labels),
            atol=1e-15,
        )

    def test_matches_confusion_matrix_sweep(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            scores, labels = random_scores_with_ties(rng, int(rng.integers(4, 60)))
            npt.assert_allclose(
                roc(scores, labels).points,
                brute_force_roc_points(scores, labels),
                atol=1e-12,
            )

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(1)
        scores, labels = random_scores_with_ties(rng, 40)
        base = roc(scores, labels).points
        for transform in (lambda s: 2.0 * s + 1.0, np.exp, np.arctan):
            npt.assert_allclose(roc(transform(scores), labels).points, base,
                                atol=1e-12)

    def test_endpoints_always_present(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            scores, labels = random_scores_with_ties(rng, 30)
            pts = roc(scores, labels).points
            npt.assert_array_equal(pts[0], [0.0, 0.0])
            npt.assert_array_equal(pts[-1], [1.0, 1.0])
            assert np.all(np.diff(pts[:, 0]) >= 0)
            assert np.all(np.diff(pts[:, 1]) >= 0)

    def test_errors(self):
        with pytest.raises(ValueError, match="both classes"):
            roc([0.1, 0.2], [1, 1])
        with pytest.raises(ValueError, match="finite"):
            roc([0.1, np.nan], [1, 0])
        with pytest.raises(ValueError, match="0 or 1"):
            roc([0.1, 0.2], [1, 2])
        with pytest.raises(ValueError, match="equal length"):
            roc([0.1, 0.2, 0.3], [1, 0])


class TestAuc:
    def test_perfect_and_inverted(self):
        assert auc(roc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0])) == 1.0
        assert auc(roc([0.1, 0.2, 0.8, 0.9], [1, 1, 0, 0])) == 0.0

    def test_uninformative_scores(self):
        assert auc(roc([0.5] * 6, [1, 0, 1, 0, 1, 0])) == pytest.approx(0.5)

    def test_equals_mann_whitney_with_ties(self):
        rng = np.random.default_rng(3)
        for _ in range(40):
            scores, labels = random_scores_with_ties(rng, int(rng.integers(4, 80)))
            assert abs(
                auc(roc(scores, labels)) - mann_whitney_auc(scores, labels)
            ) <= 1e-12


class TestTprAtFpr:
    def test_perfect_curve(self):
        curve = roc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0])
        assert tpr_at_fpr(curve, 0.01) == 1.0

    def test_diagonal_curve(self):
        curve = RocCurve(points=np.array([[0.0, 0.0], [1.0, 1.0]]))
        assert tpr_at_fpr(curve, 0.01) == pytest.approx(0.01)

    def test_exact_vertex_takes_top_of_vertical_run(self):
        curve = RocCurve(points=np.array(
            [[0.0, 0.0], [0.0, 0.6], [0.01, 0.7], [0.01, 0.8], [1.0, 1.0]]
        ))
        assert tpr_at_fpr(curve, 0.0) == pytest.approx(0.6)
        assert tpr_at_fpr(curve, 0.01) == pytest.approx(0.8)

    def test_interpolates_between_vertices(self):
        curve = RocCurve(points=np.array([[0.0, 0.0], [0.02, 0.5], [1.0, 1.0]]))
        assert tpr_at_fpr(curve, 0.01) == pytest.approx(0.25)
        assert tpr_at_fpr(curve, 0.51) == pytest.approx(0.75)

    def test_target_one_returns_curve_end(self):
        curve = RocCurve(points=np.array([[0.0, 0.0], [1.0, 1.0]]))
        assert tpr_at_fpr(curve, 1.0) == 1.0

    def test_target_out_of_range(self):
        curve = RocCurve(points=np.array([[0.0, 0.0], [1.0, 1.0]]))
        with pytest.raises(ValueError, match="fpr_target"):
            tpr_at_fpr(curve, 1.5)


class TestRepeatedStratifiedCv:
    def test_fold_sizes_and_stratification(self):
        records = make_labeled_records(n_normal=510, n_event=10, seed=4)
        seen = []

        def recording_pipeline(train, test, seed):
            seen.append((
                sorted(r.timestamp for r in train),
                sorted(r.timestamp for r in test),
                sum(1 for r in test if r.label == "event"),
            ))
            return np.array([1.0 if r.label == "event" else 0.0 for r in test])

        report = repeated_stratified_cv(records, k=5, runs=2,
                                        pipeline=recording_pipeline,
                                        master_seed=9)
        assert len(report.entries) == 10
        assert len(seen) == 10
        all_ts = sorted(r.timestamp for r in records)
        for run_start in (0, 5):
            fold_tests = [seen[run_start + i][1] for i in range(5)]
            # Folds partition the dataset: disjoint and jointly exhaustive.
            combined = sorted(ts for fold in fold_tests for ts in fold)
            assert combined == all_ts
            for train_ts, test_ts, n_event in (
                seen[run_start + i] for i in range(5)
            ):
                # No record appears in both sides of one split.
                assert not set(train_ts) & set(test_ts)
                assert sorted(train_ts + test_ts) == all_ts
                assert n_event == 2  # 10 events over 5 folds
                assert len(test_ts) == 104  # 520 / 5

    def test_runs_and_folds_numbered_from_one(self):
        records = make_labeled_records(n_normal=40, n_event=8, seed=5)
        report = repeated_stratified_cv(records, k=4, runs=3,
                                        pipeline=constant_model_pipeline,
                                        master_seed=1)
        assert [(e.run, e.fold) for e in report.entries] == [
            (run, fold) for run in (1, 2, 3) for fold in (1, 2, 3, 4)
        ]

    def test_deterministic_for_master_seed(self):
        records = make_labeled_records(n_normal=60, n_event=12, seed=6)
        a = repeated_stratified_cv(records, 3, 2, constant_model_pipeline, 17)
        b = repeated_stratified_cv(records, 3, 2, constant_model_pipeline, 17)
        c = repeated_stratified_cv(records, 3, 2, constant_model_pipeline, 18)
        assert [(e.auc, e.tpr_at_1pct_fpr) for e in a.entries] == [
            (e.auc, e.tpr_at_1pct_fpr) for e in b.entries
        ]
        assert [e.auc for e in a.entries] != [e.auc for e in c.entries]

    def test_fold_seeds_derived_from_master(self):
        records = make_labeled_records(n_normal=30, n_event=6, seed=7)
        captured = []

        def capture_pipeline(train, test, seed):
            captured.append(seed)
            return constant_model_pipeline(train, test, seed)

        repeated_stratified_cv(records, 3, 2, capture_pipeline, 23)
        expected = [derive_seed(23, run, fold)
                    for run in (1, 2) for fold in (1, 2, 3)]
        assert captured == expected

    def test_partitions_differ_across_runs(self):
        records = make_labeled_records(n_normal=50, n_event=10, seed=8)
        test_sets = []

        def capture_pipeline(train, test, seed):
            test_sets.append(frozenset(r.timestamp for r in test))
            return constant_model_pipeline(train, test, seed)

        repeated_stratified_cv(records, 5, 2, capture_pipeline, 31)
        assert set(test_sets[:5]) != set(test_sets[5:])

    def test_perfect_pipeline_scores_auc_one(self):
        records = make_labeled_records(n_normal=40, n_event=10, seed=9)

        def oracle_pipeline(train, test, seed):
            return np.array([1.0 if r.label == "event" else 0.0 for r in test])

        report = repeated_stratified_cv(records, 5, 1, oracle_pipeline, 3)
        assert all(e.auc == 1.0 for e in report.entries)
        assert all(e.tpr_at_1pct_fpr == 1.0 for e in report.entries)

    def test_summary_matches_entries(self):
        records = make_labeled_records(n_normal=40, n_event=8, seed=10)
        report = repeated_stratified_cv(records, 4, 2,
                                        constant_model_pipeline, 5)
        s = report.summary()
        aucs = np.array([e.auc for e in report.entries])
        tprs = np.array([e.tpr_at_1pct_fpr for e in report.entries])
        assert s["auc_mean"] == pytest.approx(aucs.mean(), abs=1e-12)
        assert s["auc_std"] == pytest.approx(aucs.std(ddof=0), abs=1e-12)
        assert s["tpr_at_1pct_fpr_mean"] == pytest.approx(tprs.mean(),
                                                          abs=1e-12)
        assert s["tpr_at_1pct_fpr_std"] == pytest.approx(tprs.std(ddof=0),
                                                         abs=1e-12)

    def test_minority_class_smaller_than_k(self):
        records = make_labeled_records(n_normal=40, n_event=3, seed=11)
        with pytest.raises(ValueError, match="need at least k"):
            repeated_stratified_cv(records, 5, 1, constant_model_pipeline, 1)

    def test_unlabeled_records_rejected(self):
        records = make_labeled_records(n_normal=10, n_event=5, seed=12)
        records[3] = TcRecord(timestamp=-1.0, tc_temps=np.full(5, 1000.0),
                              dwatt=150.0, tnh=99.0, label="unlabeled")
        with pytest.raises(ValueError, match="unlabeled"):
            repeated_stratified_cv(records, 2, 1, constant_model_pipeline, 1)

    def test_wrong_score_count_rejected(self):
        records = make_labeled_records(n_normal=20, n_event=4, seed=13)

        def broken_pipeline(train, test, seed):
            return np.zeros(len(test) + 1)

        with pytest.raises(ValueError, match="one score per test record"):
            repeated_stratified_cv(records, 2, 1, broken_pipeline, 1)

    def test_parameter_validation(self):
        records = make_labeled_records(n_normal=10, n_event=4, seed=14)
        with pytest.raises(ValueError, match="k must be"):
            repeated_stratified_cv(records, 1, 1, constant_model_pipeline, 1)
        with pytest.raises(ValueError, match="runs must be"):
            repeated_stratified_cv(records, 2, 0, constant_model_pipeline, 1)


class TestReportWriters:
    @staticmethod
    def tiny_reports():
        records = make_labeled_records(n_normal=30, n_event=6, seed=15)
        return {
            "hand": repeated_stratified_cv(records, 3, 2,
                                           constant_model_pipeline, 7),
            "learned": repeated_stratified_cv(records, 3, 2,
                                              constant_model_pipeline, 8),
        }

    def test_report_csv_layout(self, tmp_path):
        reports = self.tiny_reports()
        path = tmp_path / "report.csv"
        write_report_csv(reports, str(path))
        lines = path.read_text().splitlines()
        assert lines[0] == "run,fold,feature_set,auc,tpr_at_1pct_fpr"
        assert len(lines) == 1 + 2 * 6  # two feature sets, 6 folds each
        # Rows are sorted by (run, fold, feature_set).
        keys = [tuple(line.split(",")[:3]) for line in lines[1:]]
        assert keys == sorted(keys)
        first = lines[1].split(",")
        assert first[2] == "hand"
        float(first[3]), float(first[4])  # numeric columns parse

    def test_summary_csv_layout(self, tmp_path):
        reports = self.tiny_reports()
        path = tmp_path / "summary.csv"
        write_summary_csv(reports, str(path))
        lines = path.read_text().splitlines()
        assert lines[0] == ("feature_set,auc_mean,auc_std,"
                            "tpr_at_1pct_fpr_mean,tpr_at_1pct_fpr_std")
        assert [line.split(",")[0] for line in lines[1:]] == ["hand", "learned"]
        s = reports["hand"].summary()
        assert float(lines[1].split(",")[1]) == s["auc_mean"]

    def test_roc_points_csv_layout(self, tmp_path):
        reports = self.tiny_reports()
        path = tmp_path / "points.csv"
        write_roc_points_csv(reports, str(path))
        lines = path.read_text().splitlines()
        assert lines[0] == "feature_set,run,fold,fpr,tpr"
        expected_rows = sum(
            len(e.curve.points)
            for rep in reports.values()
            for e in rep.entries
        )
        assert len(lines) == 1 + expected_rows

    def test_svg_written(self, tmp_path):
        reports = self.tiny_reports()
        path = tmp_path / "roc.svg"
        write_roc_svg(reports, str(path))
        content = path.read_text()
        assert "<svg" in content
        assert len(content) > 1000
