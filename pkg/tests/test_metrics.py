import csv
import json

import numpy as np
import pytest

from fairadapter.embeddings import SynthConfig, split_set, synth_generate
from fairadapter.metrics import (
    PredictionRecord,
    UndefinedMetricError,
    auc_gap,
    auc_rank,
    evaluate_report,
    f_auc,
    f_fpr,
    fpr,
    predict_set,
    write_category_table,
    write_predictions,
    write_report,
)
from fairadapter.nn import init_model
from fairadapter.training import TrainConfig, train
from helpers import pair_count_auc


def rec(category, true_label, score, predicted=None, id_=""):
    if predicted is None:
        predicted = int(score >= 0.5)
    return PredictionRecord(id_ or f"{category}-{true_label}-{score}", category,
                            true_label, score, predicted)


class TestAucRank:
    def test_perfect_separation(self):
        assert auc_rank([0.1, 0.2], [0.8, 0.9]) == 1.0

    def test_all_ties(self):
        assert auc_rank([0.5, 0.5, 0.5], [0.5, 0.5]) == 0.5

    def test_pair_count_example(self):
        assert auc_rank([0.2, 0.6], [0.4, 0.8]) == 0.75

    def test_matches_pair_counting_randomized(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            n_real = int(rng.integers(1, 7))
            n_fake = int(rng.integers(1, 7))
            # coarse grid forces plenty of ties
            real = (rng.integers(0, 6, size=n_real) / 5.0).tolist()
            fake = (rng.integers(0, 6, size=n_fake) / 5.0).tolist()
            assert abs(auc_rank(real, fake) - pair_count_auc(real, fake)) < 1e-12

    def test_complement_for_tie_free_inputs(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            scores = rng.permutation(np.linspace(0.01, 0.99, 9))
            real, fake = scores[:4].tolist(), scores[4:].tolist()
            assert abs(auc_rank(real, fake) + auc_rank(fake, real) - 1.0) < 1e-12

    def test_empty_side_rejected(self):
        with pytest.raises(UndefinedMetricError):
            auc_rank([], [0.5])
        with pytest.raises(UndefinedMetricError):
            auc_rank([0.5], [])


class TestFpr:
    def test_no_false_positives(self):
        records = [rec("a", 0, 0.1), rec("a", 0, 0.2), rec("a", 1, 0.9)]
        assert fpr(records) == 0.0

    def test_half(self):
        records = [rec("a", 0, 0.9), rec("a", 0, 0.2)]
        assert fpr(records) == 0.5

    def test_only_fakes_rejected(self):
        with pytest.raises(UndefinedMetricError):
            fpr([rec("a", 1, 0.9)])


class TestFFpr:
    def test_identical_groups_zero(self):
        records = [rec("a", 0, 0.9), rec("a", 0, 0.1), rec("b", 0, 0.9), rec("b", 0, 0.1)]
        assert f_fpr(records) == 0.0

    def test_hand_case(self):
        # group a: FPR 1/2, group b: FPR 0, overall FPR 1/4
        records = [
            rec("a", 0, 0.9), rec("a", 0, 0.1),
            rec("b", 0, 0.2), rec("b", 0, 0.3),
        ]
        assert abs(f_fpr(records) - 0.5) < 1e-12

    def test_single_group_zero(self):
        records = [rec("a", 0, 0.9), rec("a", 0, 0.1)]
        assert f_fpr(records) == 0.0

    def test_group_without_reals_skipped(self):
        records = [rec("a", 0, 0.9), rec("a", 0, 0.1), rec("b", 1, 0.9)]
        assert f_fpr(records) == 0.0

    def test_permutation_invariance(self):
        rng = np.random.default_rng(3)
        records = [rec(c, int(rng.integers(2)), float(rng.integers(0, 11)) / 10, id_=str(i))
                   for i, c in enumerate(rng.choice(["a", "b", "c"], size=20))]
        if not any(r.true_label == 0 for r in records):
            records.append(rec("a", 0, 0.4))
        base = f_fpr(records)
        for _ in range(5):
            shuffled = list(records)
            rng.shuffle(shuffled)
            assert f_fpr(shuffled) == base


class TestFAuc:
    def test_perfect_groups_zero(self):
        records = [rec("a", 1, 0.9), rec("a", 0, 0.1), rec("b", 1, 0.8), rec("b", 0, 0.2)]
        assert f_auc(records) == 0.0

    def test_gap(self):
        # group a accuracy 0.9 (9 of 10), group b accuracy 0.7 (7 of 10)
        records = [rec("a", 1, 0.9, id_=f"a{i}") for i in range(9)] + [rec("a", 1, 0.1, id_="a9")]
        records += [rec("b", 1, 0.9, id_=f"b{i}") for i in range(7)] + \
                   [rec("b", 1, 0.1, id_=f"b{7 + i}") for i in range(3)]
        assert abs(f_auc(records) - 0.2) < 1e-12

    def test_single_group_zero(self):
        assert f_auc([rec("a", 1, 0.9), rec("a", 0, 0.8)]) == 0.0

    def test_depends_only_on_predictions(self):
        # any score transform that keeps thresholded predictions fixed keeps
        # the accuracy gap fixed
        records = [rec("a", 1, 0.9), rec("a", 0, 0.1), rec("b", 1, 0.6), rec("b", 0, 0.4)]
        squashed = [PredictionRecord(r.id, r.category, r.true_label, r.score**3, r.predicted_label)
                    for r in records]
        assert f_auc(records) == f_auc(squashed)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(8)
        records = [rec(c, int(rng.integers(2)), float(rng.integers(0, 11)) / 10, id_=str(i))
                   for i, c in enumerate(rng.choice(["a", "b", "c"], size=24))]
        base = f_auc(records)
        for _ in range(5):
            shuffled = list(records)
            rng.shuffle(shuffled)
            assert f_auc(shuffled) == base


class TestAucGap:
    def test_two_groups(self):
        records = [rec("a", 0, 0.1), rec("a", 1, 0.9),       # auc 1
                   rec("b", 0, 0.9), rec("b", 1, 0.1)]       # auc 0
        assert auc_gap(records) == 1.0

    def test_one_label_groups_excluded(self):
        records = [rec("a", 0, 0.1), rec("a", 1, 0.9), rec("b", 0, 0.5)]
        assert auc_gap(records) == 0.0
        with pytest.raises(UndefinedMetricError):
            auc_gap([rec("a", 0, 0.5), rec("b", 1, 0.5)])


class TestEvaluateReport:
    def trained_fixture(self):
        eset = synth_generate(SynthConfig(n_categories=3, per_category_real=30,
                                          per_category_fake=30, dim=16, noise_sigma=0.05,
                                          seed=4))
        tr, te = split_set(eset, 0.3, seed=4)
        model, _ = train(tr, TrainConfig(epochs=30, seed=4))
        return model, te

    def test_perfect_separation_limit(self):
        model, te = self.trained_fixture()
        report = evaluate_report(model, te, 0.5)
        for stats in report.per_category.values():
            assert stats.auc == 1.0
        assert report.f_fpr == 0.0
        assert report.f_auc == 0.0
        assert report.mean_category_auc == 1.0

    def test_zeros_model(self):
        eset = synth_generate(SynthConfig(n_categories=2, per_category_real=5,
                                          per_category_fake=5, dim=6, seed=1))
        model = init_model(6, 2, scheme="zeros")
        report = evaluate_report(model, eset, 0.5)
        # every score is exactly 0.5 -> predicted fake everywhere
        assert report.overall_fpr == 1.0
        assert report.pooled_auc == 0.5
        assert report.f_fpr == 0.0
        for stats in report.per_category.values():
            assert stats.fpr == 1.0 and stats.auc == 0.5

    def test_dimension_mismatch(self):
        eset = synth_generate(SynthConfig(n_categories=2, per_category_real=2,
                                          per_category_fake=2, dim=6, seed=1))
        model = init_model(5, 2, seed=0)
        with pytest.raises(ValueError, match="dimension mismatch"):
            evaluate_report(model, eset, 0.5)

    def test_empty_set_rejected(self):
        from fairadapter.embeddings import EmbeddingSet
        model = init_model(4, 2, seed=0)
        with pytest.raises(ValueError, match="empty"):
            evaluate_report(model, EmbeddingSet(4, "x", []), 0.5)

    def test_rates_in_unit_interval(self):
        model, te = self.trained_fixture()
        report = evaluate_report(model, te, 0.5)
        values = [report.mean_category_auc, report.pooled_auc, report.overall_fpr]
        values += [s.accuracy for s in report.per_category.values()]
        assert all(0.0 <= v <= 1.0 for v in values)
        assert report.f_fpr >= 0.0 and report.f_auc >= 0.0
        assert report.f_fpr <= len(report.per_category)


class TestReportFiles:
    def make_report(self, tmp_path):
        eset = synth_generate(SynthConfig(n_categories=2, per_category_real=6,
                                          per_category_fake=6, dim=8, seed=2))
        model = init_model(8, 2, seed=3)
        return evaluate_report(model, eset, 0.5), model, eset

    def test_report_json(self, tmp_path):
        report, _, _ = self.make_report(tmp_path)
        path = tmp_path / "report.json"
        write_report(report, path)
        loaded = json.loads(path.read_text())
        assert loaded["threshold"] == 0.5
        assert set(loaded["per_category"]) == {"cat000", "cat001"}
        assert loaded["percent"]["f_auc"] == 100.0 * loaded["f_auc"]

    def test_category_table(self, tmp_path):
        report, _, _ = self.make_report(tmp_path)
        path = tmp_path / "table.csv"
        write_category_table(report, path)
        rows = list(csv.DictReader(path.open()))
        assert [r["category"] for r in rows] == ["cat000", "cat001"]
        assert all(float(r["accuracy"]) >= 0 for r in rows)

    def test_prediction_dump(self, tmp_path):
        _, model, eset = self.make_report(tmp_path)
        preds = predict_set(model, eset, 0.5)
        path = tmp_path / "preds.csv"
        write_predictions(preds, path)
        rows = list(csv.DictReader(path.open()))
        assert len(rows) == len(eset)
        assert rows[0]["id"] == eset.records[0].id
        for row in rows:
            assert row["predicted_label"] in {"0", "1"}
            assert 0.0 <= float(row["score"]) <= 1.0
