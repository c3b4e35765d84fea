import dataclasses
import json

import numpy as np
import numpy.testing as npt
import pytest

from exhaust_sentinel._rng import derive_seed, make_rng
from exhaust_sentinel.elm import class_weights, fit_elm, hidden_matrix, init_elm
from exhaust_sentinel.pipeline import (
    ModelBundle,
    PipelineConfig,
    RescaleStats,
    fit_unsupervised,
    learned_features,
    load_model,
    make_hand_pipeline,
    make_learned_pipeline,
    preprocess,
    profile_rows,
    read_config_file,
    record_targets,
    save_model,
    score_records,
    train_bundle,
)
from exhaust_sentinel.profiles import TcRecord
from exhaust_sentinel.sdae import SdaeModel
from exhaust_sentinel.simdata import FaultDistribution, SimConfig, gen_dataset

FAST_CONFIG = PipelineConfig(
    sdae_widths=(6, 3), epochs=3, batch_size=16, n_hidden=25,
    folds=2, runs=1, seed=3,
)


def small_dataset(seed=1, n_normal=60, n_fault=12):
    cfg = SimConfig(n_cans=9, n_normal=n_normal, n_fault=n_fault, seed=seed)
    faults = FaultDistribution(depth_range=(14.0, 24.0), width_range=(1.5, 2.5))
    return gen_dataset(cfg, faults)


class TestPipelineConfig:
    def test_reference_defaults(self):
        cfg = PipelineConfig()
        assert cfg.sdae_widths == (30, 12)
        assert cfg.corruption_kind == "masking"
        assert cfg.corruption_rate == 0.2
        assert cfg.learning_rate == 0.02
        assert cfg.momentum == 0.5
        assert cfg.epochs == 200
        assert cfg.n_hidden == 1000
        assert cfg.weighted is True
        assert cfg.folds == 5
        assert cfg.runs == 10
        assert cfg.tnh_min == 95.0
        assert cfg.sdae_scope == "global"

    def test_items_round_trip(self):
        cfg = PipelineConfig(
            tnh_min=90.0, sdae_widths=(8, 4), corruption_kind="gaussian",
            gaussian_sigma=0.3, learning_rate=0.05, epochs=17,
            n_hidden=64, weighted=False, folds=3, runs=2,
            sdae_scope="per-fold", seed=99,
        )
        assert PipelineConfig.from_items(cfg.to_items()) == cfg

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="unknown config key"):
            PipelineConfig.from_items({"dae.turbo": "on"})

    def test_bad_value_names_key(self):
        with pytest.raises(ValueError, match="dae.epochs"):
            PipelineConfig.from_items({"dae.epochs": "many"})
        with pytest.raises(ValueError, match="boolean"):
            PipelineConfig.from_items({"elm.weighted": "maybe"})

    def test_widths_parse(self):
        cfg = PipelineConfig.from_items({"sdae.widths": "30,12"})
        assert cfg.sdae_widths == (30, 12)

    def test_boolean_spellings(self):
        for raw, value in (("true", True), ("1", True), ("on", True),
                           ("false", False), ("0", False), ("off", False)):
            cfg = PipelineConfig.from_items({"elm.weighted": raw})
            assert cfg.weighted is value

    def test_config_hash_is_stable_and_sensitive(self):
        a = PipelineConfig()
        b = PipelineConfig()
        c = dataclasses.replace(a, epochs=201)
        assert a.config_hash() == b.config_hash()
        assert a.config_hash() != c.config_hash()
        assert len(a.config_hash()) == 64
        int(a.config_hash(), 16)  # hex digest

    def test_scope_validation(self):
        with pytest.raises(ValueError, match="sdae_scope"):
            PipelineConfig(sdae_scope="sometimes")
        with pytest.raises(ValueError, match="widths"):
            PipelineConfig(sdae_widths=())

    def test_layer_configs_chain(self):
        configs = PipelineConfig(sdae_widths=(30, 12)).layer_configs(27)
        assert [(c.d_in, c.d_hidden) for c in configs] == [(27, 30), (30, 12)]
        assert all(c.corruption.kind == "masking" for c in configs)
        assert all(c.corruption.rate == 0.2 for c in configs)

    def test_read_config_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(
            "# comment line\n"
            "\n"
            "dae.epochs = 17   # trailing comment\n"
            "elm.n_hidden=40\n"
        )
        items = read_config_file(str(path))
        assert items == {"dae.epochs": "17", "elm.n_hidden": "40"}
        cfg = PipelineConfig.from_items(items)
        assert cfg.epochs == 17
        assert cfg.n_hidden == 40

    def test_read_config_file_reports_line(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("dae.epochs=5\nnot a pair\n")
        with pytest.raises(ValueError, match=":2:"):
            read_config_file(str(path))


class TestRescaleStats:
    def test_fit_and_transform(self):
        rows = np.array([[0.0, 5.0], [10.0, 5.0]])
        stats = RescaleStats.fit(rows)
        npt.assert_array_equal(stats.channel_min, [0.0, 5.0])
        npt.assert_array_equal(stats.channel_max, [10.0, 5.0])
        out = stats.transform(np.array([[5.0, 5.0]]))
        npt.assert_array_equal(out, [[0.5, 0.5]])  # zero-span channel -> 0.5

    def test_training_rows_map_into_unit_box(self):
        rng = np.random.default_rng(0)
        rows = rng.normal(size=(40, 6)) * 10
        stats = RescaleStats.fit(rows)
        out = stats.transform(rows)
        assert out.min() == 0.0 and out.max() == 1.0
        npt.assert_array_equal(out.min(axis=0), np.zeros(6))
        npt.assert_array_equal(out.max(axis=0), np.ones(6))

    def test_out_of_range_values_are_clamped(self):
        stats = RescaleStats(channel_min=np.array([0.0]),
                             channel_max=np.array([10.0]))
        out = stats.transform(np.array([[-5.0], [20.0]]))
        npt.assert_array_equal(out, [[0.0], [1.0]])

    def test_validation(self):
        with pytest.raises(ValueError, match="shapes"):
            RescaleStats(channel_min=np.zeros(3), channel_max=np.zeros(4))
        with pytest.raises(ValueError, match="zero rows"):
            RescaleStats.fit(np.empty((0, 5)))


class TestPreprocess:
    def test_training_matrix_in_unit_box(self):
        ds = small_dataset()
        kept, matrix, stats = preprocess(ds.records)
        assert len(kept) == len(ds.records)
        assert matrix.shape == (len(kept), 9)
        assert matrix.min() >= 0.0 and matrix.max() <= 1.0

    def test_filter_applies_cutoff(self):
        ds = small_dataset()
        kept, _, _ = preprocess(ds.records, tnh_min=98.0)
        assert 0 < len(kept) < len(ds.records)
        assert all(r.tnh >= 98.0 for r in kept)

    def test_fitted_stats_are_reused_not_refit(self):
        ds = small_dataset()
        _, _, stats = preprocess(ds.records[:30])
        _, matrix, used = preprocess(ds.records[30:], fitted_stats=stats)
        assert used is stats
        assert matrix.min() >= 0.0 and matrix.max() <= 1.0

    def test_nothing_survives(self):
        ds = small_dataset()
        with pytest.raises(ValueError, match="no records survive"):
            preprocess(ds.records, tnh_min=150.0)

    def test_record_targets(self):
        ds = small_dataset()
        targets = record_targets(ds.records)
        assert targets.sum() == 12
        bad = [TcRecord(timestamp=0.0, tc_temps=np.full(9, 1000.0),
                        dwatt=150.0, tnh=99.0, label="unlabeled")]
        with pytest.raises(ValueError, match="unlabeled"):
            record_targets(bad)


class TestFitUnsupervised:
    def test_architecture_and_determinism(self):
        ds = small_dataset()
        stats_a, sdae_a = fit_unsupervised(ds.records, FAST_CONFIG, seed=5)
        stats_b, sdae_b = fit_unsupervised(ds.records, FAST_CONFIG, seed=5)
        assert sdae_a.widths == (9, 6, 3)
        for la, lb in zip(sdae_a.layers, sdae_b.layers):
            npt.assert_array_equal(la.weights, lb.weights)
        npt.assert_array_equal(stats_a.channel_min, stats_b.channel_min)

    def test_loss_log(self):
        ds = small_dataset()
        log = []
        fit_unsupervised(ds.records, FAST_CONFIG, seed=5, loss_log=log)
        assert len(log) == 2
        assert all(trace.shape == (FAST_CONFIG.epochs,) for trace in log)

    def test_requires_normal_records(self):
        ds = gen_dataset(SimConfig(n_cans=9, n_normal=0, n_fault=10, seed=2))
        with pytest.raises(ValueError, match="no normal-labeled records"):
            fit_unsupervised(ds.records, FAST_CONFIG, seed=5)


class TestTrainBundleAndPersistence:
    def test_bundle_bytes_deterministic(self, tmp_path):
        ds = small_dataset()
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        save_model(train_bundle(ds.records, FAST_CONFIG), str(p1))
        save_model(train_bundle(ds.records, FAST_CONFIG), str(p2))
        assert p1.read_bytes() == p2.read_bytes()

    def test_provenance_fields(self):
        ds = small_dataset()
        bundle = train_bundle(ds.records, FAST_CONFIG)
        assert bundle.provenance["config_hash"] == FAST_CONFIG.config_hash()
        assert bundle.provenance["seed"] == FAST_CONFIG.seed
        assert bundle.provenance["timestamp"] == max(
            r.timestamp for r in ds.records
        )

    def test_round_trip_scores_identically(self, tmp_path):
        ds = small_dataset()
        bundle = train_bundle(ds.records, FAST_CONFIG)
        path = tmp_path / "model.json"
        save_model(bundle, str(path))
        loaded = load_model(str(path))

        fresh = small_dataset(seed=8, n_normal=80, n_fault=20)
        kept_a, scores_a = score_records(bundle, fresh.records)
        kept_b, scores_b = score_records(loaded, fresh.records)
        assert len(kept_a) == len(kept_b) == 100
        npt.assert_array_equal(scores_a, scores_b)  # bit-for-bit
        assert loaded.weighted == bundle.weighted
        assert loaded.tnh_min == bundle.tnh_min
        assert loaded.provenance == bundle.provenance

    def test_scores_lie_in_unit_interval(self):
        ds = small_dataset()
        bundle = train_bundle(ds.records, FAST_CONFIG)
        _, scores = score_records(bundle, ds.records)
        assert scores.min() >= 0.0 and scores.max() <= 1.0

    def test_learned_features_shape_and_bounds(self):
        ds = small_dataset()
        bundle = train_bundle(ds.records, FAST_CONFIG)
        kept, feats = learned_features(bundle, ds.records)
        assert feats.shape == (len(kept), 3)
        assert np.all(feats > 0.0) and np.all(feats < 1.0)

    def test_invalid_json_rejected(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text("this is not json{")
        with pytest.raises(ValueError, match="not a valid model file"):
            load_model(str(path))

    def test_missing_version_rejected(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text("{}")
        with pytest.raises(ValueError, match="no format_version"):
            load_model(str(path))

    def test_version_mismatch_names_both_versions(self, tmp_path):
        ds = small_dataset()
        path = tmp_path / "model.json"
        save_model(train_bundle(ds.records, FAST_CONFIG), str(path))
        doc = json.loads(path.read_text())
        doc["format_version"] = 99
        path.write_text(json.dumps(doc))
        with pytest.raises(ValueError, match="version 99.*version 1"):
            load_model(str(path))

    def test_truncated_document_rejected(self, tmp_path):
        ds = small_dataset()
        path = tmp_path / "model.json"
        save_model(train_bundle(ds.records, FAST_CONFIG), str(path))
        doc = json.loads(path.read_text())
        del doc["elm"]
        path.write_text(json.dumps(doc))
        with pytest.raises(ValueError, match="truncated or malformed"):
            load_model(str(path))

    def test_missing_file_raises_oserror(self, tmp_path):
        with pytest.raises(OSError):
            load_model(str(tmp_path / "absent.json"))


class TestHandPipeline:
    def test_scores_shape_bounds_and_determinism(self):
        ds = small_dataset()
        train, test = ds.records[:50], ds.records[50:]
        pipe = make_hand_pipeline(FAST_CONFIG)
        a = pipe(train, test, 11)
        b = pipe(train, test, 11)
        c = pipe(train, test, 12)
        assert a.shape == (len(test),)
        assert a.min() >= 0.0 and a.max() <= 1.0
        npt.assert_array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_matches_manual_assembly(self):
        from exhaust_sentinel.features_hand import hand_feature_matrix

        ds = small_dataset()
        train, test = ds.records[:50], ds.records[50:]
        scores = make_hand_pipeline(FAST_CONFIG)(train, test, 21)

        train_f = hand_feature_matrix(train)
        test_f = hand_feature_matrix(test)
        stats = RescaleStats.fit(train_f)
        targets = record_targets(train)
        model = init_elm(12, FAST_CONFIG.n_hidden,
                         make_rng(derive_seed(21, 2)), FAST_CONFIG.ridge)
        fit_elm(model, stats.transform(train_f), targets,
                class_weights(targets))
        expected = np.clip(
            hidden_matrix(stats.transform(test_f), model) @ model.beta,
            0.0, 1.0,
        )
        npt.assert_allclose(scores, expected, atol=1e-12)


class TestLearnedPipeline:
    def test_global_scope_uses_fixed_representation(self):
        ds = small_dataset()
        train, test = ds.records[:50], ds.records[50:]
        stats = RescaleStats.fit(profile_rows(train))
        # An empty encoder stack makes the learned features equal the scaled
        # profiles, so the whole chain can be checked against a hand-built
        # ELM fit.
        pipe = make_learned_pipeline(FAST_CONFIG,
                                     unsupervised=(stats, SdaeModel(layers=[])))
        scores = pipe(train, test, 13)

        targets = record_targets(train)
        model = init_elm(9, FAST_CONFIG.n_hidden,
                         make_rng(derive_seed(13, 2)), FAST_CONFIG.ridge)
        fit_elm(model, stats.transform(profile_rows(train)), targets,
                class_weights(targets))
        expected = np.clip(
            hidden_matrix(stats.transform(profile_rows(test)), model)
            @ model.beta,
            0.0, 1.0,
        )
        npt.assert_allclose(scores, expected, atol=1e-12)

    def test_per_fold_scope_refits(self):
        ds = small_dataset()
        train, test = ds.records[:50], ds.records[50:]
        global_pipe = make_learned_pipeline(
            FAST_CONFIG,
            unsupervised=fit_unsupervised(train, FAST_CONFIG, FAST_CONFIG.seed),
        )
        fold_pipe = make_learned_pipeline(FAST_CONFIG, unsupervised=None)
        a = global_pipe(train, test, 14)
        b = fold_pipe(train, test, 14)
        assert a.shape == b.shape == (len(test),)
        # Different SDAE fits (seed stream differs) give different scores.
        assert not np.array_equal(a, b)

    def test_unweighted_config_changes_scores(self):
        ds = small_dataset()
        train, test = ds.records[:50], ds.records[50:]
        unsup = fit_unsupervised(train, FAST_CONFIG, FAST_CONFIG.seed)
        weighted = make_learned_pipeline(FAST_CONFIG, unsupervised=unsup)
        unweighted = make_learned_pipeline(
            dataclasses.replace(FAST_CONFIG, weighted=False),
            unsupervised=unsup,
        )
        assert not np.array_equal(weighted(train, test, 15),
                                  unweighted(train, test, 15))
