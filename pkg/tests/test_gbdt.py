import numpy as np
import pytest

from conftest import blob_data, xor_data
from oracles import best_depth2_tree_accuracy, nearest_centroid_accuracy
from pcapass import (
    GbdtParams,
    gbdt_from_bytes,
    gbdt_predict,
    gbdt_predict_proba,
    gbdt_to_bytes,
    gbdt_train,
)
from pcapass.gbdt import gbdt_dump_text


def quick_params(**kw):
    defaults = dict(learning_rate=0.3, max_depth=3, n_rounds=60, patience=10, seed=0)
    defaults.update(kw)
    return GbdtParams(**defaults)


class TestTrainContracts:
    def test_single_class_rejected(self):
        X = np.random.default_rng(0).standard_normal((20, 2))
        with pytest.raises(ValueError, match="classes"):
            gbdt_train(X, np.zeros(20, int), X, np.zeros(20, int), quick_params())

    def test_missing_class_rejected(self):
        X = np.random.default_rng(0).standard_normal((20, 2))
        y_tr = np.zeros(20, int)
        y_val = np.full(20, 2, int)  # class 1 never appears in training
        with pytest.raises(ValueError, match="missing"):
            gbdt_train(X, y_tr, X, y_val, quick_params())

    def test_non_finite_features_rejected(self):
        X = np.ones((10, 2))
        X[3, 1] = np.nan
        y = np.arange(10) % 2
        with pytest.raises(ValueError, match="non-finite"):
            gbdt_train(X, y, np.ones((4, 2)), np.arange(4) % 2, quick_params())

    def test_label_row_mismatch(self):
        X = np.ones((10, 2))
        with pytest.raises(ValueError, match="label count"):
            gbdt_train(X, np.zeros(9, int), X, np.zeros(10, int), quick_params())

    def test_constant_features_fall_back_to_prior(self):
        X = np.full((40, 3), 1.5)
        y = np.arange(40) % 2
        model = gbdt_train(X, y, X, y, quick_params(n_rounds=5, patience=50))
        proba = gbdt_predict_proba(model, X[:4])
        np.testing.assert_allclose(proba, 0.5, atol=1e-12)


class TestBlobs:
    def test_validation_accuracy_at_least_098(self):
        (X_tr, y_tr), (X_val, y_val), _ = blob_data(seed=3)
        # oracle: the blobs are separable with margin; nearest-centroid
        # already clears the bar, so a boosted tree model must too
        assert nearest_centroid_accuracy(X_tr, y_tr, X_val, y_val) >= 0.98
        model = gbdt_train(X_tr, y_tr, X_val, y_val, quick_params())
        pred = gbdt_predict(model, X_val)
        assert (pred == y_val).mean() >= 0.98

    def test_test_accuracy_at_least_097(self):
        (X_tr, y_tr), (X_val, y_val), (X_te, y_te) = blob_data(seed=3)
        model = gbdt_train(X_tr, y_tr, X_val, y_val, quick_params())
        assert (gbdt_predict(model, X_te) == y_te).mean() >= 0.97

    def test_training_ce_non_increasing_first_rounds(self):
        (X_tr, y_tr), (X_val, y_val), _ = blob_data(seed=5)
        params = quick_params(learning_rate=0.1, n_rounds=10, patience=100)
        model = gbdt_train(X_tr, y_tr, X_val, y_val, params)
        losses = []
        for r in range(len(model.rounds) + 1):
            proba = gbdt_predict_proba(model, X_tr, n_rounds=r)
            p_true = proba[np.arange(len(y_tr)), y_tr]
            losses.append(float(-np.log(np.maximum(p_true, 1e-15)).mean()))
        assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))


class TestXor:
    def test_train_accuracy_at_least_095(self):
        X, y = xor_data(seed=1)
        # oracle: exhaustive depth-2 tree search shows the fixture is
        # depth-2 separable
        assert best_depth2_tree_accuracy(X, y) >= 0.95
        model = gbdt_train(X, y, X, y, quick_params(max_depth=2, n_rounds=150))
        assert (gbdt_predict(model, X) == y).mean() >= 0.95


class TestPredict:
    def test_zero_rounds_balanced_prior_is_uniform(self):
        rng = np.random.default_rng(0)
        X = rng.standard_normal((40, 3))
        y = np.repeat(np.arange(4), 10)
        model = gbdt_train(X, y, X, y, quick_params(n_rounds=0))
        proba = gbdt_predict_proba(model, X[:5])
        np.testing.assert_allclose(proba, 0.25, atol=1e-12)
        # uniform probabilities: the tie resolves to class 0
        assert (gbdt_predict(model, X[:5]) == 0).all()

    def test_probability_rows_sum_to_one(self):
        (X_tr, y_tr), (X_val, y_val), (X_te, _) = blob_data(seed=9)
        model = gbdt_train(X_tr, y_tr, X_val, y_val, quick_params())
        proba = gbdt_predict_proba(model, X_te)
        np.testing.assert_allclose(proba.sum(axis=1), 1.0, atol=1e-9)
        assert (proba > 0.0).all() and (proba < 1.0).all()

    def test_argmax_consistency(self):
        (X_tr, y_tr), (X_val, y_val), _ = blob_data(seed=2)
        model = gbdt_train(X_tr, y_tr, X_val, y_val, quick_params())
        proba = gbdt_predict_proba(model, X_tr)
        np.testing.assert_array_equal(
            gbdt_predict(model, X_tr), np.argmax(proba, axis=1)
        )

    def test_single_row(self):
        (X_tr, y_tr), (X_val, y_val), _ = blob_data(seed=2)
        model = gbdt_train(X_tr, y_tr, X_val, y_val, quick_params())
        assert gbdt_predict(model, X_tr[:1]).shape == (1,)

    def test_width_mismatch_rejected(self):
        (X_tr, y_tr), (X_val, y_val), _ = blob_data(seed=2)
        model = gbdt_train(X_tr, y_tr, X_val, y_val, quick_params())
        with pytest.raises(ValueError, match="features"):
            gbdt_predict(model, np.ones((3, 5)))


class TestEarlyStopping:
    @staticmethod
    def noisy_validation_model(patience=7):
        (X_tr, y_tr), (X_val, y_val), _ = blob_data(seed=11)
        flip = np.random.default_rng(4).random(len(y_val)) < 0.3
        y_noisy = np.where(flip, 1 - y_val, y_val)
        params = quick_params(n_rounds=400, patience=patience)
        return gbdt_train(X_tr, y_tr, X_val, y_noisy, params), params

    def test_stops_after_exactly_patience_stale_rounds(self):
        model, params = self.noisy_validation_model()
        assert len(model.rounds) < params.n_rounds, "early stopping never fired"
        assert len(model.rounds) == model.best_round + 1 + params.patience

    def test_best_bookkeeping_is_exact(self):
        model, _ = self.noisy_validation_model()
        candidates = [model.prior_valid_ce] + model.valid_ce_history
        assert model.best_valid_ce == min(candidates)
        if model.best_round >= 0:
            assert model.valid_ce_history[model.best_round] == model.best_valid_ce

    def test_prediction_uses_only_best_rounds(self):
        model, _ = self.noisy_validation_model()
        (X_tr, _), _, _ = blob_data(seed=11)
        full = gbdt_predict_proba(model, X_tr, n_rounds=model.best_round + 1)
        np.testing.assert_array_equal(gbdt_predict_proba(model, X_tr), full)


class TestDeterminism:
    def test_identical_runs_are_bitwise_identical(self):
        (X_tr, y_tr), (X_val, y_val), _ = blob_data(seed=6)
        params = quick_params(subsample=0.8, seed=123)
        a = gbdt_train(X_tr, y_tr, X_val, y_val, params)
        b = gbdt_train(X_tr, y_tr, X_val, y_val, params)
        assert gbdt_to_bytes(a) == gbdt_to_bytes(b)

    def test_subsample_uses_seed(self):
        (X_tr, y_tr), (X_val, y_val), _ = blob_data(seed=6)
        a = gbdt_train(X_tr, y_tr, X_val, y_val, quick_params(subsample=0.5, seed=1))
        b = gbdt_train(X_tr, y_tr, X_val, y_val, quick_params(subsample=0.5, seed=2))
        assert gbdt_to_bytes(a) != gbdt_to_bytes(b)


def test_monotone_1d_split_thresholds_in_the_gap():
    rng = np.random.default_rng(8)
    x = np.concatenate([rng.uniform(-3, -0.4, 120), rng.uniform(0.4, 3, 130)])
    y = (x > 0).astype(np.int64)
    X = x[:, None]
    model = gbdt_train(X, y, X, y, quick_params(n_rounds=20))
    gap_lo, gap_hi = x[x < 0].max(), x[x > 0].min()
    thresholds = [
        t for trees in model.rounds for tree in trees for _, t in tree.split_thresholds()
    ]
    assert thresholds, "no splits learned"
    assert all(gap_lo < t <= gap_hi for t in thresholds)


class TestSerialization:
    def test_roundtrip_preserves_predictions(self):
        (X_tr, y_tr), (X_val, y_val), (X_te, _) = blob_data(seed=13)
        model = gbdt_train(X_tr, y_tr, X_val, y_val, quick_params(subsample=0.9))
        restored = gbdt_from_bytes(gbdt_to_bytes(model))
        np.testing.assert_array_equal(
            gbdt_predict_proba(restored, X_te), gbdt_predict_proba(model, X_te)
        )
        assert restored.best_round == model.best_round
        assert restored.params == model.params
        assert gbdt_to_bytes(restored) == gbdt_to_bytes(model)

    def test_bad_magic_rejected(self):
        with pytest.raises(ValueError, match="magic"):
            gbdt_from_bytes(b"ZZZZ" + b"\0" * 100)

    def test_text_dump_lists_every_node(self):
        (X_tr, y_tr), (X_val, y_val), _ = blob_data(seed=13)
        model = gbdt_train(X_tr, y_tr, X_val, y_val, quick_params(n_rounds=3, patience=50))
        dump = gbdt_dump_text(model)
        n_nodes = sum(t.n_nodes for trees in model.rounds for t in trees)
        node_lines = [ln for ln in dump.splitlines() if " node=" in ln]
        assert len(node_lines) == n_nodes
        assert "best_round=" in dump


class TestParams:
    @pytest.mark.parametrize(
        "kw",
        [
            dict(learning_rate=0.0),
            dict(max_depth=0),
            dict(n_rounds=-1),
            dict(reg_lambda=-0.1),
            dict(patience=0),
            dict(n_bins=1),
            dict(subsample=0.0),
            dict(subsample=1.2),
        ],
    )
    def test_invalid_params_rejected(self, kw):
        with pytest.raises(ValueError):
            GbdtParams(**kw)
