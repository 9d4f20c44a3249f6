"""The dual coordinate descent trainer against an independent solver."""

import numpy as np
import pytest

from da_tagger.dialogues import DataFormatError, UsageError
from da_tagger.features import FeatureConfig, FeatureVector
from da_tagger.svm import (BACKEND, DEFAULT_C_GRID, LinearModel, TrainConfig,
                           TrainingError, available_backends, decision_scores,
                           load_model, pack, predict, save_model, train_binary,
                           train_ovr, tune_C)

from oracles import svm_dual_oracle, svm_primal_objective

TIGHT = TrainConfig(C=0.5, tolerance=1e-8, max_outer_iterations=5000)


def _random_instance(rng, n, d, dense_dim=0):
    """A small separably-noisy binary problem as (data, X, y)."""
    data = []
    rows = []
    ys = []
    for i in range(n):
        k = int(rng.integers(1, min(d, 5) + 1))
        ids = sorted(rng.choice(d, size=k, replace=False).tolist())
        dense = rng.normal(size=dense_dim) if dense_dim else None
        data.append(FeatureVector(sparse=[(j, 1.0) for j in ids], dense=dense))
        row = np.zeros(d + dense_dim + 1)
        row[ids] = 1.0
        if dense_dim:
            row[d:d + dense_dim] = dense
        row[-1] = 1.0  # bias column
        rows.append(row)
        ys.append(1 if rng.random() < 0.5 else -1)
    # force both classes
    ys[0], ys[1] = 1, -1
    X = np.array(rows)
    y = np.array(ys, dtype=np.float64)
    return [(v, int(lb)) for v, lb in zip(data, y)], X, y


@pytest.mark.parametrize("seed,n,d,dense_dim,C", [
    (0, 12, 8, 0, 0.5),
    (1, 20, 10, 0, 0.1),
    (2, 16, 6, 3, 1.0),
    (3, 30, 12, 0, 10.0),
    (4, 10, 5, 2, 0.01),
])
def test_matches_projected_gradient_oracle(seed, n, d, dense_dim, C):
    rng = np.random.default_rng(seed)
    data, X, y = _random_instance(rng, n, d, dense_dim)
    cfg = TrainConfig(C=C, tolerance=1e-8, max_outer_iterations=20000)
    w = train_binary(data, cfg, n_sparse=d)
    _, w_oracle = svm_dual_oracle(X, y, C)
    p = svm_primal_objective(X, y, C, w)
    p_oracle = svm_primal_objective(X, y, C, w_oracle)
    assert p <= p_oracle * (1 + 1e-6) + 1e-9
    assert abs(p - p_oracle) <= 1e-4 * max(1.0, abs(p_oracle))
    assert np.allclose(w, w_oracle, rtol=1e-3, atol=1e-4)


def test_training_is_deterministic():
    rng = np.random.default_rng(7)
    data, _, _ = _random_instance(rng, 15, 8)
    w1 = train_binary(data, TIGHT, n_sparse=8)
    w2 = train_binary(data, TIGHT, n_sparse=8)
    assert np.array_equal(w1, w2)


def test_flipped_labels_negate_weights_exactly():
    rng = np.random.default_rng(8)
    data, _, _ = _random_instance(rng, 15, 8)
    flipped = [(v, -lb) for v, lb in data]
    w = train_binary(data, TIGHT, n_sparse=8)
    w_neg = train_binary(flipped, TIGHT, n_sparse=8)
    assert np.array_equal(w, -w_neg)


def test_backends_produce_identical_weights():
    if "cython" not in available_backends():
        pytest.skip("compiled kernel not built")
    from da_tagger.svm import _dcd, _dcd_cy
    rng = np.random.default_rng(9)
    data, _, _ = _random_instance(rng, 25, 10, dense_dim=4)
    w_py = train_binary(data, TIGHT, n_sparse=10, kernel=_dcd)
    w_cy = train_binary(data, TIGHT, n_sparse=10, kernel=_dcd_cy)
    assert np.array_equal(w_py, w_cy)  # bit for bit


def test_backend_selection_reports():
    assert BACKEND in available_backends()
    assert "python" in available_backends()


def test_dual_objective_never_increases():
    rng = np.random.default_rng(10)
    data, _, _ = _random_instance(rng, 20, 10)
    trace = []
    train_binary(data, TIGHT, n_sparse=10, instrument=trace)
    objs = [e["dual_objective"] for e in trace]
    assert len(objs) >= 2
    assert all(b <= a + 1e-12 for a, b in zip(objs, objs[1:]))
    assert trace[-1]["max_pg"] < TIGHT.tolerance


# ------------------------------------------------------------- packing

def test_pack_rejects_bad_input():
    with pytest.raises(UsageError):
        pack([])
    with pytest.raises(UsageError, match="increasing"):
        pack([FeatureVector(sparse=[(3, 1.0), (1, 1.0)])])
    with pytest.raises(UsageError, match="mixed dense"):
        pack([FeatureVector(sparse=[], dense=np.ones(2)),
              FeatureVector(sparse=[], dense=np.ones(3))])
    with pytest.raises(UsageError, match="outside declared width"):
        pack([FeatureVector(sparse=[(5, 1.0)])], n_sparse=3)
    with pytest.raises(DataFormatError, match="non-finite"):
        pack([FeatureVector(sparse=[(0, float("nan"))])])


def test_pack_infers_width():
    p = pack([FeatureVector(sparse=[(0, 1.0), (7, 1.0)])])
    assert p.n_sparse == 8
    assert p.dim == 9  # + bias
    assert pack([FeatureVector(sparse=[])]).n_sparse == 0


# ------------------------------------------------------ config, errors

def test_train_config_validation():
    with pytest.raises(UsageError):
        TrainConfig(C=0.0)
    with pytest.raises(UsageError):
        TrainConfig(tolerance=-1.0)


def test_train_binary_label_validation():
    v = FeatureVector(sparse=[(0, 1.0)])
    with pytest.raises(UsageError):
        train_binary([], TIGHT)
    with pytest.raises(UsageError, match=r"\+1/-1"):
        train_binary([(v, 2)], TIGHT)
    with pytest.raises(TrainingError, match="single class"):
        train_binary([(v, 1), (v, 1)], TIGHT)


def test_train_ovr_names_empty_class():
    v = FeatureVector(sparse=[(0, 1.0)])
    data = [(v, "a"), (v, "b")]
    with pytest.raises(TrainingError, match="'c' has no training examples"):
        train_ovr(data, TIGHT, classes=["a", "b", "c"])


def test_train_ovr_rejects_stray_labels():
    v = FeatureVector(sparse=[(0, 1.0)])
    with pytest.raises(UsageError, match="outside declared classes"):
        train_ovr([(v, "a"), (v, "b"), (v, "zzz")], TIGHT, classes=["a", "b"])


def test_train_ovr_needs_two_classes():
    v = FeatureVector(sparse=[(0, 1.0)])
    with pytest.raises(TrainingError):
        train_ovr([(v, "a")], TIGHT, classes=["a"])


def test_train_ovr_parallel_matches_serial():
    rng = np.random.default_rng(11)
    data, _, _ = _random_instance(rng, 18, 9)
    labeled = [(v, "pos" if lb > 0 else "neg") for v, lb in data]
    m1 = train_ovr(labeled, TIGHT, n_jobs=1)
    m2 = train_ovr(labeled, TIGHT, n_jobs=4)
    assert np.array_equal(m1.weights, m2.weights)
    assert m1.classes == m2.classes == ["neg", "pos"]  # sorted when unset


# ------------------------------------------------------- prediction

def _toy_model():
    # two sparse features + bias; class order fixed
    w = np.array([[1.0, 0.0, 0.0],
                  [0.0, 1.0, 0.0],
                  [1.0, 1.0, -1.0]])
    return LinearModel(classes=["a", "b", "c"], weights=w, n_sparse=2,
                       dense_dim=0, feature_config=FeatureConfig())


def test_predict_argmax_and_scores():
    m = _toy_model()
    label, scores = predict(m, FeatureVector(sparse=[(1, 2.0)]))
    assert label == "b"
    assert scores == {"a": 0.0, "b": 2.0, "c": 1.0}


def test_predict_tie_takes_first_class():
    m = _toy_model()
    label, scores = predict(m, FeatureVector(sparse=[(0, 1.0), (1, 1.0)]))
    assert scores["a"] == scores["b"] == scores["c"] == 1.0
    assert label == "a"


def test_decision_scores_ignore_out_of_width_ids():
    m = _toy_model()
    s1 = decision_scores(m, FeatureVector(sparse=[(0, 1.0)]))
    s2 = decision_scores(m, FeatureVector(sparse=[(0, 1.0), (5, 9.0)]))
    assert np.array_equal(s1, s2)


def test_decision_scores_check_dense_block():
    w = np.zeros((2, 4))
    m = LinearModel(classes=["a", "b"], weights=w, n_sparse=1, dense_dim=2,
                    feature_config=FeatureConfig())
    with pytest.raises(UsageError, match="dense block"):
        decision_scores(m, FeatureVector(sparse=[]))


def test_linear_model_shape_validation():
    with pytest.raises(UsageError, match="shape"):
        LinearModel(classes=["a"], weights=np.zeros((1, 3)), n_sparse=5,
                    dense_dim=0, feature_config=FeatureConfig())
    with pytest.raises(UsageError, match="duplicate"):
        LinearModel(classes=["a", "a"], weights=np.zeros((2, 6)), n_sparse=5,
                    dense_dim=0, feature_config=FeatureConfig())


# ------------------------------------------------------------- tuning

def test_tune_prefers_smaller_c_on_ties():
    rng = np.random.default_rng(12)
    data, _, _ = _random_instance(rng, 20, 8)
    labeled = [(v, "p" if lb > 0 else "n") for v, lb in data]
    best, accs = tune_C(labeled, labeled, grid=(1.0, 0.1), cfg=TIGHT)
    if accs[1.0] == accs[0.1]:
        assert best == 0.1
    else:
        assert best == max(accs, key=lambda c: accs[c])
    assert set(accs) == {1.0, 0.1}


def test_tune_rejects_empty_grid():
    with pytest.raises(UsageError):
        tune_C([], [], grid=())


def test_default_grid_is_descending():
    assert list(DEFAULT_C_GRID) == sorted(DEFAULT_C_GRID, reverse=True)


# ------------------------------------------------------ serialization

def test_save_load_round_trip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(13)
    data, _, _ = _random_instance(rng, 15, 7, dense_dim=2)
    labeled = [(v, "p" if lb > 0 else "n") for v, lb in data]
    m = train_ovr(labeled, TIGHT, feature_config=FeatureConfig(use_bigrams=True),
                  vocab_ref="vocab.tsv")
    p = tmp_path / "model.json"
    save_model(m, p)
    again = load_model(p)
    assert np.array_equal(again.weights, m.weights)  # hex floats, no drift
    assert again.classes == m.classes
    assert again.feature_config == m.feature_config
    assert again.vocab_ref == "vocab.tsv"


def test_load_model_rejects_other_files(tmp_path):
    p = tmp_path / "model.json"
    p.write_text('{"format": "something-else"}', encoding="utf-8")
    with pytest.raises(DataFormatError, match="not a"):
        load_model(p)
    p.write_text("{broken", encoding="utf-8")
    with pytest.raises(DataFormatError):
        load_model(p)
