import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import finite_difference, relative_error
from phmprep.errors import (
    FeatureMismatchError,
    GridEmptyError,
    LengthMismatchError,
    SingleClassInputError,
    SpaceEmptyError,
)
from phmprep.models import (
    EvalReport,
    ForestModel,
    ForestParams,
    MlpModel,
    MlpParams,
    cross_validate,
    evaluate,
    kfold_indices,
    random_search,
    train_forest,
    train_mlp,
)
from phmprep.models.mlp import bce_loss, forward, gradients, init_weights


def two_blobs(n=200, d=4, gap=3.0, seed=0):
    rng = np.random.default_rng(seed)
    x = np.vstack([rng.normal(0, 1, (n // 2, d)),
                   rng.normal(gap, 1, (n // 2, d))])
    y = np.concatenate([np.zeros(n // 2, dtype=np.int64),
                        np.ones(n // 2, dtype=np.int64)])
    perm = rng.permutation(n)
    return x[perm], y[perm]


# --- metrics --------------------------------------------------------------

def test_metrics_values():
    pred = np.array([1, 1, 0, 0, 1, 0])
    truth = np.array([1, 0, 0, 1, 1, 0])
    r = evaluate(pred, truth)
    assert (r.tp, r.tn, r.fp, r.fn) == (2, 2, 1, 1)
    assert r.accuracy == pytest.approx(4 / 6)
    assert r.false_healthy == pytest.approx(1 / 6)
    assert r.false_degraded == pytest.approx(1 / 6)
    assert r.recall == pytest.approx(2 / 3)
    assert r.precision == pytest.approx(2 / 3)
    assert r.identity_holds()


def test_metrics_errors():
    with pytest.raises(LengthMismatchError):
        evaluate([1], [1, 0])
    with pytest.raises(Exception):
        evaluate([], [])


@settings(max_examples=200, deadline=None)
@given(st.tuples(st.integers(0, 500), st.integers(0, 500),
                 st.integers(0, 500), st.integers(0, 500)))
def test_metric_identity_property(counts):
    tp, tn, fp, fn = counts
    if tp + tn + fp + fn == 0:
        return
    assert EvalReport(tp, tn, fp, fn).identity_holds()


# --- forest ---------------------------------------------------------------

def test_forest_learns_separable_data():
    x, y = two_blobs(seed=1)
    model = train_forest(x, y, ForestParams(n_trees=15, max_depth=6, seed=1))
    acc = evaluate(model.predict(x), y).accuracy
    assert acc > 0.97


def test_forest_deterministic_and_seed_sensitive():
    x, y = two_blobs(gap=1.0, seed=2)
    a = train_forest(x, y, ForestParams(n_trees=10, seed=3))
    b = train_forest(x, y, ForestParams(n_trees=10, seed=3))
    np.testing.assert_array_equal(a.predict(x), b.predict(x))
    assert a.to_dict() == b.to_dict()
    c = train_forest(x, y, ForestParams(n_trees=10, seed=4))
    assert a.to_dict() != c.to_dict()


def test_forest_json_round_trip():
    x, y = two_blobs(n=80, seed=5)
    model = train_forest(x, y, ForestParams(n_trees=5, max_depth=4, seed=5))
    back = ForestModel.from_dict(model.to_dict())
    np.testing.assert_array_equal(back.predict(x), model.predict(x))


def test_forest_errors():
    x = np.ones((10, 2))
    with pytest.raises(SingleClassInputError):
        train_forest(x, np.zeros(10), ForestParams())
    with pytest.raises(ValueError):
        ForestParams(n_trees=0)
    x, y = two_blobs(n=40, seed=6)
    model = train_forest(x, y, ForestParams(n_trees=3, seed=0))
    with pytest.raises(FeatureMismatchError):
        model.predict(np.ones((5, 7)))


def test_single_tree_respects_max_depth():
    x, y = two_blobs(n=100, gap=0.5, seed=7)
    model = train_forest(x, y, ForestParams(n_trees=1, max_depth=2, seed=0))

    def depth(node):
        if node.is_leaf:
            return 0
        return 1 + max(depth(node.left), depth(node.right))

    assert depth(model.trees[0]) <= 2


# --- mlp ------------------------------------------------------------------

def test_mlp_gradients_match_finite_differences():
    rng = np.random.default_rng(8)
    for sizes in ([3, 4, 1], [5, 6, 3, 1], [2, 1]):
        weights, biases = init_weights(sizes, seed=int(rng.integers(1000)))
        x = rng.normal(0, 1, (12, sizes[0]))
        y = rng.integers(0, 2, 12).astype(np.float64)
        gw, gb = gradients(weights, biases, x, y)

        def loss():
            _, p = forward(weights, biases, x)
            return bce_loss(p, y)

        fw = finite_difference(loss, weights)
        fb = finite_difference(loss, biases)
        for analytic, numeric in zip(gw + gb, fw + fb):
            assert relative_error(analytic, numeric) < 1e-6


def test_mlp_learns_separable_data():
    x, y = two_blobs(seed=9)
    params = MlpParams(hidden_layer_sizes=(16,), learning_rate=0.1,
                       batch_size=16, epochs=60, seed=9)
    model = train_mlp(x[:160], y[:160], x[160:], y[160:], params)
    assert evaluate(model.predict(x[160:]), y[160:]).accuracy > 0.95
    assert len(model.curve.epochs) == 60
    assert model.curve.train_loss[-1] < model.curve.train_loss[0]


def test_mlp_deterministic():
    x, y = two_blobs(n=100, seed=10)
    params = MlpParams(epochs=5, seed=11)
    a = train_mlp(x[:80], y[:80], x[80:], y[80:], params)
    b = train_mlp(x[:80], y[:80], x[80:], y[80:], params)
    for wa, wb in zip(a.weights, b.weights):
        np.testing.assert_array_equal(wa, wb)


def test_mlp_json_round_trip():
    x, y = two_blobs(n=60, seed=12)
    params = MlpParams(hidden_layer_sizes=(8,), epochs=3, seed=12)
    model = train_mlp(x[:40], y[:40], x[40:], y[40:], params)
    back = MlpModel.from_dict(model.to_dict())
    np.testing.assert_array_equal(back.predict(x), model.predict(x))


def test_mlp_validation():
    with pytest.raises(ValueError):
        MlpParams(hidden_layer_sizes=(0,))
    with pytest.raises(ValueError):
        MlpParams(learning_rate=0.0)
    x, y = two_blobs(n=20, seed=13)
    with pytest.raises(ValueError):
        train_mlp(x, y, x[:0], y[:0], MlpParams(epochs=1))


# --- search ---------------------------------------------------------------

def test_kfold_indices_partition():
    folds = kfold_indices(23, 5, seed=0)
    assert len(folds) == 5
    joined = np.sort(np.concatenate(folds))
    np.testing.assert_array_equal(joined, np.arange(23))
    assert {len(f) for f in folds} <= {4, 5}
    with pytest.raises(ValueError):
        kfold_indices(3, 5, seed=0)


def test_cross_validate_prefers_better_params():
    x, y = two_blobs(n=160, gap=2.0, seed=14)
    grid = [ForestParams(n_trees=1, max_depth=1, seed=0),
            ForestParams(n_trees=12, max_depth=6, seed=0)]
    best, scores = cross_validate(x, y, grid, k=5, seed=14)
    assert len(scores) == 2
    assert best == grid[int(np.argmax(scores))]
    with pytest.raises(GridEmptyError):
        cross_validate(x, y, [], k=5, seed=0)


def test_random_search_draws_from_space():
    x, y = two_blobs(n=120, seed=15)
    space = {"hidden_layer_sizes": [[4], [8]],
             "learning_rate": [0.2, 0.05],
             "epochs": [8],
             "batch_size": [16]}
    best, scores = random_search(x[:90], y[:90], x[90:], y[90:],
                                 space, n_draws=4, seed=15)
    assert len(scores) == 4
    assert best.epochs == 8
    assert best.hidden_layer_sizes in ((4,), (8,))
    with pytest.raises(SpaceEmptyError):
        random_search(x[:90], y[:90], x[90:], y[90:], {}, 3, 0)
