import numpy as np
import pytest

from padtex.classify import (gmm_llr_score, identity_svm, load_svm, save_svm,
                             svm_score, svm_score_batch, svm_train)
from padtex.encoding import GmmModel
from padtex.errors import DataError


def primal_objective(w_aug, x_aug, y, cost):
    margins = 1.0 - y * (x_aug @ w_aug)
    return 0.5 * (w_aug @ w_aug) + float(np.sum(cost * np.clip(margins, 0.0, None)))


def subgradient_reference(x_aug, y, cost, iters=60_000, step0=0.5):
    """Projected-subgradient descent on the same hinge objective; tracks the
    best iterate seen, which is enough for a 1% objective comparison."""
    w = np.zeros(x_aug.shape[1])
    best = w.copy()
    best_obj = primal_objective(w, x_aug, y, cost)
    for t in range(1, iters + 1):
        margins = 1.0 - y * (x_aug @ w)
        active = margins > 0.0
        grad = w - (cost[active] * y[active]) @ x_aug[active]
        w = w - step0 / np.sqrt(t) * grad
        obj = primal_objective(w, x_aug, y, cost)
        if obj < best_obj:
            best_obj = obj
            best = w.copy()
    return best, best_obj


def standardized_aug(x):
    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale == 0.0] = 1.0
    xs = (x - mean) / scale
    return np.hstack([xs, np.ones((x.shape[0], 1))])


def test_symmetric_pair_boundary_at_zero():
    x = np.array([[1.0], [-1.0]])
    y = np.array([1.0, -1.0])
    model = svm_train(x, y, c=100.0, epochs=2000, seed=0)
    assert abs(svm_score(model, np.array([0.0]))) <= 1e-6
    assert abs(svm_score(model, np.array([1.0])) - 1.0) <= 1e-3
    assert abs(svm_score(model, np.array([-1.0])) + 1.0) <= 1e-3


def test_separable_blobs_perfect_training_accuracy():
    rng = np.random.default_rng(60)
    a = rng.normal(loc=(3.0, 3.0), scale=0.4, size=(60, 2))
    b = rng.normal(loc=(-3.0, -3.0), scale=0.4, size=(40, 2))
    x = np.vstack([a, b])
    y = np.concatenate([np.ones(60), -np.ones(40)])
    model = svm_train(x, y, c=1.0, epochs=500, seed=1)
    predictions = np.sign(svm_score_batch(model, x))
    np.testing.assert_array_equal(predictions, y)


def test_objective_matches_subgradient_reference_within_1pct():
    rng = np.random.default_rng(61)
    n, d = 40, 5
    x = rng.normal(size=(n, d))
    y = np.sign(x[:, 0] + 0.3 * rng.normal(size=n))
    y[y == 0] = 1.0
    c = 0.5
    model = svm_train(x, y, c=c, epochs=3000, seed=2, balanced=False)

    x_aug = standardized_aug(x)
    cost = np.full(n, c)
    w_mine = np.concatenate([model.weights, [model.bias]])
    mine = primal_objective(w_mine, x_aug, y, cost)
    _, reference = subgradient_reference(x_aug, y, cost)
    assert mine <= reference * 1.01
    assert reference <= mine * 1.01


def test_train_deterministic_under_seed():
    rng = np.random.default_rng(62)
    x = rng.normal(size=(50, 4))
    y = np.where(rng.uniform(size=50) > 0.4, 1.0, -1.0)
    m1 = svm_train(x, y, c=1.0, epochs=200, seed=7)
    m2 = svm_train(x, y, c=1.0, epochs=200, seed=7)
    np.testing.assert_array_equal(m1.weights, m2.weights)
    assert m1.bias == m2.bias


def test_label_flip_negates_model():
    rng = np.random.default_rng(63)
    x = rng.normal(size=(60, 3))
    y = np.where(rng.uniform(size=60) > 0.3, 1.0, -1.0)
    m_pos = svm_train(x, y, c=1.0, epochs=300, seed=3)
    m_neg = svm_train(x, -y, c=1.0, epochs=300, seed=3)
    np.testing.assert_allclose(m_neg.weights, -m_pos.weights, atol=1e-6)
    assert abs(m_neg.bias + m_pos.bias) <= 1e-6


def test_single_class_rejected():
    x = np.zeros((10, 2))
    with pytest.raises(DataError, match="both classes"):
        svm_train(x, np.ones(10))


def test_non_finite_features_rejected():
    x = np.zeros((4, 2))
    x[1, 1] = np.inf
    with pytest.raises(DataError, match="finite"):
        svm_train(x, np.array([1.0, 1.0, -1.0, -1.0]))


def test_score_basis_vector():
    model = identity_svm([1.0, 0.0, 0.0], bias=0.0)
    assert svm_score(model, np.array([3.0, 5.0, -2.0])) == 3.0


def test_score_affine_in_input():
    rng = np.random.default_rng(64)
    w = rng.normal(size=4)
    b = 0.7
    model = identity_svm(w, bias=b)
    x = rng.normal(size=4)
    for alpha in (0.0, 0.5, -2.0, 3.25):
        expected = alpha * float(w @ x) + b
        assert abs(svm_score(model, alpha * x) - expected) <= 1e-12


def test_batch_scoring_equals_loop():
    rng = np.random.default_rng(65)
    x = rng.normal(size=(30, 6))
    y = np.where(x[:, 0] > 0, 1.0, -1.0)
    model = svm_train(x, y, c=1.0, epochs=100, seed=4)
    batch = svm_score_batch(model, x)
    loop = np.array([svm_score(model, row) for row in x])
    np.testing.assert_allclose(batch, loop, rtol=0, atol=1e-12)


def test_score_dimension_mismatch():
    model = identity_svm([1.0, 2.0], bias=0.0)
    with pytest.raises(DataError):
        svm_score(model, np.array([1.0, 2.0, 3.0]))


# ------------------------------------------------------------- GMM LLR

def toy_gmm(mean, var):
    return GmmModel(weights=np.array([1.0]), means=np.array([[mean]]),
                    variances=np.array([[var]]))


def test_llr_identical_models_zero():
    model = toy_gmm(0.0, 1.0)
    frames = np.linspace(-2, 2, 17)[:, None]
    assert gmm_llr_score(model, model, frames) == 0.0


def test_llr_antisymmetric():
    bona = toy_gmm(0.0, 1.0)
    attack = toy_gmm(3.0, 0.5)
    rng = np.random.default_rng(66)
    frames = rng.normal(size=(25, 1))
    forward = gmm_llr_score(bona, attack, frames)
    backward = gmm_llr_score(attack, bona, frames)
    assert forward == -backward


def test_llr_positive_for_bona_samples():
    bona = toy_gmm(0.0, 1.0)
    attack = toy_gmm(6.0, 1.0)
    rng = np.random.default_rng(67)
    wins = sum(gmm_llr_score(bona, attack, rng.normal(size=(40, 1))) > 0
               for _ in range(100))
    assert wins >= 99


def test_llr_dimension_mismatch():
    bona = toy_gmm(0.0, 1.0)
    attack = GmmModel(weights=np.array([1.0]), means=np.zeros((1, 2)),
                      variances=np.ones((1, 2)))
    with pytest.raises(DataError):
        gmm_llr_score(bona, attack, np.zeros((3, 1)))


# ------------------------------------------------------------- model io

def test_svm_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(68)
    x = rng.normal(size=(40, 5))
    y = np.where(x[:, 1] > 0, 1.0, -1.0)
    model = svm_train(x, y, c=2.0, epochs=150, seed=5)
    path = tmp_path / "m.svm"
    save_svm(path, model)
    back = load_svm(path)
    np.testing.assert_array_equal(back.weights, model.weights)
    np.testing.assert_array_equal(back.feature_mean, model.feature_mean)
    np.testing.assert_array_equal(back.feature_scale, model.feature_scale)
    assert back.bias == model.bias


def test_svm_load_bad_magic(tmp_path):
    path = tmp_path / "bad.svm"
    path.write_bytes(b"junk")
    with pytest.raises(DataError, match="magic"):
        load_svm(path)
