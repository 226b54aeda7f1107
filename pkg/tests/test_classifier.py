import numpy as np
import pytest

from helpers import gradcheck
from morphoparse import autodiff as ad
from morphoparse.classifier import (
    ClassifierError,
    Pooler,
    PoolingSpec,
    accuracy_eval,
    pool,
    pooling_weights,
    split_dataset,
)


def _pooler(kind, dim=4, lstm_hidden=3, seed=0):
    return Pooler(PoolingSpec(kind=kind, lstm_hidden=lstm_hidden), dim,
                  np.random.default_rng(seed), dtype=np.float64)


def test_mean_of_identical_vectors_is_that_vector():
    v = np.array([1.0, -2.0, 0.5])
    seq = ad.const(np.tile(v, (6, 1)))
    p = _pooler("mean", dim=3)
    assert np.allclose(p.pool(seq).data, v)


def test_weighted_with_zero_projection_equals_mean():
    rng = np.random.default_rng(1)
    seq = ad.const(rng.standard_normal((5, 4)))
    w = _pooler("weighted")
    assert np.array_equal(w.params["pool.a"].data, np.zeros(4))
    m = _pooler("mean")
    assert np.allclose(w.pool(seq).data, m.pool(seq).data, atol=1e-15)


def test_weighted_pooling_weights_sum_to_one():
    rng = np.random.default_rng(2)
    seq = ad.const(rng.standard_normal((7, 4)))
    p = _pooler("weighted")
    p.params["pool.a"].data[:] = rng.standard_normal(4)
    weights = pooling_weights(seq, p.params)
    assert abs(weights.sum() - 1.0) < 1e-12


def test_lstm_pooling_gradcheck_on_4_step_sequence():
    p = _pooler("lstm", dim=4, lstm_hidden=3, seed=3)
    rng = np.random.default_rng(4)
    seq = ad.param(rng.standard_normal((4, 4)))
    proj = ad.const(rng.standard_normal(3))
    params = [seq] + list(p.params.values())
    gradcheck(lambda: ad.vsum(ad.tanh(ad.matmul(ad.reshape(p.pool(seq), (1, 3)),
                                                ad.reshape(proj, (3, 1))))),
              params, points=6, tol=1e-4)


def test_weighted_pooling_gradcheck():
    p = _pooler("weighted", dim=4)
    rng = np.random.default_rng(5)
    p.params["pool.a"].data[:] = rng.standard_normal(4) * 0.5
    seq = ad.param(rng.standard_normal((5, 4)))
    proj = ad.const(rng.standard_normal(4))
    gradcheck(lambda: ad.vsum(ad.mul(p.pool(seq), ad.const(proj.data))),
              [seq, p.params["pool.a"]], points=8, tol=1e-4)


def test_mean_is_permutation_invariant_lstm_is_not():
    rng = np.random.default_rng(6)
    seq = rng.standard_normal((6, 4))
    perm = seq[::-1].copy()
    mean = _pooler("mean")
    assert np.allclose(mean.pool(ad.const(seq)).data,
                       mean.pool(ad.const(perm)).data)
    lstm = _pooler("lstm", seed=7)
    a = lstm.pool(ad.const(seq)).data
    b = lstm.pool(ad.const(perm)).data
    assert not np.allclose(a, b)


def test_empty_sequence_rejected():
    p = _pooler("mean")
    with pytest.raises(ClassifierError):
        p.pool(ad.const(np.zeros((0, 4))))


def test_unknown_pooling_kind_rejected():
    with pytest.raises(ClassifierError):
        PoolingSpec(kind="max")


def test_accuracy_eval():
    assert accuracy_eval([1, 0, 1, 1], [1, 0, 1, 1]) == 1.0
    assert accuracy_eval([1, 0, 1, 1], [1, 0, 0, 1]) == 0.75
    with pytest.raises(ClassifierError):
        accuracy_eval([1], [1, 0])


def test_split_dataset_is_a_60_20_20_partition():
    train, val, test = split_dataset(100, seed=11)
    assert len(train) == 60 and len(val) == 20 and len(test) == 20
    assert sorted(train + val + test) == list(range(100))
    # deterministic
    again = split_dataset(100, seed=11)
    assert (train, val, test) == again
    other = split_dataset(100, seed=12)
    assert other != again
