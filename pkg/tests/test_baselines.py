import numpy as np
import pytest

from ddcl.assignment import hard_assign_batch
from ddcl.backbone import init_mlp
from ddcl.baselines import DeepClusterConfig, deepcluster_lite, kmeans, lloyd, minibatch_kmeans, pca_standardize
from ddcl.datasets import make_blobs, make_moons, standardize
from ddcl.metrics import clustering_accuracy
from ddcl.numerics import make_rng, pairwise_sq_dists


def test_kmeans_trivial_cases(rng):
    Z = rng.normal(size=(6, 2))
    assert kmeans(Z, 6, n_init=3).inertia == pytest.approx(0.0, abs=1e-20)
    Z = np.array([[-5.0, 1.0], [-5.0, -1.0], [5.0, 1.0], [5.0, -1.0]])
    C = kmeans(Z, 2, n_init=5).centroids
    assert sorted(map(tuple, np.round(C.T, 12))) == [(-5.0, 0.0), (5.0, 0.0)]


def test_kmeans_beats_random_centroids(rng):
    Z = rng.normal(size=(20, 2))
    res = kmeans(Z, 3, seed=1)
    draws = [np.min(pairwise_sq_dists(Z, rng.normal(size=(2, 3))), axis=1).sum() for _ in range(1000)]
    assert res.inertia <= min(draws)
    with pytest.raises(ValueError):
        kmeans(Z, 21)


def test_lloyd_monotone_and_hard_assign_rule(rng):
    Z = rng.normal(size=(60, 3))
    history = lloyd(Z, Z[:4].T.copy(), max_iter=50)[4]
    assert len(history) > 1 and np.all(np.diff(history) <= 1e-12)
    C = rng.normal(size=(3, 4))
    assert np.array_equal(np.argmin(pairwise_sq_dists(Z, C), axis=1), hard_assign_batch(Z, C))


def test_minibatch_kmeans(rng):
    Z = 3.0 + 0.5 * rng.normal(size=(2000, 2))
    res = minibatch_kmeans(Z, 1, B=50, seed=0)
    np.testing.assert_allclose(res.centroids[:, 0], Z.mean(0), rtol=0.01)
    ds = make_blobs(600, 4, seed=0)
    a = minibatch_kmeans(ds.features, 4, seed=2)
    b = minibatch_kmeans(ds.features, 4, seed=2)
    np.testing.assert_array_equal(a.centroids, b.centroids)
    # a single-init pass can stall in a local optimum, so judge the mean over shuffled streams
    accs = []
    for s in range(10):
        perm = make_rng(s).permutation(len(ds.labels))
        accs.append(clustering_accuracy(ds.labels[perm], minibatch_kmeans(ds.features[perm], 4, B=50, seed=s).labels))
    assert np.mean(accs) > 0.9


def test_pca(rng):
    t = rng.normal(size=100)
    line = np.column_stack([t, 2 * t + 1])
    Y, tr = pca_standardize(line, 1)
    recon = Y @ tr.components.T + tr.mean
    assert np.max(np.abs(recon - line)) <= 1e-10
    Z = rng.normal(size=(500, 6))
    Y, tr = pca_standardize(Z, 6)
    np.testing.assert_allclose(tr.components.T @ tr.components, np.eye(6), atol=1e-10)
    cov = np.cov(Y.T)
    assert np.max(np.abs(cov - np.diag(np.diag(cov)))) <= 1e-8
    iso = np.mean([pca_standardize(make_rng(s).normal(size=(4000, 4)), 4)[1].explained_variance_ratio
                   for s in range(10)], axis=0)
    np.testing.assert_allclose(iso, 0.25, atol=0.02)
    assert np.all(np.abs(tr.components).argmax(0) == np.abs(tr.components).argmax(0))
    big = np.abs(tr.components).argmax(axis=0)
    assert np.all(tr.components[big, np.arange(6)] > 0)
    with pytest.raises(ValueError):
        pca_standardize(Z, 7)


def test_pca_whiten_and_standardize(rng):
    Z = rng.normal(size=(300, 5)) @ rng.normal(size=(5, 5))
    Y, tr = pca_standardize(Z, 3, whiten=True)
    np.testing.assert_allclose(np.var(Y, axis=0, ddof=1), 1.0, rtol=1e-8)
    Y2, _ = pca_standardize(Z, 3, standardize=True)
    np.testing.assert_allclose(Y2.std(axis=0), 1.0, rtol=1e-8)
    np.testing.assert_allclose(tr.apply(Z), Y, atol=1e-10)


def test_deepcluster_frozen():
    ds = make_blobs(300, 3, cluster_sd=0.3, seed=5)
    labels, trace = deepcluster_lite(ds.features, 3, DeepClusterConfig(rounds=1, n_init=5), y_true=ds.labels)
    assert clustering_accuracy(ds.labels, labels) > 0.99
    assert trace[0]["acc"] > 0.99
    moons = make_moons(300, 0.1, seed=0)
    Z = standardize(moons.features)
    dc, _ = deepcluster_lite(Z, 2, DeepClusterConfig(rounds=2, n_init=5))
    km = kmeans(Z, 2, n_init=5).labels
    assert abs(clustering_accuracy(moons.labels, dc) - clustering_accuracy(moons.labels, km)) < 0.15


def test_deepcluster_end_to_end_updates_backbone():
    ds = make_blobs(120, 3, seed=6)
    bb = init_mlp([2, 8, 4], make_rng(0))
    W0 = bb.layers[0].W.copy()
    cfg = DeepClusterConfig(rounds=2, head_epochs=2, n_init=3, train_backbone=True, backbone_lr=0.01, batch_size=32)
    labels, trace = deepcluster_lite(ds.features, 3, cfg, backbone=bb)
    assert labels.shape == (120,) and len(trace) == 2
    assert not np.array_equal(W0, bb.layers[0].W)
