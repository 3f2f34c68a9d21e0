import numpy as np
import pytest

from ddcl.backbone import Layer, MlpParams, init_mlp, jacobian_norm_estimate, mlp_backward, mlp_forward, sgd_step
from ddcl.numerics import make_rng


def _probe(params, X, W, mode="train"):
    out, _ = mlp_forward(params, X, mode=mode, update_running=False)
    return float(np.sum(out * W))


def _fd_param(params, X, W, key, h=1e-5):
    arr = getattr(params.layers[key[0]], key[1])
    g = np.zeros_like(arr)
    for idx in np.ndindex(arr.shape):
        old = arr[idx]
        arr[idx] = old + h
        fp = _probe(params, X, W)
        arr[idx] = old - h
        fm = _probe(params, X, W)
        arr[idx] = old
        g[idx] = (fp - fm) / (2 * h)
    return g


def test_zero_network():
    p = MlpParams([Layer(np.zeros((3, 2)), np.zeros(2))])
    out, _ = mlp_forward(p, np.ones((4, 3)))
    assert not out.any()


def test_eval_passthrough():
    W = np.array([[2.0, 0.0], [0.0, 3.0]])
    L = Layer(W, np.array([1.0, -1.0]), np.ones(2), np.zeros(2), np.zeros(2), np.ones(2) - 1e-5)
    out, _ = mlp_forward(MlpParams([L, Layer(np.eye(2), np.zeros(2))]), np.array([[1.0, 1.0]]), mode="eval")
    np.testing.assert_allclose(out, np.maximum(np.array([[1.0, 1.0]]) @ W + [1.0, -1.0], 0), atol=1e-12)


def test_train_batch_stats(rng):
    p = init_mlp([4, 6, 2], make_rng(0))
    X = rng.normal(size=(10, 4))
    _, cache = mlp_forward(p, X, update_running=False)
    pre = X @ p.layers[0].W + p.layers[0].b
    np.testing.assert_allclose(cache.steps[0]["mu"], pre.mean(0), atol=1e-14)
    np.testing.assert_allclose(cache.steps[0]["var"], pre.var(0), atol=1e-14)
    a, _ = mlp_forward(p, X, mode="eval")
    b, _ = mlp_forward(p, X, mode="eval")
    np.testing.assert_array_equal(a, b)


def test_zero_upstream_gradient(rng):
    p = init_mlp([3, 4, 2], make_rng(1))
    X = rng.normal(size=(5, 3))
    _, cache = mlp_forward(p, X)
    grads, gin = mlp_backward(p, cache, np.zeros((5, 2)))
    assert all(not g.any() for g in grads.values()) and not gin.any()


def test_single_linear_layer_closed_form(rng):
    p = init_mlp([3, 2], make_rng(2), batchnorm=False)
    X = rng.normal(size=(4, 3))
    G = rng.normal(size=(4, 2))
    _, cache = mlp_forward(p, X)
    grads, gin = mlp_backward(p, cache, G)
    np.testing.assert_allclose(grads[(0, "W")], X.T @ G, atol=1e-14)
    np.testing.assert_allclose(gin, G @ p.layers[0].W.T, atol=1e-14)


@pytest.mark.parametrize("width", [4, 16])
@pytest.mark.parametrize("batch", [2, 8])
def test_backprop_fd(width, batch):
    r = np.random.default_rng(width * batch)
    p = init_mlp([3, width, width, 2], make_rng(width + batch))
    for L in p.layers:
        L.b += r.normal(scale=0.1, size=L.b.shape)
        if L.normed:
            L.gamma += r.normal(scale=0.1, size=L.gamma.shape)
            L.beta += r.normal(scale=0.1, size=L.beta.shape)
    X = r.normal(size=(batch, 3))
    W = r.normal(size=(batch, 2))
    _, cache = mlp_forward(p, X, update_running=False)
    grads, gin = mlp_backward(p, cache, W)
    for key in p.param_names():
        num = _fd_param(p, X, W, key)
        if key[1] == "b" and p.layers[key[0]].normed:
            # batchnorm subtracts the batch mean, so a preceding bias has exactly zero effect
            assert np.abs(grads[key]).max() <= 1e-12 and np.abs(num).max() <= 1e-9
            continue
        # central differences cannot resolve below ~ eps |f| / h; with batch 2 batchnorm
        # saturates and first-layer gradients sit at that level
        noise = 10 * np.finfo(float).eps * (abs(_probe(p, X, W)) + 1.0) / 1e-5
        scale = np.maximum(np.abs(grads[key]), np.abs(num))
        assert np.all(np.abs(grads[key] - num) <= 1e-4 * scale + noise), key


def test_train_eval_consistency(rng):
    p = init_mlp([3, 5, 2], make_rng(3))
    X = rng.normal(size=(12, 3))
    _, cache = mlp_forward(p, X, update_running=False)
    p.layers[0].running_mean = cache.steps[0]["mu"].copy()
    p.layers[0].running_var = cache.steps[0]["var"].copy()
    a, _ = mlp_forward(p, X, mode="train", update_running=False)
    b, _ = mlp_forward(p, X, mode="eval")
    np.testing.assert_allclose(a, b, atol=1e-6)


def test_save_load_roundtrip(tmp_path):
    p = init_mlp([3, 5, 2], make_rng(4))
    p.save(tmp_path / "m.npz")
    q = MlpParams.load(tmp_path / "m.npz")
    for a, b in zip(p.layers, q.layers):
        np.testing.assert_array_equal(a.W, b.W)
        np.testing.assert_array_equal(a.running_var, b.running_var) if a.normed else None
    assert q.sizes == [3, 5, 2]


def test_sgd_step_moves_against_gradient(rng):
    p = init_mlp([3, 2], make_rng(5), batchnorm=False)
    W0 = p.layers[0].W.copy()
    sgd_step(p, {(0, "W"): np.ones_like(W0)}, 0.1)
    np.testing.assert_allclose(p.layers[0].W, W0 - 0.1)


def test_jacobian_norm(rng):
    zero = MlpParams([Layer(np.zeros((3, 2)), np.zeros(2))])
    assert jacobian_norm_estimate(zero, rng.normal(size=3)) == 0.0
    W = rng.normal(size=(4, 3))
    lin = MlpParams([Layer(W, np.zeros(3))])
    est = jacobian_norm_estimate(lin, rng.normal(size=4), iters=64)
    assert est == pytest.approx(np.linalg.norm(W), rel=0.05)
    net = init_mlp([4, 8, 3], make_rng(6))
    z = rng.normal(size=4)
    spread = lambda it: np.std([jacobian_norm_estimate(net, z, iters=it, seed=s) for s in range(20)])
    assert spread(128) < spread(16)


def test_bad_mode_and_batch():
    p = init_mlp([2, 3, 2], make_rng(0))
    with pytest.raises(ValueError):
        mlp_forward(p, np.zeros((4, 2)), mode="infer")
    with pytest.raises(ValueError):
        mlp_forward(p, np.zeros((1, 2)))
