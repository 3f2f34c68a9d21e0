"""Small MLP feature extractor (linear -> batchnorm -> ReLU per hidden layer).

Backprop is written out by hand, including the batch-statistics terms of
batch normalization. The last layer is linear with no normalization.
"""

from dataclasses import dataclass, field

import numpy as np

BN_EPS = 1e-5


@dataclass
class Layer:
    W: np.ndarray
    b: np.ndarray
    gamma: np.ndarray = None
    beta: np.ndarray = None
    running_mean: np.ndarray = None
    running_var: np.ndarray = None

    @property
    def normed(self):
        return self.gamma is not None


@dataclass
class MlpParams:
    layers: list
    momentum: float = 0.9

    @property
    def sizes(self):
        return [self.layers[0].W.shape[0]] + [L.W.shape[1] for L in self.layers]

    def param_names(self):
        names = []
        for i, L in enumerate(self.layers):
            names += [(i, "W"), (i, "b")]
            if L.normed:
                names += [(i, "gamma"), (i, "beta")]
        return names

    def copy(self):
        layers = []
        for L in self.layers:
            layers.append(Layer(*[None if a is None else a.copy() for a in
                                  (L.W, L.b, L.gamma, L.beta, L.running_mean, L.running_var)]))
        return MlpParams(layers, self.momentum)

    def save(self, path):
        arrays = {}
        for i, L in enumerate(self.layers):
            for name in ("W", "b", "gamma", "beta", "running_mean", "running_var"):
                a = getattr(L, name)
                if a is not None:
                    arrays[f"layer{i}_{name}"] = a
        np.savez(path, momentum=np.array(self.momentum), **arrays)

    @classmethod
    def load(cls, path):
        data = np.load(path)
        layers = []
        i = 0
        while f"layer{i}_W" in data:
            get = lambda name: data[f"layer{i}_{name}"] if f"layer{i}_{name}" in data else None
            layers.append(Layer(get("W"), get("b"), get("gamma"), get("beta"),
                                get("running_mean"), get("running_var")))
            i += 1
        return cls(layers, float(data["momentum"]))


@dataclass
class ForwardCache:
    X: np.ndarray
    mode: str
    steps: list = field(default_factory=list)


def init_mlp(sizes, rng, batchnorm=True, momentum=0.9):
    """He-scaled Gaussian weights; batchnorm scale 1, shift 0."""
    layers = []
    for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        W = rng.standard_normal((fan_in, fan_out)) * np.sqrt(2.0 / fan_in)
        b = np.zeros(fan_out)
        hidden = i < len(sizes) - 2
        if hidden and batchnorm:
            layers.append(Layer(W, b, np.ones(fan_out), np.zeros(fan_out),
                                np.zeros(fan_out), np.ones(fan_out)))
        else:
            layers.append(Layer(W, b))
    return MlpParams(layers, momentum)


def mlp_forward(params, X, mode="train", update_running=True):
    if mode not in ("train", "eval"):
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    X = np.atleast_2d(np.asarray(X, float))
    if mode == "train" and X.shape[0] < 2 and any(L.normed for L in params.layers):
        raise ValueError("batch statistics need at least 2 samples in train mode")
    cache = ForwardCache(X, mode)
    h = X
    last = len(params.layers) - 1
    for i, L in enumerate(params.layers):
        inp = h
        pre = inp @ L.W + L.b
        step = {"inp": inp, "pre": pre}
        out = pre
        if L.normed:
            if mode == "train":
                mu = pre.mean(axis=0)
                var = pre.var(axis=0)
                if update_running:
                    m = params.momentum
                    L.running_mean = m * L.running_mean + (1 - m) * mu
                    L.running_var = m * L.running_var + (1 - m) * var
            else:
                mu, var = L.running_mean, L.running_var
            inv_std = 1.0 / np.sqrt(var + BN_EPS)
            xhat = (pre - mu) * inv_std
            step.update(mu=mu, var=var, inv_std=inv_std, xhat=xhat)
            out = L.gamma * xhat + L.beta
        if i < last:
            step["relu_mask"] = out > 0
            out = out * step["relu_mask"]
        cache.steps.append(step)
        h = out
    return h, cache


def mlp_backward(params, cache, grad_out):
    """Return ``(grads, grad_input)``; ``grads`` maps ``(layer, name)`` to arrays."""
    grad_out = np.asarray(grad_out, float)
    if len(cache.steps) != len(params.layers):
        raise ValueError("cache does not match these parameters")
    last_out = params.layers[-1].W.shape[1]
    if grad_out.shape != (cache.X.shape[0], last_out):
        raise ValueError(f"grad shape {grad_out.shape} does not match output {(cache.X.shape[0], last_out)}")
    grads = {}
    g = grad_out
    last = len(params.layers) - 1
    for i in range(last, -1, -1):
        L = params.layers[i]
        step = cache.steps[i]
        if i < last:
            g = g * step["relu_mask"]
        if L.normed:
            xhat = step["xhat"]
            grads[(i, "gamma")] = np.sum(g * xhat, axis=0)
            grads[(i, "beta")] = np.sum(g, axis=0)
            dxhat = g * L.gamma
            if cache.mode == "train":
                n = g.shape[0]
                g = step["inv_std"] / n * (
                    n * dxhat - dxhat.sum(axis=0) - xhat * np.sum(dxhat * xhat, axis=0)
                )
            else:
                g = dxhat * step["inv_std"]
        grads[(i, "W")] = step["inp"].T @ g
        grads[(i, "b")] = g.sum(axis=0)
        g = g @ L.W.T
    return grads, g


def sgd_step(params, grads, lr):
    for (i, name), gr in grads.items():
        arr = getattr(params.layers[i], name)
        arr -= lr * gr


def jacobian_norm_estimate(params, z_probe, iters=32, seed=0, eps=1e-6):
    """Hutchinson estimate of the Frobenius norm of the input-output Jacobian.

    Rademacher probes, forward-difference Jacobian-vector products in eval
    mode at the point ``z_probe``.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    x = np.atleast_2d(np.asarray(z_probe, float))
    rng = np.random.Generator(np.random.PCG64(seed))
    f0, _ = mlp_forward(params, x, mode="eval")
    total = 0.0
    for _ in range(iters):
        v = rng.choice([-1.0, 1.0], size=x.shape)
        f1, _ = mlp_forward(params, x + eps * v, mode="eval")
        jv = (f1 - f0) / eps
        total += float(np.sum(jv * jv))
    return float(np.sqrt(total / (iters * x.shape[0])))
