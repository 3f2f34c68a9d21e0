import math

import numpy as np
import pytest

from ddcl.backbone import init_mlp, mlp_backward, mlp_forward
from ddcl.datasets import make_blobs, make_moons, standardize
from ddcl.gradients import objective_grads
from ddcl.losses import LossWeights
from ddcl.numerics import make_rng
from ddcl.trainer import (TRACE_COLUMNS, NumericalAbort, RunConfig, TrainTrace, anneal, detect_collapse,
                          feedback_correlation, separation, stability_margin, train)


def test_anneal():
    assert anneal(2.0, 0.5, 80, 0) == 2.0
    assert anneal(2.0, 0.5, 80, 10 ** 6) == 0.5
    assert anneal(2.0, 0.1, 80, 80) == pytest.approx(2 / math.e)


def test_separation(rng):
    assert separation(np.ones((3, 4))) == 0.0
    assert separation(np.array([[0.0, 2.0]])) == pytest.approx(4.0)
    P = rng.normal(size=(3, 5))
    pairs = [np.sum((P[:, i] - P[:, j]) ** 2) for i in range(5) for j in range(i + 1, 5)]
    assert separation(P) == pytest.approx(np.mean(pairs), abs=1e-12)
    with pytest.raises(ValueError):
        separation(np.ones((2, 1)))


def test_square_fixed_point():
    X = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    r = train(X, RunConfig(k=4, T0=0.01, T_min=0.01, epochs=5), init_P=X.T)
    np.testing.assert_allclose(r.P, X.T, atol=1e-12)
    s = r.trace.column("s")
    assert np.all(s == s[0])
    assert r.trace.column("l_q").max() <= 1e-12


def test_collapse_verdict():
    P0 = np.array([[0.0, 3.0]])
    assert not detect_collapse(None, P0, P0).collapsed
    assert detect_collapse(None, P0, np.array([[1.0, 1.0]])).collapsed


def test_feedback_correlation_constructed(rng):
    s = np.linspace(0, 5, 50)
    tr = TrainTrace(rows=[{"s": a, "k_mean": -a + 0.01 * rng.normal()} for a in s])
    assert feedback_correlation(tr) < -0.99
    with pytest.raises(ValueError):
        feedback_correlation(TrainTrace(rows=[{"s": 1.0, "k_mean": 1.0}]))


def test_stability_margin():
    P = np.eye(3)
    bound, ratio, ok = stability_margin(P, 1.0, 4.0, 0.1, 0.1)
    assert bound == pytest.approx(1 + np.sqrt(3))
    assert ratio == 1.0 and ok
    bound, ratio, ok = stability_margin(P, 1e6, 4.0, 10.0, 0.1)
    assert bound < 1.001 and not ok


def test_config_validation(tmp_path):
    with pytest.raises(ValueError):
        RunConfig(T0=0.5, T_min=1.0)
    with pytest.raises(ValueError):
        RunConfig(loss_kind="mse")
    with pytest.raises(ValueError):
        RunConfig(prototype_mode="dual", batch_size=32)
    with pytest.raises(ValueError):
        RunConfig(k=3, eta=0.1, lam=0.1, lyapunov_check=True)
    with pytest.raises(ValueError):
        RunConfig.from_dict({"k": 2, "colour": "red"})
    c = RunConfig(k=3, T0=2.0, T_min=0.5, phases=[{"epoch": 5, "lr_dcl": 0.01}])
    c.save(tmp_path / "c.json")
    assert RunConfig.load(tmp_path / "c.json") == c


def test_eta_ramp():
    c = RunConfig(eta=0.05, eta_ramp_epochs=100)
    assert c.eta_at(0) == 0.0 and c.eta_at(50) == pytest.approx(0.025) and c.eta_at(500) == 0.05


def _moons():
    ds = make_moons(200, 0.1, seed=0)
    return standardize(ds.features), ds.labels


def test_determinism():
    X, y = _moons()
    c = RunConfig(k=2, epochs=20, seed=3)
    a, b = train(X, c, y), train(X, c, y)
    assert a.trace.rows == b.trace.rows
    np.testing.assert_array_equal(a.P, b.P)


def test_moons_no_v_violations_and_no_collapse():
    X, y = _moons()
    for T in (0.1, 1.0):
        r = train(X, RunConfig(k=2, T0=T, T_min=T, epochs=100, init="plusplus"), y)
        assert r.trace.v_violations == 0
        assert r.trace.column("v").min() >= -1e-12
        assert not detect_collapse(r.trace, r.P_init, r.P).collapsed
        assert r.trace.rows[-1]["acc"] > 0.8


def test_trace_columns_and_csv(tmp_path):
    X, y = _moons()
    r = train(X, RunConfig(k=2, epochs=3), y)
    assert set(TRACE_COLUMNS) <= set(r.trace.rows[0])
    r.trace.to_csv(tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == ",".join(TRACE_COLUMNS) and len(lines) == 4


def test_no_labels_leaves_metrics_blank(tmp_path):
    X, _ = _moons()
    r = train(X, RunConfig(k=2, epochs=3))
    assert r.trace.rows[-1]["acc"] is None
    r.trace.to_csv(tmp_path / "t.csv")
    assert (tmp_path / "t.csv").read_text().splitlines()[1].endswith(",,,")


def test_stop_gradient_backbone_updates_identical(rng):
    X = rng.normal(size=(16, 5))
    bb = init_mlp([5, 8, 3], make_rng(0))
    F, cache = mlp_forward(bb, X, update_running=False)
    P = rng.normal(size=(3, 4))
    g = {}
    for base in ("lq", "lols"):
        og = objective_grads(F, P, 0.7, LossWeights(), base, stop_gradient=True)
        g[base], _ = mlp_backward(bb, cache, og.grad_Z)
    for key in g["lq"]:
        assert np.max(np.abs(g["lq"][key] - g["lols"][key])) <= 1e-10


def test_dual_mode_and_blobs():
    ds = make_blobs(200, 3, seed=1)
    X = standardize(ds.features)
    r = train(X, RunConfig(k=3, epochs=60, prototype_mode="dual", lr_dcl=0.01, init="plusplus", seed=1), ds.labels)
    assert r.state.mode == "dual" and r.state.w2.shape == (200, 3)
    np.testing.assert_allclose(r.P, X.T @ r.state.w2)
    assert r.trace.rows[-1]["acc"] > 0.9


def test_minibatch_backbone_softce_and_phases():
    ds = make_blobs(120, 3, seed=2)
    X = standardize(ds.features)
    bb = init_mlp([2, 8, 4], make_rng(0))
    c = RunConfig(k=3, epochs=6, batch_size=32, loss_kind="softce", lr_backbone=1e-3,
                  phases=[{"epoch": 3, "lr_dcl": 0.01}], margin_every=2)
    r = train(X, c, ds.labels, backbone=bb)
    assert len(r.trace.rows) == 6 and len(r.trace.margins) == 3
    assert all(np.isfinite(r.trace.column("l_q")))


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_numerical_abort():
    X, _ = _moons()
    with pytest.raises(NumericalAbort):
        train(X, RunConfig(k=2, epochs=300, lr_dcl=1e3))


def test_rejects_bad_inputs():
    with pytest.raises(ValueError):
        train(np.zeros((1, 2)), RunConfig(k=2))
    with pytest.raises(ValueError):
        train(np.array([[np.nan, 1.0], [0.0, 0.0]]), RunConfig(k=2))
    with pytest.raises(ValueError):
        train(np.zeros((4, 2)), RunConfig(k=2), labels=np.zeros(3))
