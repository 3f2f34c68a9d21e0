"""Experiment blocks: each returns an ExperimentSummary and writes CSV/JSON/SVG
artifacts under ``out_dir``."""

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .backbone import init_mlp
from .baselines import DeepClusterConfig, deepcluster_lite, kmeans, minibatch_kmeans, pca_standardize
from .datasets import (DataError, load_csv, make_blobs, make_circles, make_madelon_style, make_moons,
                       make_spiral, standardize)
from .incremental import StreamConfig, batches_of, stream_train
from .metrics import evaluate
from .numerics import make_rng
from .plots import line_plot
from .trainer import TRACE_COLUMNS, RunConfig, detect_collapse, feedback_correlation, train

BLOCK1_TEMPS = (0.1, 0.5, 1.0)
BLOCK3_DIMS = (10, 50, 200, 500, 1000, 5000)
MOONS_REFERENCE_ACC = 0.847


@dataclass
class ExperimentSummary:
    block: str
    seeds: list
    methods: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c["passed"] for c in self.checks.values())

    def check(self, name, value, passed, threshold=""):
        self.checks[name] = {"value": _jsonable(value), "threshold": threshold, "passed": bool(passed)}

    def to_dict(self):
        return _jsonable(asdict(self))

    def save(self, out_dir):
        path = Path(out_dir) / "summary.json"
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
        return path


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        return None if not np.isfinite(v) else float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def mean_std(values):
    """Mean and sample standard deviation (n-1 denominator; 0 for a single value)."""
    a = np.asarray(values, float)
    return float(a.mean()), float(a.std(ddof=1)) if a.size > 1 else 0.0


def aggregate(runs):
    """``runs`` is a list of metric dicts; returns mean/std per metric."""
    out = {"runs": len(runs)}
    for m in ("acc", "nmi", "ari"):
        out[m] = list(mean_std([r[m] for r in runs]))
    return out


def _workers():
    try:
        return max(1, int(os.environ.get("DDCL_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn, items):
    items = list(items)
    n = _workers()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def _write_rows(path, rows):
    if not rows:
        return
    cols = list(rows[0].keys())
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols)
        w.writeheader()
        for r in rows:
            w.writerow({k: _jsonable(v) for k, v in r.items()})


def _prep(out_dir):
    out = Path(out_dir)
    (out / "traces").mkdir(parents=True, exist_ok=True)
    return out


def _config(base, overrides):
    cfg = replace(base, **(overrides or {}))
    cfg.validate()
    return cfg


def load_digits_csv(path):
    if path is None or not Path(path).exists():
        raise FileNotFoundError(
            f"digits CSV not found at {path!r}; create it with "
            "`python3 scripts/fetch_digits.py data/digits.csv` and pass --data data/digits.csv"
        )
    ds = load_csv(path)
    if ds.labels is None:
        raise DataError(f"{path}: digits CSV needs a label column")
    return ds


# ---------------------------------------------------------------- block 1

def block1_datasets():
    return {
        "moons": make_moons(300, 0.1, seed=0),
        "circles": make_circles(300, 0.05, 0.5, seed=0),
        "spiral": make_spiral(300, seed=0),
        "blobs": make_blobs(400, 4, seed=0),
    }


def _block1_run(args):
    name, Z, y, k, T, loss, seed, overrides, trace_dir = args
    cfg = _config(RunConfig(k=k, T0=T, T_min=T, loss_kind=loss, seed=seed, init="plusplus",
                            epochs=200, lr_dcl=0.1), overrides)
    r = train(Z, cfg, labels=y)
    if trace_dir:
        r.trace.to_csv(Path(trace_dir) / f"{name}_{loss}_T{T}_seed{seed}.csv")
    v = detect_collapse(r.trace, r.P_init, r.P)
    last = r.trace.rows[-1]
    return {"dataset": name, "T": T, "loss": loss, "seed": seed,
            "acc": last["acc"], "nmi": last["nmi"], "ari": last["ari"],
            "s_initial": r.trace.s_initial, "s_final": v.final_S, "collapsed": v.collapsed,
            "v_violations": r.trace.v_violations, "v_final": last["v"],
            "corr_s_k": feedback_correlation(r.trace)}


def block1(out_dir, seeds=10, base_seed=0, overrides=None, write_traces=True):
    out = _prep(out_dir)
    data = block1_datasets()
    jobs = []
    for name, ds in data.items():
        Z = standardize(ds.features)
        for T in BLOCK1_TEMPS:
            for loss in ("lq", "lols"):
                for s in range(base_seed, base_seed + seeds):
                    jobs.append((name, Z, ds.labels, ds.n_classes, T, loss, s, overrides,
                                 str(out / "traces") if write_traces else None))
    rows = _map(_block1_run, jobs)
    _write_rows(out / "block1_runs.csv", rows)

    summ = ExperimentSummary("block1", list(range(base_seed, base_seed + seeds)))
    table = []
    for name in data:
        for T in BLOCK1_TEMPS:
            for loss in ("lq", "lols"):
                sel = [r for r in rows if r["dataset"] == name and r["T"] == T and r["loss"] == loss]
                agg = aggregate(sel)
                summ.methods[f"{name}/T={T}/{loss}"] = agg
                table.append({"dataset": name, "T": T, "loss": loss,
                              "acc_mean": agg["acc"][0], "acc_std": agg["acc"][1],
                              "s_final_mean": mean_std([r["s_final"] for r in sel])[0],
                              "collapses": sum(r["collapsed"] for r in sel),
                              "v_mean": mean_std([r["v_final"] for r in sel])[0],
                              "corr_s_k_mean": mean_std([r["corr_s_k"] for r in sel])[0],
                              "v_violations": sum(r["v_violations"] for r in sel)})
    _write_rows(out / "block1_table.csv", table)

    viol = sum(r["v_violations"] for r in rows)
    summ.check("v_violations", viol, viol == 0, "== 0")
    lq_coll = sum(r["collapsed"] for r in rows if r["loss"] == "lq")
    summ.check("lq_collapses", lq_coll, lq_coll == 0, "== 0")
    for name in ("moons", "circles"):
        c = sum(r["collapsed"] for r in rows if r["loss"] == "lols" and r["T"] == 1.0 and r["dataset"] == name)
        summ.check(f"lols_collapses_T1_{name}", c, c > 0, "> 0")
    moons = mean_std([r["acc"] for r in rows if r["dataset"] == "moons" and r["loss"] == "lq"])[0]
    summ.check("moons_acc", moons, abs(moons - MOONS_REFERENCE_ACC) <= 0.05, "0.847 +- 0.05")
    blobs = mean_std([r["acc"] for r in rows if r["dataset"] == "blobs" and r["loss"] == "lq"])[0]
    summ.check("blobs_acc", blobs, blobs > 0.9, "> 0.9")
    corr = mean_std([r["corr_s_k"] for r in rows if r["dataset"] == "moons" and r["loss"] == "lq"])[0]
    summ.check("moons_corr_s_k", corr, corr <= -0.3, "<= -0.3")
    summ.notes["moons_corr_s_k_by_T"] = {
        str(T): mean_std([r["corr_s_k"] for r in rows
                          if r["dataset"] == "moons" and r["loss"] == "lq" and r["T"] == T])[0]
        for T in BLOCK1_TEMPS}

    series = {}
    for loss, style in (("lq", "-"), ("lols", "--")):
        s = [np.mean([r["s_final"] for r in rows if r["dataset"] == "moons" and r["loss"] == loss and r["T"] == T])
             for T in BLOCK1_TEMPS]
        series[f"S(P) {loss}"] = (list(BLOCK1_TEMPS), s, style)
    line_plot(series, out / "block1_separation_vs_T.svg", "Moons: final separation vs temperature",
              "T", "S(P)")
    rate = {}
    for loss, style in (("lq", "-"), ("lols", "--")):
        rr = [100.0 * np.mean([r["collapsed"] for r in rows if r["dataset"] == "moons" and r["loss"] == loss and r["T"] == T])
              for T in BLOCK1_TEMPS]
        rate[loss] = (list(BLOCK1_TEMPS), rr, style)
    line_plot(rate, out / "block1_collapse_rate.svg", "Moons: collapse rate", "T", "% of runs")
    summ.save(out)
    return summ


# ---------------------------------------------------------------- block 2

BLOCK2_VARIANTS = {
    "ddcl_lq": dict(loss_kind="lq", T0=2.0, T_min=0.5),
    "ddcl_lols": dict(loss_kind="lols", T0=2.0, T_min=0.5),
    "ddcl_lq_T0.1": dict(loss_kind="lq", T0=0.1, T_min=0.1),
    "ddcl_lq_T2.0": dict(loss_kind="lq", T0=2.0, T_min=2.0),
}


def _block2_run(args):
    variant, Z, y, seed, overrides, trace_dir = args
    cfg = _config(RunConfig(k=10, tau=80.0, seed=seed, init="plusplus", epochs=200, lr_dcl=0.1,
                            **BLOCK2_VARIANTS[variant]), overrides)
    r = train(Z, cfg, labels=y)
    if trace_dir:
        r.trace.to_csv(Path(trace_dir) / f"{variant}_seed{seed}.csv")
    last = r.trace.rows[-1]
    return {"method": variant, "seed": seed, "acc": last["acc"], "nmi": last["nmi"], "ari": last["ari"],
            "corr_s_k": feedback_correlation(r.trace), "v_violations": r.trace.v_violations,
            "s": r.trace.column("s").tolist(), "k_mean": r.trace.column("k_mean").tolist()}


def block2(digits_csv, out_dir, seeds=5, base_seed=0, overrides=None):
    ds = load_digits_csv(digits_csv)
    out = _prep(out_dir)
    Z, _ = pca_standardize(ds.features, 20, standardize=True)
    Xs = standardize(ds.features)
    y = ds.labels
    seed_list = list(range(base_seed, base_seed + seeds))
    jobs = [(v, Z, y, s, overrides, str(out / "traces")) for v in BLOCK2_VARIANTS for s in seed_list]
    rows = _map(_block2_run, jobs)
    for s in seed_list:
        rows.append({"method": "kmeans", "seed": s, **evaluate(y, kmeans(Xs, 10, n_init=20, seed=s).labels)})
        rows.append({"method": "kmeans_pca", "seed": s, **evaluate(y, kmeans(Z, 10, n_init=20, seed=s).labels)})
        labels, _ = deepcluster_lite(Z, 10, DeepClusterConfig(rounds=10, seed=s), y_true=y)
        rows.append({"method": "deepcluster_lite", "seed": s, **evaluate(y, labels)})
    _write_rows(out / "block2_runs.csv",
                [{k: v for k, v in r.items() if k not in ("s", "k_mean")} for r in rows])

    summ = ExperimentSummary("block2", seed_list)
    for m in list(BLOCK2_VARIANTS) + ["kmeans", "kmeans_pca", "deepcluster_lite"]:
        summ.methods[m] = aggregate([r for r in rows if r["method"] == m])
    acc = {m: summ.methods[m]["acc"][0] for m in summ.methods}
    summ.check("ddcl_lq_acc", acc["ddcl_lq"], 0.50 <= acc["ddcl_lq"] <= 0.70, "[0.50, 0.70]")
    corr = mean_std([r["corr_s_k"] for r in rows if r["method"] == "ddcl_lq"])[0]
    summ.check("corr_s_k", corr, corr <= -0.5, "<= -0.5")
    summ.check("anneal_beats_T0.1", [acc["ddcl_lq"], acc["ddcl_lq_T0.1"]],
               acc["ddcl_lq"] > acc["ddcl_lq_T0.1"], "anneal > fixed T=0.1")
    summ.check("anneal_beats_T2.0", [acc["ddcl_lq"], acc["ddcl_lq_T2.0"]],
               acc["ddcl_lq"] > acc["ddcl_lq_T2.0"], "anneal > fixed T=2.0")
    viol = sum(r.get("v_violations", 0) for r in rows)
    summ.notes["v_violations"] = viol

    first = next(r for r in rows if r["method"] == "ddcl_lq")
    ep = list(range(len(first["s"])))
    s = np.asarray(first["s"])
    line_plot({"S(P) / max": (ep, s / max(s.max(), 1e-300)), "mean K": (ep, first["k_mean"], "--")},
              out / "block2_feedback.svg", "Digits: separation and concentration", "epoch", "value")
    summ.save(out)
    return summ


# ---------------------------------------------------------------- block 3

def _block3_run(args):
    d, seed, overrides = args
    ds = make_madelon_style(100, d, seed=seed)
    Z, y = ds.features, ds.labels
    res = []
    for loss in ("lq", "lols"):
        # squared distances grow linearly with d, so the temperature does too
        cfg = _config(RunConfig(k=2, T0=0.5 * d, T_min=0.5 * d, loss_kind=loss, seed=seed,
                                init="plusplus", epochs=200, lr_dcl=0.1), overrides)
        r = train(Z, cfg, labels=y)
        res.append({"d": d, "seed": seed, "method": f"ddcl_{loss}", **evaluate(y, r.labels)})
    labels, _ = deepcluster_lite(Z, 2, DeepClusterConfig(rounds=5, seed=seed))
    res.append({"d": d, "seed": seed, "method": "deepcluster_lite", **evaluate(y, labels)})
    Y, _ = pca_standardize(Z, min(10, d))
    res.append({"d": d, "seed": seed, "method": "kmeans_pca", **evaluate(y, kmeans(Y, 2, seed=seed).labels)})
    res.append({"d": d, "seed": seed, "method": "kmeans", **evaluate(y, kmeans(Z, 2, seed=seed).labels)})
    return res


BLOCK3_METHODS = ("ddcl_lq", "ddcl_lols", "deepcluster_lite", "kmeans_pca", "kmeans")


def block3(out_dir, seeds=5, base_seed=0, overrides=None, dims=BLOCK3_DIMS):
    out = _prep(out_dir)
    seed_list = list(range(base_seed, base_seed + seeds))
    rows = [r for chunk in _map(_block3_run, [(d, s, overrides) for d in dims for s in seed_list])
            for r in chunk]
    _write_rows(out / "block3_runs.csv", rows)
    summ = ExperimentSummary("block3", seed_list)
    for d in dims:
        for m in BLOCK3_METHODS:
            summ.methods[f"d={d}/{m}"] = aggregate([r for r in rows if r["d"] == d and r["method"] == m])
    acc = lambda d, m: summ.methods[f"d={d}/{m}"]["acc"][0]
    ok = all(acc(d, "ddcl_lq") >= acc(d, "ddcl_lols") for d in dims)
    summ.check("lq_geq_lols_every_d", {d: [acc(d, "ddcl_lq"), acc(d, "ddcl_lols")] for d in dims}, ok,
               "lq >= lols at every d")
    if 10 in dims:
        summ.check("d10_lq_acc", acc(10, "ddcl_lq"), acc(10, "ddcl_lq") >= 0.95, ">= 0.95")
    if 200 in dims:
        a, b = acc(200, "ddcl_lq"), acc(200, "deepcluster_lite")
        summ.check("d200_lq_beats_deepcluster", [a, b], a > b, "lq > deepcluster")
        summ.notes["d200_lq_beats_lols"] = acc(200, "ddcl_lq") > acc(200, "ddcl_lols")
    for metric in ("acc", "nmi"):
        series = {m: (list(dims), [summ.methods[f"d={d}/{m}"][metric][0] for d in dims]) for m in BLOCK3_METHODS}
        line_plot(series, out / f"block3_{metric}.svg", f"MADELON-style: {metric.upper()} vs d", "d",
                  metric.upper(), logx=True, vline=100)
    summ.save(out)
    return summ


# ---------------------------------------------------------------- block 5

BLOCK5_ARCH = (64, 256, 128, 32)
BLOCK5_EPOCHS = 300


def block5_config(loss, seed):
    return RunConfig(k=10, T0=2.0, T_min=0.5, tau=80.0, beta=0.1, eta=0.05, eta_ramp_epochs=100,
                     lam=1.1, lr_backbone=1e-3, lr_dcl=0.1, epochs=BLOCK5_EPOCHS, seed=seed,
                     stop_gradient=False, loss_kind=loss, init="plusplus")


def _block5_run(args):
    method, X, y, seed, overrides, trace_dir = args
    bb = init_mlp(list(BLOCK5_ARCH), make_rng(1000 + seed))
    if method == "deepcluster_e2e":
        # same backbone init and the same number of full-batch backbone updates
        cfg = DeepClusterConfig(rounds=15, head_epochs=BLOCK5_EPOCHS // 15, train_backbone=True,
                                backbone_lr=1e-3, batch_size=X.shape[0], seed=seed)
        labels, _ = deepcluster_lite(X, 10, cfg, backbone=bb, y_true=y)
        return {"method": method, "seed": seed, **evaluate(y, labels), "acc_curve": []}
    cfg = _config(block5_config(method.split("_")[1], seed), overrides)
    r = train(X, cfg, labels=y, backbone=bb)
    if trace_dir:
        r.trace.to_csv(Path(trace_dir) / f"{method}_seed{seed}.csv")
    last = r.trace.rows[-1]
    return {"method": method, "seed": seed, "acc": last["acc"], "nmi": last["nmi"], "ari": last["ari"],
            "acc_curve": r.trace.column("acc").tolist()}


def block5(digits_csv, out_dir, seeds=3, base_seed=0, overrides=None):
    ds = load_digits_csv(digits_csv)
    out = _prep(out_dir)
    X = standardize(ds.features)
    y = ds.labels
    seed_list = list(range(base_seed, base_seed + seeds))
    methods = ("ddcl_lq", "ddcl_lols", "deepcluster_e2e")
    rows = _map(_block5_run, [(m, X, y, s, overrides, str(out / "traces")) for m in methods for s in seed_list])
    Z, _ = pca_standardize(ds.features, 20, standardize=True)
    for s in seed_list:
        rows.append({"method": "kmeans_pca", "seed": s, **evaluate(y, kmeans(Z, 10, seed=s).labels), "acc_curve": []})
    _write_rows(out / "block5_runs.csv", [{k: v for k, v in r.items() if k != "acc_curve"} for r in rows])
    summ = ExperimentSummary("block5", seed_list)
    for m in methods + ("kmeans_pca",):
        summ.methods[m] = aggregate([r for r in rows if r["method"] == m])
    acc = {m: summ.methods[m]["acc"][0] for m in summ.methods}
    summ.check("lq_beats_lols", [acc["ddcl_lq"], acc["ddcl_lols"]], acc["ddcl_lq"] > acc["ddcl_lols"], "lq > lols")
    summ.check("lq_beats_deepcluster", [acc["ddcl_lq"], acc["deepcluster_e2e"]],
               acc["ddcl_lq"] > acc["deepcluster_e2e"], "lq > deepcluster e2e")
    lq = np.array([r["acc_curve"] for r in rows if r["method"] == "ddcl_lq"])
    lo = np.array([r["acc_curve"] for r in rows if r["method"] == "ddcl_lols"])
    if lq.size and lo.size:
        gap = np.abs(lq.mean(axis=0) - lo.mean(axis=0))
        summ.notes["acc_gap_first5"] = float(gap[:5].mean())
        summ.notes["acc_gap_last5"] = float(gap[-5:].mean())
        ep = list(range(lq.shape[1]))
        line_plot({"L_q": (ep, lq.mean(axis=0)), "L_OLS": (ep, lo.mean(axis=0), "--")},
                  out / "block5_acc.svg", "Digits end-to-end: ACC per epoch", "epoch", "ACC")
    summ.save(out)
    return summ


# ---------------------------------------------------------------- block 6

def block6_stream_config(seed):
    return StreamConfig(k=10, batch_size=50, T0=0.5, T_min=0.5, lr=0.5, mu=0.05,
                        init_shrink=0.1, seed=seed)


def _block6_run(args):
    Z, y, k, seed, trace_dir = args
    perm = make_rng(seed).permutation(Z.shape[0])
    Zs, ys = Z[perm], y[perm]
    cfg = replace(block6_stream_config(seed), k=k)
    r = stream_train(batches_of(Zs, cfg.batch_size), cfg, labels=ys)
    if trace_dir:
        r.to_csv(Path(trace_dir) / f"incremental_seed{seed}.csv")
    mb = minibatch_kmeans(Zs, k, cfg.batch_size, seed=seed)
    return {"seed": seed, "incremental": evaluate(ys, r.labels), "minibatch": evaluate(ys, mb.labels),
            "violations": r.feasibility_violations, "wh_steps": r.wh_steps, "mu_halvings": r.mu_halvings,
            "s_first": r.rows[0]["s"], "s_last": r.rows[-1]["s"],
            "seen": r.column("samples_seen").tolist(), "acc_curve": r.column("acc").tolist(),
            "s_curve": r.column("s").tolist()}


def block6(digits_csv, out_dir, seeds=5, base_seed=0, use_blobs=False, ceiling_acc=None):
    out = _prep(out_dir)
    if use_blobs:
        ds = make_blobs(2000, 4, seed=0)
        Z, k = standardize(ds.features), 4
    else:
        ds = load_digits_csv(digits_csv)
        Z, _ = pca_standardize(ds.features, 20, standardize=True)
        k = 10
    seed_list = list(range(base_seed, base_seed + seeds))
    res = _map(_block6_run, [(Z, ds.labels, k, s, str(out / "traces")) for s in seed_list])
    rows = [{"seed": r["seed"], "method": m, **r[m]} for r in res for m in ("incremental", "minibatch")]
    _write_rows(out / "block6_runs.csv", rows)
    summ = ExperimentSummary("block6", seed_list)
    inc = [r["incremental"]["acc"] for r in res]
    mb = [r["minibatch"]["acc"] for r in res]
    summ.methods["incremental_ddcl"] = aggregate([r["incremental"] for r in res])
    summ.methods["minibatch_kmeans"] = aggregate([r["minibatch"] for r in res])
    (m1, s1), (m2, s2) = mean_std(inc), mean_std(mb)
    pooled = float(np.sqrt((s1 ** 2 + s2 ** 2) / 2))
    summ.check("parity", {"diff": m1 - m2, "pooled_std": pooled}, abs(m1 - m2) <= 2 * pooled,
               "|diff| <= 2 pooled std")
    viol = sum(r["violations"] for r in res)
    summ.check("simplex_violations", viol, viol == 0, "== 0")
    grow = [r["s_last"] >= r["s_first"] for r in res]
    summ.check("separation_growth", grow, all(grow), "S(end) >= S(first batch) every seed")
    summ.notes["wh_steps"] = sum(r["wh_steps"] for r in res)
    summ.notes["mu_halvings"] = sum(r["mu_halvings"] for r in res)
    if ceiling_acc is None and not use_blobs:
        # full-batch DDCL on the same features as the reference ceiling
        ceiling_acc = _block2_run(("ddcl_lq", Z, ds.labels, base_seed, None, None))["acc"]
    if ceiling_acc is not None:
        summ.notes["below_batch_ceiling"] = bool(m1 < ceiling_acc and m2 < ceiling_acc)
        summ.notes["batch_ceiling_acc"] = ceiling_acc
    first = res[0]
    line_plot({"incremental DDCL": (first["seen"], first["acc_curve"])}, out / "block6_acc.svg",
              "Streaming ACC", "samples seen", "ACC")
    line_plot({"S(P)": (first["seen"], first["s_curve"])}, out / "block6_separation.svg",
              "Streaming separation", "samples seen", "S(P)")
    summ.save(out)
    return summ


def validate_trace_csv(path):
    """Return a list of schema problems (empty when the file conforms)."""
    problems = []
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        return ["empty file"]
    header = rows[0]
    allowed = (TRACE_COLUMNS, TRACE_COLUMNS + ["samples_seen"])
    if header not in allowed:
        problems.append(f"header {header} does not match schema")
    for i, r in enumerate(rows[1:], start=2):
        if len(r) != len(header):
            problems.append(f"line {i}: {len(r)} cells")
            continue
        for name, cell in zip(header, r):
            if cell == "" and name in ("acc", "nmi", "ari"):
                continue
            try:
                float(cell)
            except ValueError:
                problems.append(f"line {i}: column {name} not numeric: {cell!r}")
    return problems
