"""Command-line runner: ``ddcl <subcommand> [options]``.

Exit codes: 0 success, 2 config error, 3 data error, 4 numerical abort,
5 acceptance-check failure (``--check``) or gradient check failure.
"""

import argparse
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import experiments
from .backbone import init_mlp, mlp_backward, mlp_forward
from .datasets import (DataError, load_csv, make_blobs, make_circles, make_madelon_style, make_moons,
                       make_spiral, save_csv, standardize)
from .flow import flow_init, run_flow
from .gradients import finite_diff_check, grad_P, grad_q, grad_z
from .losses import LossWeights, ols_loss, quantization_loss
from .assignment import soft_assign
from .metrics import evaluate
from .numerics import make_rng
from .trainer import NumericalAbort, RunConfig

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NAN, EXIT_CHECK = 0, 2, 3, 4, 5

log = logging.getLogger("ddcl")


class ConfigError(ValueError):
    pass


def _overrides(args):
    """Merge --config JSON with flag overrides; validated against RunConfig."""
    out = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {args.config}: {e}") from e
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a flat JSON object")
        known = {f.name for f in fields(RunConfig)}
        bad = sorted(set(raw) - known)
        if bad:
            raise ConfigError(f"unknown config keys: {bad}")
        # the block fixes its own k, schedule and seed; the file may override anything else
        out.update(raw)
    if getattr(args, "entropy_sign", None) is not None:
        out["entropy_sign"] = args.entropy_sign
    if getattr(args, "proto_mode", None):
        out["prototype_mode"] = args.proto_mode
    if getattr(args, "stop_gradient", None):
        out["stop_gradient"] = args.stop_gradient == "on"
    try:
        RunConfig(**{k: v for k, v in out.items() if k != "seed"}).validate()
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid configuration: {e}") from e
    return out


def _echo_config(out, args, overrides):
    Path(out).mkdir(parents=True, exist_ok=True)
    resolved = {"command": args.command, "seeds": getattr(args, "seeds", None),
                "seed": getattr(args, "seed", None), "data": getattr(args, "data", None),
                "overrides": overrides}
    with open(Path(out) / "resolved_config.json", "w") as fh:
        json.dump(resolved, fh, indent=2, sort_keys=True)


def _report(summary, args):
    for name, c in summary.checks.items():
        print(f"{'PASS' if c['passed'] else 'FAIL'} {summary.block}.{name}: {c['value']} ({c['threshold']})")
    print(f"summary written to {Path(args.out) / 'summary.json'}")
    if args.check and not summary.passed:
        return EXIT_CHECK
    return EXIT_OK


def _run_block(args):
    ov = _overrides(args)
    _echo_config(args.out, args, ov)
    n = args.seeds
    s0 = args.seed
    b = args.command
    if b == "block1":
        summ = experiments.block1(args.out, seeds=n or 10, base_seed=s0, overrides=ov)
    elif b == "block2":
        summ = experiments.block2(args.data, args.out, seeds=n or 5, base_seed=s0, overrides=ov)
    elif b == "block3":
        summ = experiments.block3(args.out, seeds=n or 5, base_seed=s0, overrides=ov)
    elif b == "block5":
        summ = experiments.block5(args.data, args.out, seeds=n or 3, base_seed=s0, overrides=ov)
    else:
        summ = experiments.block6(args.data, args.out, seeds=n or 5, base_seed=s0, use_blobs=args.blobs)
    return _report(summ, args)


def _v_expanded(Z, P, Q):
    # polynomial form of V; equals variance_term on the simplex and is the
    # function whose q-gradient grad_q("v") returns off the simplex too
    return float(np.mean(Q @ np.sum(P * P, axis=0) - np.sum((Q @ P.T) ** 2, axis=1)))


def gradcheck(instances=20, seed=0, tol=1e-4):
    """Finite-difference check of every analytic gradient; returns {name: max rel err}."""
    rng = make_rng(seed)
    worst = {}

    def note(name, rep):
        worst[name] = max(worst.get(name, 0.0), rep.max_rel_err)

    for _ in range(instances):
        d, k = int(rng.integers(2, 6)), int(rng.integers(2, 5))
        z = rng.normal(size=d)
        P = rng.normal(size=(d, k))
        q = rng.dirichlet(np.ones(k))
        T = float(rng.uniform(0.5, 2.0))
        Z1 = z[None, :]
        losses = (("lq", quantization_loss), ("lols", ols_loss),
                  ("v", _v_expanded))
        for kind, fn in losses:
            note(f"grad_q/{kind}", finite_diff_check(lambda qq: fn(Z1, P, qq[None, :]), q, grad_q(kind, z, P, q)))
            note(f"grad_P/{kind}", finite_diff_check(lambda PP: fn(Z1, PP, q[None, :]), P, grad_P(kind, z, P, q)))
        for kind, fn in (("lq", quantization_loss), ("lols", ols_loss)):
            full = lambda zz: fn(zz[None, :], P, soft_assign(zz, P, T)[None, :])
            note(f"grad_z/{kind}", finite_diff_check(full, z, grad_z(kind, z, P, T, stop_gradient=False)))
        # MLP backprop of a random linear readout
        params = init_mlp([d, 6, 3], make_rng(int(rng.integers(1 << 30))), batchnorm=True)
        X = rng.normal(size=(5, d))
        W = rng.normal(size=(5, 3))

        def f(xx):
            out, _ = mlp_forward(params, xx.reshape(X.shape), update_running=False)
            return float(np.sum(out * W))

        _, cache = mlp_forward(params, X, update_running=False)
        _, gin = mlp_backward(params, cache, W)
        note("mlp/input", finite_diff_check(f, X.ravel(), gin.ravel()))
    return worst, all(v <= tol for v in worst.values())


def _cmd_gradcheck(args):
    worst, ok = gradcheck(args.instances, args.seed)
    for name, err in sorted(worst.items()):
        print(f"{'PASS' if err <= 1e-4 else 'FAIL'} {name}: max rel err {err:.3e}")
    return EXIT_OK if ok else EXIT_CHECK


def _load(path, label_column="last"):
    try:
        return load_csv(path, label_column=label_column)
    except FileNotFoundError as e:
        raise DataError(f"data file not found: {path}") from e


def _cmd_flow(args):
    if args.data:
        Z = standardize(_load(args.data).features)
    else:
        Z = make_blobs(400, args.k, seed=args.seed).features
    w = LossWeights(args.beta, args.gamma, args.eta, args.lam)
    cert, _, _ = run_flow(Z, flow_init(Z, args.k, seed=args.seed), w, steps=args.steps)
    Path(args.out).mkdir(parents=True, exist_ok=True)
    path = Path(args.out) / "flow_certificate.json"
    print(cert.to_json(path))
    ok = cert.max_increase <= 1e-9 and cert.bounded and cert.kkt_final < 1e-3
    return EXIT_CHECK if args.check and not ok else EXIT_OK


GENERATORS = {
    "moons": lambda a: make_moons(a.n or 300, a.noise if a.noise is not None else 0.1, seed=a.seed),
    "circles": lambda a: make_circles(a.n or 300, a.noise if a.noise is not None else 0.05, seed=a.seed),
    "spiral": lambda a: make_spiral(a.n or 300, noise_sd=a.noise if a.noise is not None else 0.05, seed=a.seed),
    "blobs": lambda a: make_blobs(a.n or 400, a.k, seed=a.seed),
    "madelon": lambda a: make_madelon_style(a.n or 100, a.d, seed=a.seed),
}


def _cmd_gen_data(args):
    ds = GENERATORS[args.kind](args)
    save_csv(ds, args.out)
    print(f"wrote {ds.n} x {ds.d} ({ds.name}) to {args.out}")
    return EXIT_OK


def _labels_from(path):
    ds = _load(path, label_column=None)
    if ds.features.shape[1] == 1:
        v = ds.features[:, 0]
    else:
        v = ds.features[:, -1]
    if not np.all(v == np.round(v)):
        raise DataError(f"{path}: labels must be integers")
    return v.astype(int)


def _cmd_metrics(args):
    a, b = _labels_from(args.truth), _labels_from(args.pred)
    if a.shape != b.shape:
        raise DataError(f"label files differ in length: {a.size} vs {b.size}")
    print(json.dumps(evaluate(a, b), indent=2))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="ddcl", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    for name, needs_data in (("block1", False), ("block2", True), ("block3", False),
                             ("block5", True), ("block6", True)):
        s = sub.add_parser(name, help=f"reproduce experiment {name}")
        s.add_argument("--seed", type=int, default=0, help="first seed")
        s.add_argument("--seeds", type=int, default=None, help="number of seeds")
        s.add_argument("--out", default=f"runs/{name}")
        s.add_argument("--config", help="flat JSON of RunConfig fields")
        s.add_argument("--check", action="store_true", help="exit 5 when an acceptance threshold fails")
        s.add_argument("--entropy-sign", type=int, choices=(-1, 1), default=None)
        s.add_argument("--proto-mode", choices=("direct", "dual"), default=None)
        s.add_argument("--stop-gradient", choices=("on", "off"), default=None)
        if needs_data:
            s.add_argument("--data", default="data/digits.csv", help="digits CSV (labels in last column)")
        if name == "block6":
            s.add_argument("--blobs", action="store_true", help="use a synthetic blob stream instead of digits")
        s.set_defaults(func=_run_block)

    s = sub.add_parser("gradcheck", help="finite-difference check of analytic gradients")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--instances", type=int, default=20)
    s.set_defaults(func=_cmd_gradcheck)

    s = sub.add_parser("flow", help="run the reduced energy flow and emit its certificate")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--data")
    s.add_argument("--k", type=int, default=4)
    s.add_argument("--steps", type=int, default=2000)
    s.add_argument("--beta", type=float, default=0.1)
    s.add_argument("--gamma", type=float, default=0.1)
    s.add_argument("--eta", type=float, default=0.01)
    s.add_argument("--lam", type=float, default=1.0)
    s.add_argument("--out", default="runs/flow")
    s.add_argument("--check", action="store_true")
    s.set_defaults(func=_cmd_flow)

    s = sub.add_parser("gen-data", help="write a synthetic dataset to CSV")
    s.add_argument("kind", choices=sorted(GENERATORS))
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--k", type=int, default=4)
    s.add_argument("--d", type=int, default=10)
    s.add_argument("--noise", type=float, default=None)
    s.set_defaults(func=_cmd_gen_data)

    s = sub.add_parser("metrics", help="ACC/NMI/ARI between two label CSVs")
    s.add_argument("truth")
    s.add_argument("pred")
    s.set_defaults(func=_cmd_metrics)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalAbort as e:
        print(f"numerical abort: {e}", file=sys.stderr)
        return EXIT_NAN
    except (DataError, FileNotFoundError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
