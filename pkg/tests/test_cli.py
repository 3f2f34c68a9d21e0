import json

import numpy as np
import pytest

from ddcl.cli import gradcheck, main
from ddcl.experiments import validate_trace_csv


def test_gen_data_and_metrics(tmp_path, capsys):
    for kind in ("moons", "circles", "spiral", "blobs", "madelon"):
        assert main(["gen-data", kind, "--out", str(tmp_path / f"{kind}.csv"), "--n", "40"]) == 0
    csv = str(tmp_path / "moons.csv")
    capsys.readouterr()
    assert main(["metrics", csv, csv]) == 0
    assert json.loads(capsys.readouterr().out) == {"acc": 1.0, "nmi": 1.0, "ari": 1.0}
    short = tmp_path / "short.csv"
    short.write_text("0\n1\n")
    assert main(["metrics", csv, str(short)]) == 3
    assert main(["metrics", csv, str(tmp_path / "absent.csv")]) == 3


def test_gen_data_bad_params(tmp_path):
    assert main(["gen-data", "blobs", "--n", "2", "--k", "4", "--out", str(tmp_path / "x.csv")]) == 2


def test_gradcheck():
    worst, ok = gradcheck(instances=5, seed=3)
    assert ok and max(worst.values()) <= 1e-4
    assert main(["gradcheck", "--instances", "3"]) == 0


def test_flow_certificate(tmp_path):
    assert main(["flow", "--out", str(tmp_path), "--steps", "300", "--check"]) == 0
    cert = json.loads((tmp_path / "flow_certificate.json").read_text())
    assert {"max_increase", "bounded", "kkt_initial", "kkt_final"} <= set(cert)
    assert cert["max_increase"] <= 1e-9


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"no_such_key": 1}')
    assert main(["block1", "--out", str(tmp_path / "o"), "--config", str(bad)]) == 2
    bad.write_text('{"T0": -1.0}')
    assert main(["block1", "--out", str(tmp_path / "o"), "--config", str(bad)]) == 2
    bad.write_text("not json")
    assert main(["block1", "--out", str(tmp_path / "o"), "--config", str(bad)]) == 2
    with pytest.raises(SystemExit):
        main(["block1", "--proto-mode", "sideways"])


def test_missing_digits(tmp_path):
    for b in ("block2", "block5", "block6"):
        assert main([b, "--data", str(tmp_path / "none.csv"), "--out", str(tmp_path / b)]) == 3


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_numerical_abort(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"lr_dcl": 1000.0, "epochs": 300}')
    assert main(["block1", "--seeds", "1", "--out", str(tmp_path / "o"), "--config", str(cfg)]) == 4


def test_block6_blobs_traces_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["block6", "--blobs", "--seeds", "2", "--out", str(a)]) == 0
    assert main(["block6", "--blobs", "--seeds", "2", "--out", str(b)]) == 0
    assert "PASS block6.parity" in capsys.readouterr().out
    assert (a / "summary.json").read_bytes() == (b / "summary.json").read_bytes()
    assert json.loads((a / "resolved_config.json").read_text())["command"] == "block6"
    traces = sorted((a / "traces").glob("*.csv"))
    assert traces
    for t in traces:
        assert validate_trace_csv(t) == []


def test_block1_single_seed_trace_schema(tmp_path):
    assert main(["block1", "--seeds", "1", "--out", str(tmp_path), "--check"]) in (0, 5)
    traces = sorted((tmp_path / "traces").glob("*.csv"))
    assert len(traces) > 0
    for t in traces:
        assert validate_trace_csv(t) == [], t.name
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["block"] == "block1" and summary["checks"]
    assert list(tmp_path.glob("*.svg"))


def test_validate_trace_detects_problems(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("epoch,foo\n0,nan\n")
    assert validate_trace_csv(p)
