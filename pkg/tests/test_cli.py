import csv
import io
import json

import pytest

from specbarron import cli, network as nw
from specbarron.spectra import AtomicSpectrum, dump_spectrum

BENCH = "tests/fixtures/benchmark.json"
FAST = ["--replicates", "2", "--audit-points", "16384", "--quad-points", "2048"]


def run(argv, capsys):
    code = cli.main(argv)
    return code, capsys.readouterr()


def test_norms_fp_indicator(tmp_path, capsys):
    path = tmp_path / "fp.json"
    path.write_text(json.dumps({"type": "named", "family": "fp_indicator", "params": {"p": 1, "d": 1}}))
    code, out = run(["norms", "--spec", str(path), "--s", "0,1", "--format", "json"], capsys)
    assert code == 0
    rows = json.loads(out.out)["norms"]
    assert [round(r["upsilon"], 12) for r in rows] == [2.0, 1.0]


def test_norms_benchmark_csv(capsys):
    code, out = run(["norms", "--spec", BENCH, "--s", "0,0.5", "--flavor", "l1"], capsys)
    assert code == 0
    body = [ln for ln in out.out.splitlines() if not ln.startswith("#")]
    rows = list(csv.DictReader(io.StringIO("\n".join(body))))
    assert float(rows[0]["upsilon"]) == pytest.approx(1.0)
    assert float(rows[1]["upsilon"]) == pytest.approx(0.8 * 2 ** 0.5 + 0.2 * 5 ** 0.5)


def test_norms_divergent_exit(tmp_path, capsys):
    path = tmp_path / "div.json"
    path.write_text(json.dumps({"type": "radial-table", "dim": 1, "r": [0, 1], "g0": [1, 1],
                                "origin_exponent": -1.5}))
    code, out = run(["norms", "--spec", str(path), "--s", "0"], capsys)
    assert code == 2
    assert "divergent" in out.err


def test_missing_or_bad_spec(tmp_path, capsys):
    assert run(["norms"], capsys)[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["norms", "--spec", str(bad)], capsys)[0] == 2


def test_convergence_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["convergence", "--spec", BENCH, "--L", "1", "--s", "0.5", "--N", "8,16,32,64", "--seed", "3"] + FAST
    assert run(argv + ["--out", str(a)], capsys)[0] == 0
    assert run(argv + ["--out", str(b)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == ",".join(cli.CSV_FIELDS)
    assert lines[-1].startswith("# rate_fit slope=")
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[:-1]))))
    assert len(rows) == 8 and all(r["seed"] and r["config_hash"] for r in rows)


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"spec": BENCH, "s": [0.25], "flavor": "l1"}))
    code, out = run(["norms", "--config", str(cfg), "--s", "0", "--format", "json"], capsys)
    assert code == 0
    assert [r["s"] for r in json.loads(out.out)["norms"]] == [0.0]
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(["norms", "--config", str(cfg)], capsys)[0] == 2


def test_lowerbound_self_construct(capsys):
    code, out = run(["lowerbound", "--L", "1", "--N", "4", "--s", "0.5", "--eps", "0.1",
                     "--self-construct", "--random", "5"], capsys)
    assert code == 0
    assert "false" not in out.out


def test_lowerbound_zero_net_and_malformed(tmp_path, capsys):
    good = tmp_path / "zero.json"
    nw.save_network(nw.zero_network(1), good)
    code, _ = run(["lowerbound", "--L", "1", "--N", "2", "--s", "0.5", "--eps", "0.1", "--net", str(good)], capsys)
    assert code == 0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"format": "something-else"}))
    code, _ = run(["lowerbound", "--L", "1", "--N", "2", "--s", "0.5", "--eps", "0.1", "--net", str(bad)], capsys)
    assert code == 2


def test_embedding_gaussian(capsys):
    code, out = run(["embedding", "--family", "gauss", "--d", "1", "--s", "1", "--banach", "6"], capsys)
    assert code == 0
    report = json.loads(out.out)
    assert report["sandwich"][0]["lhs_ok"] and report["sandwich"][0]["rhs_ok"]


def test_construct_and_eval_round_trip(tmp_path, capsys):
    spec = tmp_path / "cos.json"
    dump_spectrum(AtomicSpectrum.cosine([1.0]), spec)
    net, report = tmp_path / "net.json", tmp_path / "rep.json"
    code, _ = run(["construct", "--spec", str(spec), "--L", "1", "--s", "0.5", "--N", "64",
                   "--out", str(net), "--report", str(report)], capsys)
    assert code == 0
    assert json.loads(report.read_text())["accepted"]
    code, out = run(["eval", "--net", str(net), "--points", "0.1;0.6", "--format", "json"], capsys)
    assert code == 0
    assert len(json.loads(out.out)["values"]) == 2
    code, out = run(["eval", "--spec", str(spec), "--points", "0.0"], capsys)
    assert code == 0 and "1.0" in out.out


def test_eval_needs_exactly_one_source(capsys):
    assert run(["eval", "--points", "0.1"], capsys)[0] == 2
