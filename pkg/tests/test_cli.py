import io
import json
import math
import subprocess
import sys

import pytest

from anticonc.cli import DEFAULT_SEED, run
from anticonc.poly import dump_poly, linear_form, make_poly


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def call_json(*argv):
    code, out, err = call(*argv)
    assert code == 0, err
    return json.loads(out)


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, P in {
        "pairs": make_poly(5, [((1, 2), 1.0), ((2, 3), 1.0), ((4, 5), 1.0)]),
        "witness": make_poly(32, [((2 * j - 1, 2 * j), 1.0) for j in range(1, 17)]),
        "linear": linear_form([1.0] * 10),
        "biased": make_poly(6, [((1, 2), 1.0), ((3, 4), 1.0), ((5, 6), 1.0)], "zero_one"),
    }.items():
        paths[name] = str(tmp_path / f"{name}.json")
        dump_poly(P, paths[name])
    return paths


def test_analyze(files):
    rep = call_json("analyze", "--poly", files["pairs"])
    res = rep["result"]
    assert res["greedy_rank"] == 2 and res["exact_rank"] == 2
    assert res["degree"] == 2 and res["variance"] == pytest.approx(3.0)
    assert len(res["influences"]) == 5
    assert rep["config"]["seed"] == DEFAULT_SEED and rep["config"]["subcommand"] == "analyze"


def test_compare_witness(files):
    res = call_json("compare", "--poly", files["witness"], "--interval", "-0.5", "0.5")["result"]
    want = math.comb(16, 8) / 2**16
    cols = res["table"]["columns"]
    rows = [dict(zip(cols, r)) for r in res["table"]["rows"]]
    for row in rows:
        assert row["measured"] == pytest.approx(want, abs=1e-12)
        assert round(row["measured"], 5) == 0.19638
    assert {"main", "rv", "ctv"} <= {row["bound"] for row in rows}


def test_bounds_rv():
    res = call_json("bounds", "--name", "rv", "--r", "16", "--d", "1", "--B", "1")["result"]
    assert res["value"] == pytest.approx(0.5, rel=1e-15)


def test_bounds_hypothesis_exit_code():
    code, out, err = call("bounds", "--name", "biased", "--r", "2", "--d", "3", "--p", "0.5")
    assert code == 2 and "hypothesis" in err
    assert json.loads(out)["result"]["hypothesis_ok"] is False


def test_input_errors():
    assert call("frobnicate")[0] == 1
    assert call()[0] == 1
    code, _, err = call("analyze", "--poly", "/nonexistent.json")
    assert code == 1 and err.startswith("error:") and err.count("\n") == 1


def test_malformed_poly(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert call("analyze", "--poly", str(bad))[0] == 1
    bad.write_text(json.dumps({"n": 2, "terms": [{"vars": [3], "coef": 1}]}))
    assert call("analyze", "--poly", str(bad))[0] == 1


def test_tree_infeasible_exit_code(files):
    assert call("tree", "--poly", files["witness"])[0] == 2


def test_tree_full_and_paths(files):
    res = call_json("tree", "--poly", files["linear"], "--full", "--no-strict", "--tau", "0.3", "--beta", "0.3", "--M", "1")["result"]
    assert sum(res["leaf_probabilities"].values()) == pytest.approx(1.0)
    res = call_json("tree", "--poly", files["linear"], "--paths", "20", "--no-strict")["result"]
    assert sum(res["leaf_counts"].values()) == 20


def test_smallball(files):
    res = call_json("smallball", "--poly", files["linear"], "--levy", "1", "2.5")["result"]
    assert [e["length"] for e in res["levy"]] == [1.0, 2.5]
    assert res["levy"][0]["value"] == pytest.approx(252 / 1024)
    assert res["mode"]["value"] == pytest.approx(252 / 1024)
    res = call_json("smallball", "--poly", files["biased"], "--p", "0.3", "--interval", "0", "1")["result"]
    # [0, 1) holds only the value 0: no pair is all ones
    assert res["interval"]["value"] == pytest.approx(0.91**3)


def test_graphs_pipeline():
    res = call_json("graphs", "--host", "K5", "--pattern", "triangle")["result"]
    assert res["copies"] == 10 and res["packing_rank_exact"] == 2
    assert res["mode"]["value"] == pytest.approx(max(m for _, m in res["histogram"]))
    # effective rank 2 < 3: the bound is flagged, not silently passed
    assert res["bound"]["hypothesis_ok"] is False and res["bound"]["vacuous"]


def test_graphs_host_file(tmp_path):
    f = tmp_path / "g.txt"
    f.write_text("0 1\n1 2\n2 0\n")
    res = call_json("graphs", "--host", str(f), "--pattern", "triangle")["result"]
    assert res["copies"] == 1


def test_parity_and_ordist():
    assert call_json("parity", "--builtin", "x1", "--n", "2")["result"]["correlation"] == 0.0
    assert call_json("parity", "--builtin", "parity", "--n", "6")["result"]["correlation"] == 0.5
    res = call_json("ordist", "--samples", "20000")["result"]
    assert res["params"]["D"] == 3
    est = res["agreement"]
    assert abs(est["value"] - res["or_zero_probability"]) <= est["ci_halfwidth"]


def test_calibrate_small():
    res = call_json("calibrate", "--corpus", "6")["result"]
    assert 0 < res["B"] <= 10


def test_byte_identical_reruns(files, tmp_path):
    argvs = [
        ("tree", "--poly", files["linear"], "--paths", "50", "--no-strict", "--seed", "7"),
        ("smallball", "--poly", files["witness"], "--method", "mc", "--samples", "5000"),
        ("ordist", "--samples", "5000", "--format", "csv"),
        ("compare", "--poly", files["pairs"], "--format", "csv"),
    ]
    for argv in argvs:
        a, b = call(*argv), call(*argv)
        assert a[0] == 0 and a == b


def test_csv_embeds_config(files):
    code, out, _ = call("compare", "--poly", files["pairs"], "--format", "csv")
    assert code == 0
    first, header = out.splitlines()[:2]
    assert first.startswith("# config: ") and json.loads(first[len("# config: "):])["seed"] == DEFAULT_SEED
    assert "bound" in header


def test_out_path(files, tmp_path):
    target = tmp_path / "rep.json"
    code, out, _ = call("analyze", "--poly", files["pairs"], "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["result"]["greedy_rank"] == 2


def test_random_seed_is_recorded(files):
    rep = call_json("tree", "--poly", files["linear"], "--paths", "5", "--no-strict", "--seed", "random")
    assert isinstance(rep["config"]["seed"], int)


def test_console_entry_point(files):
    proc = subprocess.run(
        [sys.executable, "-m", "anticonc.cli", "bounds", "--name", "ctv", "--m", "1e6", "--d", "2"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["value"] == pytest.approx(10 ** (-0.75))
